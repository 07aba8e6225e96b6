#include <algorithm>
#include <cmath>
#include <limits>

#include "seqtopo/error.hpp"
#include "seqtopo/kdtree.hpp"
#include "seqtopo/parallel.hpp"
#include "seqtopo/transfer.hpp"

namespace seqtopo {

namespace {

ClosestPoint closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = norm2(ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec3 q = a + t * ab;
  return {q, norm2(p - q)};
}

}  // namespace

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;

  const double scale = std::max(norm2(ab), norm2(ac));
  if (norm2(cross(ab, ac)) <= 1e-24 * scale * scale) {
    // Degenerate triangle: nearest point over the three edges.
    ClosestPoint best = closest_on_segment(p, a, b);
    for (const ClosestPoint& cand : {closest_on_segment(p, b, c), closest_on_segment(p, c, a)}) {
      if (cand.distance2 < best.distance2) best = cand;
    }
    return best;
  }

  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {a, norm2(p - a)};

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return {b, norm2(p - b)};

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    const Vec3 q = a + v * ab;
    return {q, norm2(p - q)};
  }

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return {c, norm2(p - c)};

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    const Vec3 q = a + w * ac;
    return {q, norm2(p - q)};
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    const Vec3 q = b + w * (c - b);
    return {q, norm2(p - q)};
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  const Vec3 q = a + v * ab + w * ac;
  return {q, norm2(p - q)};
}

namespace {

double triangle_distance2(const TriangleSurface& s, std::size_t t, const Vec3& p) {
  const auto& tri = s.triangles[t];
  return closest_point_on_triangle(p, s.vertices[tri[0]], s.vertices[tri[1]], s.vertices[tri[2]]).distance2;
}

void require_surface(const StructuredHexMesh& mesh, const TriangleSurface& surface) {
  if (surface.empty()) throw GeometryError("signed distance: surface has no triangles");
  if (surface.boxes.size() != surface.size() || surface.centroids.size() != surface.size()) {
    throw GeometryError("signed distance: surface is not finalized");
  }
  (void)mesh;
}

}  // namespace

NodalField unsigned_distance(const StructuredHexMesh& mesh, const TriangleSurface& surface) {
  require_surface(mesh, surface);
  const KdTree tree(surface.centroids);

  // Largest centroid-to-vertex distance bounds how far any point of a
  // triangle can be from its centroid.
  double r_max = 0.0;
  for (std::size_t t = 0; t < surface.size(); ++t) {
    for (auto v : surface.triangles[t]) r_max = std::max(r_max, norm(surface.vertices[v] - surface.centroids[t]));
  }

  NodalField out(mesh.node_count());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> candidates;
    for (std::size_t n = begin; n < end; ++n) {
      const Vec3 p = mesh.node_coords(n);
      const KdTree::Hit hit = tree.nearest(p);
      // Any triangle holding the closest surface point has its centroid within
      // d_true + r_max <= d0 + r_max; 2 r_max adds margin.
      const double radius = std::sqrt(hit.distance2) + 2.0 * r_max;
      candidates.clear();
      tree.within_radius(p, radius * (1.0 + 1e-12), candidates);

      double best = triangle_distance2(surface, hit.index, p);
      for (std::uint32_t t : candidates) {
        if (surface.boxes[t].distance2(p) > best * (1.0 + 1e-12)) continue;
        best = std::min(best, triangle_distance2(surface, t, p));
      }
      out[n] = std::sqrt(best);
    }
  });
  return out;
}

NodalField unsigned_distance_brute_force(const StructuredHexMesh& mesh, const TriangleSurface& surface) {
  require_surface(mesh, surface);
  NodalField out(mesh.node_count());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const Vec3 p = mesh.node_coords(n);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < surface.size(); ++t) best = std::min(best, triangle_distance2(surface, t, p));
    out[n] = std::sqrt(best);
  }
  return out;
}

NodalField build_sdf(const StructuredHexMesh& mesh, const TriangleSurface& surface, const NodalField& nodal_density,
                     double iso) {
  if (nodal_density.size() != mesh.node_count()) {
    throw DomainError("nodal density length does not match node count");
  }
  NodalField phi = unsigned_distance(mesh, surface);
  for (std::size_t n = 0; n < phi.size(); ++n) {
    if (nodal_density[n] >= iso) phi[n] = -phi[n];
  }
  return phi;
}

}  // namespace seqtopo
