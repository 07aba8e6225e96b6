#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "seqtopo/error.hpp"
#include "seqtopo/parallel.hpp"
#include "seqtopo/transfer.hpp"

namespace seqtopo {

namespace {

struct CellFace {
  std::array<int, 4> corners;  // cyclic
  Vec3 normal;                 // outward
};

constexpr std::array<CellFace, 6> kCellFaces{{
    {{0, 1, 2, 3}, {0, 0, -1}},
    {{4, 5, 6, 7}, {0, 0, 1}},
    {{0, 1, 5, 4}, {0, -1, 0}},
    {{3, 2, 6, 7}, {0, 1, 0}},
    {{0, 3, 7, 4}, {-1, 0, 0}},
    {{1, 2, 6, 5}, {1, 0, 0}},
}};

Vec3 corner_position(int c) {
  const auto& l = kHexCorners[c];
  return {static_cast<double>(l.i), static_cast<double>(l.j), static_cast<double>(l.k)};
}

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    const auto& ce = kCellEdges[e];
    if ((ce[0] == a && ce[1] == b) || (ce[0] == b && ce[1] == a)) return e;
  }
  throw std::logic_error("marching cubes: corners do not share an edge");
}

Vec3 edge_midpoint(int e) { return 0.5 * (corner_position(kCellEdges[e][0]) + corner_position(kCellEdges[e][1])); }

// Builds the triangle list for one corner mask.
std::vector<std::array<int, 3>> build_case(int mask) {
  auto solid = [mask](int c) { return (mask >> c) & 1; };
  std::array<int, 12> next;
  next.fill(-1);

  auto add_segment = [&](int p, int q, int solid_corner, const Vec3& n) {
    const Vec3 mp = edge_midpoint(p);
    const Vec3 mq = edge_midpoint(q);
    // Orient so the solid side lies to the left when viewed from outside.
    if (dot(cross(mq - mp, corner_position(solid_corner) - mp), n) < 0.0) std::swap(p, q);
    if (next[p] != -1) throw std::logic_error("marching cubes: inconsistent face segments");
    next[p] = q;
  };

  for (const CellFace& f : kCellFaces) {
    std::array<int, 4> cut_edges{};
    int cuts = 0;
    for (int i = 0; i < 4; ++i) {
      const int a = f.corners[i];
      const int b = f.corners[(i + 1) % 4];
      if (solid(a) != solid(b)) cut_edges[cuts++] = edge_between(a, b);
    }
    if (cuts == 2) {
      int s = -1;
      for (int c : f.corners) {
        if (solid(c)) s = c;
      }
      add_segment(cut_edges[0], cut_edges[1], s, f.normal);
    } else if (cuts == 4) {
      // Saddle face: cut off each solid corner separately.
      for (int i = 0; i < 4; ++i) {
        const int c = f.corners[i];
        if (!solid(c)) continue;
        const int prev = f.corners[(i + 3) % 4];
        const int nxt = f.corners[(i + 1) % 4];
        add_segment(edge_between(prev, c), edge_between(c, nxt), c, f.normal);
      }
    }
  }

  std::vector<std::array<int, 3>> tris;
  std::array<bool, 12> used{};
  for (int start = 0; start < 12; ++start) {
    if (next[start] == -1 || used[start]) continue;
    std::vector<int> loop;
    int e = start;
    while (!used[e]) {
      used[e] = true;
      loop.push_back(e);
      e = next[e];
      if (e == -1) throw std::logic_error("marching cubes: open loop");
    }
    if (e != start) throw std::logic_error("marching cubes: malformed loop");
    // The loop winds around the solid patch; reverse the fan so normals face void.
    for (std::size_t i = 1; i + 1 < loop.size(); ++i) tris.push_back({loop[0], loop[i + 1], loop[i]});
  }
  return tris;
}

struct RawTriangle {
  std::array<Vec3, 3> p;
};

struct KeyHash {
  std::size_t operator()(const std::array<long long, 3>& k) const {
    std::size_t h = std::hash<long long>{}(k[0]);
    h ^= std::hash<long long>{}(k[1]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<long long>{}(k[2]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace

const std::array<std::vector<std::array<int, 3>>, 256>& marching_cubes_table() {
  static const auto table = [] {
    std::array<std::vector<std::array<int, 3>>, 256> t;
    for (int m = 0; m < 256; ++m) t[m] = build_case(m);
    return t;
  }();
  return table;
}

bool has_ambiguous_face(int mask) {
  for (const CellFace& f : kCellFaces) {
    const std::array<int, 4> s{(mask >> f.corners[0]) & 1, (mask >> f.corners[1]) & 1, (mask >> f.corners[2]) & 1,
                               (mask >> f.corners[3]) & 1};
    if (s[0] == s[2] && s[1] == s[3] && s[0] != s[1]) return true;
  }
  return false;
}

void TriangleSurface::finalize() {
  boxes.resize(triangles.size());
  centroids.resize(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Vec3& a = vertices[triangles[t][0]];
    const Vec3& b = vertices[triangles[t][1]];
    const Vec3& c = vertices[triangles[t][2]];
    Aabb box{a, a};
    for (const Vec3* v : {&b, &c}) {
      for (std::size_t i = 0; i < 3; ++i) {
        box.lo[i] = std::min(box.lo[i], (*v)[i]);
        box.hi[i] = std::max(box.hi[i], (*v)[i]);
      }
    }
    boxes[t] = box;
    centroids[t] = (a + b + c) * (1.0 / 3.0);
  }
}

Vec3 TriangleSurface::normal(std::size_t t) const {
  const Vec3& a = vertices[triangles[t][0]];
  const Vec3 n = cross(vertices[triangles[t][1]] - a, vertices[triangles[t][2]] - a);
  const double len = norm(n);
  return len > 0.0 ? n * (1.0 / len) : Vec3{};
}

double TriangleSurface::area(std::size_t t) const {
  const Vec3& a = vertices[triangles[t][0]];
  return 0.5 * norm(cross(vertices[triangles[t][1]] - a, vertices[triangles[t][2]] - a));
}

double TriangleSurface::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) s += area(t);
  return s;
}

TriangleSurface extract_isosurface(const StructuredHexMesh& mesh, const NodalField& nodal, double iso) {
  if (nodal.size() != mesh.node_count()) throw DomainError("nodal field length does not match node count");
  for (double v : nodal) {
    if (!std::isfinite(v)) throw DomainError("nodal field contains non-finite values");
  }
  const auto& table = marching_cubes_table();

  // Edge vertex, interpolated from the lower-indexed node so that both cells
  // sharing an edge produce bit-identical coordinates.
  auto edge_vertex = [&](Index na, Index nb) {
    if (nb < na) std::swap(na, nb);
    const double va = nodal[na];
    const double vb = nodal[nb];
    const double t = (iso - va) / (vb - va);
    const Vec3 xa = mesh.node_coords(na);
    const Vec3 xb = mesh.node_coords(nb);
    if (t <= 0.0) return xa;
    if (t >= 1.0) return xb;
    return xa + t * (xb - xa);
  };

  const std::size_t cells = mesh.element_count();
  const std::size_t workers = static_cast<std::size_t>(worker_count());
  const std::size_t chunks = std::max<std::size_t>(1, std::min(workers, cells));
  std::vector<std::vector<RawTriangle>> chunk_tris(chunks);
  std::vector<std::size_t> chunk_ambiguous(chunks, 0);
  const std::size_t chunk_size = (cells + chunks - 1) / chunks;
  parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t ch = cb; ch < ce; ++ch) {
      const std::size_t begin = ch * chunk_size;
      const std::size_t end = std::min(cells, begin + chunk_size);
      for (std::size_t e = begin; e < end; ++e) {
        const auto nodes = mesh.element_nodes(e);
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          if (nodal[nodes[c]] >= iso) mask |= 1 << c;
        }
        if (mask == 0 || mask == 255) continue;
        if (has_ambiguous_face(mask)) ++chunk_ambiguous[ch];
        for (const auto& tri : table[mask]) {
          RawTriangle rt;
          for (int v = 0; v < 3; ++v) {
            const auto& edge = kCellEdges[tri[v]];
            rt.p[v] = edge_vertex(nodes[edge[0]], nodes[edge[1]]);
          }
          chunk_tris[ch].push_back(rt);
        }
      }
    }
  });

  TriangleSurface surface;
  const double quantum = 1e-9 * mesh.h();
  const double min_area = 1e-12 * mesh.h() * mesh.h();
  std::unordered_map<std::array<long long, 3>, std::uint32_t, KeyHash> welded;
  auto vertex_id = [&](const Vec3& p) {
    const std::array<long long, 3> key{std::llround(p.x / quantum), std::llround(p.y / quantum),
                                       std::llround(p.z / quantum)};
    auto [it, inserted] = welded.try_emplace(key, static_cast<std::uint32_t>(surface.vertices.size()));
    if (inserted) surface.vertices.push_back(p);
    return it->second;
  };

  for (std::size_t ch = 0; ch < chunks; ++ch) {
    surface.ambiguous_cells += chunk_ambiguous[ch];
    for (const RawTriangle& rt : chunk_tris[ch]) {
      const double area = 0.5 * norm(cross(rt.p[1] - rt.p[0], rt.p[2] - rt.p[0]));
      if (area < min_area) {
        ++surface.dropped_degenerate;
        continue;
      }
      const std::array<std::uint32_t, 3> ids{vertex_id(rt.p[0]), vertex_id(rt.p[1]), vertex_id(rt.p[2])};
      if (ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2]) {
        ++surface.dropped_degenerate;
        continue;
      }
      surface.triangles.push_back(ids);
    }
  }
  surface.finalize();
  return surface;
}

}  // namespace seqtopo
