#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "seqtopo/geometry.hpp"
#include "seqtopo/mesh.hpp"

namespace seqtopo {

using NodalField = std::vector<double>;

// ---- density mapping ------------------------------------------------------

enum class NodalFitKind { LeastSquares, InverseDistance, Copy };

struct NodalFit {
  double value = 0.0;  // unclamped
  NodalFitKind kind = NodalFitKind::Copy;
};

// Fit at a single node from the densities of its incident elements.
NodalFit fit_nodal_density(const StructuredHexMesh& mesh, const std::vector<double>& rho, Index node);

// Per-node densities, clamped to [0,1].
NodalField map_densities_to_nodes(const StructuredHexMesh& mesh, const std::vector<double>& rho);

// ---- iso-surface extraction -----------------------------------------------

struct TriangleSurface {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Aabb> boxes;       // per triangle
  std::vector<Vec3> centroids;   // per triangle
  std::size_t dropped_degenerate = 0;
  std::size_t ambiguous_cells = 0;

  bool empty() const { return triangles.empty(); }
  std::size_t size() const { return triangles.size(); }

  // Recomputes boxes and centroids from vertices/triangles.
  void finalize();

  Vec3 normal(std::size_t t) const;  // unit normal from the winding
  double area(std::size_t t) const;
  double total_area() const;
};

// Corner edges of a hex cell (corner order as kHexCorners).
inline constexpr std::array<std::array<int, 2>, 12> kCellEdges{{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Triangles (as cell-edge triples) for each of the 256 corner masks; bit c set
// means corner c is solid. Generated from a face-consistent rule that keeps
// solid corners separated on ambiguous faces, so neighbouring cells agree.
const std::array<std::vector<std::array<int, 3>>, 256>& marching_cubes_table();

// True when some face of the mask has the alternating (saddle) pattern.
bool has_ambiguous_face(int mask);

// Marching cubes on a nodal field; values >= iso are solid. Triangle normals
// point from solid toward void.
TriangleSurface extract_isosurface(const StructuredHexMesh& mesh, const NodalField& nodal, double iso);

// ---- signed distance -----------------------------------------------------

struct ClosestPoint {
  Vec3 point;
  double distance2 = 0.0;
};

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Exact unsigned distance from every node to the surface, k-d tree accelerated.
NodalField unsigned_distance(const StructuredHexMesh& mesh, const TriangleSurface& surface);

// Same quantity by exhaustive search over all triangles.
NodalField unsigned_distance_brute_force(const StructuredHexMesh& mesh, const TriangleSurface& surface);

// Signed distance: negative where the nodal density is >= iso.
NodalField build_sdf(const StructuredHexMesh& mesh, const TriangleSurface& surface, const NodalField& nodal_density,
                     double iso);

}  // namespace seqtopo
