#pragma once

#include <string>
#include <string_view>

#include "seqtopo/fem.hpp"
#include "seqtopo/mesh.hpp"

namespace seqtopo {

enum class BenchmarkId { Cantilever, Mbb, Custom };

BenchmarkId parse_benchmark_id(std::string_view text);
std::string_view benchmark_name(BenchmarkId id);

struct Resolution {
  int nx = 40;
  int ny = 20;
  int nz = 20;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct BenchmarkProblem {
  StructuredHexMesh mesh;
  BoundaryConditions bc;
  std::vector<Index> support_nodes;  // union of all constrained nodes
};

// Both benchmarks live on the 2 x 1 x 1 domain with cubic elements, so the
// resolution must satisfy nx = 2 ny = 2 nz.
//
// cantilever: four 0.3 x 0.3 corner squares of x = 0 clamped; load (0,0,-1)
//             shared equally by the nodes of the r = 0.1 disk centred at
//             (2, 0.5, 0.5) on x = 2.
// mbb:        u_x = 0 on x = 0; u_z = 0 on the bottom strip x in [2 - h, 2];
//             load (0,0,-1) on the r = 0.1 half-disk centred at (0, 0.5, 1)
//             on the top face. u_y is additionally held on the strip nodes of
//             the y = 0.5 symmetry plane, which removes the rigid y-translation
//             without changing the (y-symmetric) solution.
// Throws ConfigError for Custom (custom problems are built from config) or
// an inconsistent resolution.
BenchmarkProblem build_benchmark(BenchmarkId id, Resolution resolution);

// Adds a load of total `force` spread equally over `nodes`.
void distribute_load(BoundaryConditions& bc, std::span<const Index> nodes, const Vec3& force);

// Marks the masked DOFs of `nodes` as fixed.
void fix_nodes(BoundaryConditions& bc, std::span<const Index> nodes, DofMask mask);

}  // namespace seqtopo
