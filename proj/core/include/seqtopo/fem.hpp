#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "seqtopo/mesh.hpp"

namespace seqtopo {

inline constexpr int kElementDofs = 24;

// Row-major 24x24 element matrix. Local DOF 3*a + c is component c of the
// element's local vertex a (see kHexCorners).
using ElementMatrix = std::array<double, kElementDofs * kElementDofs>;
using ElementVector = std::array<double, kElementDofs>;

// Trilinear hexahedron stiffness for a cube of edge h, unit Young's modulus
// and Poisson ratio nu, from 2x2x2 Gauss quadrature. Throws MaterialError
// unless h > 0 and 0 <= nu < 0.5.
ElementMatrix element_stiffness_unit(double h, double nu);

ElementVector gather_element(const StructuredHexMesh& mesh, Index e, std::span<const double> u);

// u^T k u for one element.
double element_energy(const ElementMatrix& k, const ElementVector& ue);

struct CsrMatrix {
  Index rows = 0;
  std::vector<Index> row_ptr;
  std::vector<std::uint32_t> cols;
  std::vector<double> values;

  void multiply(std::span<const double> x, std::span<double> y) const;
  double at(Index r, Index c) const;
  std::vector<double> diagonal() const;
  Index nonzeros() const { return values.size(); }

  // Dense row-major input, zeros dropped.
  static CsrMatrix from_dense(Index n, std::span<const double> dense);
};

// Mechanical boundary conditions on the mesh DOFs (3 per node, node-major).
struct BoundaryConditions {
  std::vector<std::uint8_t> fixed;  // 1 = displacement prescribed to zero
  std::vector<double> load;
  std::vector<Index> load_nodes;    // traction region; kept static by the level-set stage
};

// K U = F with homogeneous Dirichlet DOFs already eliminated: the row and
// column of a fixed DOF are zero apart from the original diagonal entry, and
// its load entry is zero.
struct LinearSystem {
  CsrMatrix K;
  std::vector<double> F;
  std::vector<std::uint8_t> fixed;
};

// Owns the sparsity pattern of the global stiffness matrix and the map from
// element-local entries to CSR slots, so repeated assemblies on one mesh only
// touch the values array.
class StiffnessAssembler {
 public:
  explicit StiffnessAssembler(const StructuredHexMesh& mesh);

  // K = sum_e scalars[e] * scatter(k0). Throws AssemblyError on a non-positive
  // or non-finite multiplier.
  LinearSystem assemble(std::span<const double> scalars, const ElementMatrix& k0,
                        std::span<const std::uint8_t> fixed, std::span<const double> load) const;

  const StructuredHexMesh& mesh() const { return *mesh_; }

 private:
  const StructuredHexMesh* mesh_;
  CsrMatrix pattern_;
  std::vector<std::uint32_t> scatter_;  // element_count * 576 CSR value slots
};

LinearSystem assemble(const StructuredHexMesh& mesh, std::span<const double> scalars, const ElementMatrix& k0,
                      std::span<const std::uint8_t> fixed, std::span<const double> load);

struct SolverOptions {
  double rel_tol = 1e-8;
  int max_iterations = 0;  // 0 selects 10 * DOF count
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients. guess, when non-empty, is the
// starting iterate. Throws SolverError carrying the final residual when the
// iteration cap is reached.
std::vector<double> solve(const LinearSystem& system, const SolverOptions& options = {},
                          std::span<const double> guess = {}, SolveStats* stats = nullptr);

// Dense LU reference path, limited to 3000 DOFs.
std::vector<double> solve_dense(const LinearSystem& system);

// U^T F; equals U^T K U at the solution. Throws DomainError on length mismatch.
double compliance(std::span<const double> u, std::span<const double> f);

}  // namespace seqtopo
