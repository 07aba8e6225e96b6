#pragma once

#include <memory>
#include <span>
#include <vector>

#include "seqtopo/fem.hpp"
#include "seqtopo/mesh.hpp"

namespace seqtopo {

// A_H = l^2 K_lap + M over trilinear node functions, with homogeneous
// Dirichlet rows and columns on a node set (the load region). Assembled and
// Cholesky-factored once at construction.
class HilbertianOperator {
 public:
  HilbertianOperator(const StructuredHexMesh& mesh, double length, std::span<const Index> dirichlet_nodes);
  ~HilbertianOperator();
  HilbertianOperator(HilbertianOperator&&) noexcept;
  HilbertianOperator& operator=(HilbertianOperator&&) noexcept;

  // Solves A_H v = rhs; v is zero on the Dirichlet nodes.
  std::vector<double> extend(std::span<const double> rhs) const;

  std::vector<double> apply(std::span<const double> v) const;
  double inner(std::span<const double> a, std::span<const double> b) const;
  double norm(std::span<const double> a) const;

  const CsrMatrix& matrix() const;
  Index size() const;
  double length() const { return length_; }
  const std::vector<std::uint8_t>& dirichlet_mask() const { return dirichlet_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double length_ = 0.0;
  std::vector<std::uint8_t> dirichlet_;
};

// Element matrices of the trilinear cube of edge h, row-major 8x8, corner
// order as kHexCorners.
std::array<double, 64> q1_laplacian_element(double h);
std::array<double, 64> q1_mass_element(double h);

}  // namespace seqtopo
