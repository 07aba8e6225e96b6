#include "seqtopo/hilbertian.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>

#include "seqtopo/error.hpp"

namespace seqtopo {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

template <typename F>
std::array<double, 64> integrate_q1(double h, F&& integrand) {
  std::array<double, 64> m{};
  for (int gz = 0; gz < 2; ++gz) {
    for (int gy = 0; gy < 2; ++gy) {
      for (int gx = 0; gx < 2; ++gx) {
        const double xi[3] = {gx ? kGauss : -kGauss, gy ? kGauss : -kGauss, gz ? kGauss : -kGauss};
        double n[8];
        double dn[8][3];
        for (int a = 0; a < 8; ++a) {
          const double s[3] = {kHexCorners[a].i ? 1.0 : -1.0, kHexCorners[a].j ? 1.0 : -1.0,
                               kHexCorners[a].k ? 1.0 : -1.0};
          const double f[3] = {1.0 + s[0] * xi[0], 1.0 + s[1] * xi[1], 1.0 + s[2] * xi[2]};
          n[a] = f[0] * f[1] * f[2] / 8.0;
          // Physical gradient: d/dx = (2/h) d/dxi.
          dn[a][0] = s[0] * f[1] * f[2] / 8.0 * (2.0 / h);
          dn[a][1] = f[0] * s[1] * f[2] / 8.0 * (2.0 / h);
          dn[a][2] = f[0] * f[1] * s[2] / 8.0 * (2.0 / h);
        }
        const double jac = (h / 2.0) * (h / 2.0) * (h / 2.0);
        for (int a = 0; a < 8; ++a) {
          for (int b = 0; b < 8; ++b) m[8 * a + b] += jac * integrand(n, dn, a, b);
        }
      }
    }
  }
  return m;
}

}  // namespace

std::array<double, 64> q1_laplacian_element(double h) {
  return integrate_q1(h, [](const double*, const double (*dn)[3], int a, int b) {
    return dn[a][0] * dn[b][0] + dn[a][1] * dn[b][1] + dn[a][2] * dn[b][2];
  });
}

std::array<double, 64> q1_mass_element(double h) {
  return integrate_q1(h, [](const double* n, const double (*)[3], int a, int b) { return n[a] * n[b]; });
}

struct HilbertianOperator::Impl {
  Eigen::SparseMatrix<double> a;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  CsrMatrix csr;
};

HilbertianOperator::HilbertianOperator(const StructuredHexMesh& mesh, double length,
                                       std::span<const Index> dirichlet_nodes)
    : impl_(std::make_unique<Impl>()), length_(length) {
  if (!(length >= 0.0) || !std::isfinite(length)) throw ConfigError("regularization length must be >= 0");
  const Index n = mesh.node_count();
  dirichlet_.assign(n, 0);
  for (Index node : dirichlet_nodes) {
    if (node >= n) throw DomainError("Dirichlet node index out of range");
    dirichlet_[node] = 1;
  }

  const auto lap = q1_laplacian_element(mesh.h());
  const auto mass = q1_mass_element(mesh.h());
  std::array<double, 64> ke{};
  for (int i = 0; i < 64; ++i) ke[i] = length * length * lap[i] + mass[i];

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.element_count() * 64 + n);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) {
        const Index r = nodes[a];
        const Index c = nodes[b];
        if (dirichlet_[r] || dirichlet_[c]) {
          if (r == c) triplets.emplace_back(r, c, ke[8 * a + b]);
          continue;
        }
        triplets.emplace_back(r, c, ke[8 * a + b]);
      }
    }
  }
  impl_->a.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  impl_->a.setFromTriplets(triplets.begin(), triplets.end());
  impl_->a.makeCompressed();
  impl_->llt.compute(impl_->a);
  if (impl_->llt.info() != Eigen::Success) throw SolverError("Hilbertian operator is not positive definite", 0.0, 0);

  // Row-major copy for matrix-vector products and inspection (A is symmetric,
  // so the column-major storage read as rows is the same matrix).
  CsrMatrix& csr = impl_->csr;
  csr.rows = n;
  csr.row_ptr.assign(n + 1, 0);
  for (Index r = 0; r < n; ++r) {
    csr.row_ptr[r + 1] = static_cast<Index>(impl_->a.outerIndexPtr()[r + 1]);
  }
  const auto nnz = static_cast<std::size_t>(impl_->a.nonZeros());
  csr.cols.resize(nnz);
  csr.values.resize(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    csr.cols[k] = static_cast<std::uint32_t>(impl_->a.innerIndexPtr()[k]);
    csr.values[k] = impl_->a.valuePtr()[k];
  }
}

HilbertianOperator::~HilbertianOperator() = default;
HilbertianOperator::HilbertianOperator(HilbertianOperator&&) noexcept = default;
HilbertianOperator& HilbertianOperator::operator=(HilbertianOperator&&) noexcept = default;

std::vector<double> HilbertianOperator::extend(std::span<const double> rhs) const {
  const Index n = size();
  if (rhs.size() != n) throw DomainError("Hilbertian right-hand side length does not match node count");
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (Index i = 0; i < n; ++i) b[static_cast<Eigen::Index>(i)] = dirichlet_[i] ? 0.0 : rhs[i];
  Eigen::VectorXd x = impl_->llt.solve(b);

  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    const double rel = (b - impl_->a * x).norm() / bnorm;
    if (!(rel <= 1e-8)) throw SolverError("Hilbertian extension did not reach the residual tolerance", rel, 1);
  }
  std::vector<double> out(n);
  for (Index i = 0; i < n; ++i) out[i] = dirichlet_[i] ? 0.0 : x[static_cast<Eigen::Index>(i)];
  return out;
}

std::vector<double> HilbertianOperator::apply(std::span<const double> v) const {
  if (v.size() != size()) throw DomainError("vector length does not match node count");
  std::vector<double> out(size());
  impl_->csr.multiply(v, out);
  return out;
}

double HilbertianOperator::inner(std::span<const double> a, std::span<const double> b) const {
  const std::vector<double> ab = apply(b);
  double s = 0.0;
  for (std::size_t i = 0; i < ab.size(); ++i) s += a[i] * ab[i];
  return s;
}

double HilbertianOperator::norm(std::span<const double> a) const { return std::sqrt(std::max(0.0, inner(a, a))); }

const CsrMatrix& HilbertianOperator::matrix() const { return impl_->csr; }

Index HilbertianOperator::size() const { return impl_->csr.rows; }

}  // namespace seqtopo
