#include "seqtopo/fem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "seqtopo/error.hpp"

namespace seqtopo {

ElementMatrix element_stiffness_unit(double h, double nu) {
  if (!(h > 0.0) || !std::isfinite(h)) throw MaterialError("element stiffness: h must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) {
    throw MaterialError("element stiffness: Poisson ratio must satisfy 0 <= nu < 0.5, got " + std::to_string(nu));
  }
  const double lambda = nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = 1.0 / (2.0 * (1.0 + nu));
  // Voigt order xx, yy, zz, yz, xz, xy with engineering shear strains.
  double D[6][6] = {};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) D[i][j] = lambda;
    D[i][i] = lambda + 2.0 * mu;
    D[i + 3][i + 3] = mu;
  }

  ElementMatrix ke{};
  const double g = 1.0 / std::sqrt(3.0);
  const double gauss[2] = {-g, g};
  const double detj = h * h * h / 8.0;
  const double scale = 2.0 / h;

  for (double s : gauss) {
    for (double t : gauss) {
      for (double p : gauss) {
        double dn[8][3];
        for (int a = 0; a < 8; ++a) {
          const double sa = 2.0 * kHexCorners[a].i - 1.0;
          const double ta = 2.0 * kHexCorners[a].j - 1.0;
          const double pa = 2.0 * kHexCorners[a].k - 1.0;
          dn[a][0] = 0.125 * sa * (1.0 + ta * t) * (1.0 + pa * p) * scale;
          dn[a][1] = 0.125 * ta * (1.0 + sa * s) * (1.0 + pa * p) * scale;
          dn[a][2] = 0.125 * pa * (1.0 + sa * s) * (1.0 + ta * t) * scale;
        }
        double B[6][kElementDofs] = {};
        for (int a = 0; a < 8; ++a) {
          const int c = 3 * a;
          B[0][c + 0] = dn[a][0];
          B[1][c + 1] = dn[a][1];
          B[2][c + 2] = dn[a][2];
          B[3][c + 1] = dn[a][2];
          B[3][c + 2] = dn[a][1];
          B[4][c + 0] = dn[a][2];
          B[4][c + 2] = dn[a][0];
          B[5][c + 0] = dn[a][1];
          B[5][c + 1] = dn[a][0];
        }
        double DB[6][kElementDofs];
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < kElementDofs; ++j) {
            double sum = 0.0;
            for (int k = 0; k < 6; ++k) sum += D[i][k] * B[k][j];
            DB[i][j] = sum;
          }
        }
        for (int i = 0; i < kElementDofs; ++i) {
          for (int j = 0; j < kElementDofs; ++j) {
            double sum = 0.0;
            for (int k = 0; k < 6; ++k) sum += B[k][i] * DB[k][j];
            ke[i * kElementDofs + j] += sum * detj;
          }
        }
      }
    }
  }
  // Symmetrize away quadrature round-off.
  for (int i = 0; i < kElementDofs; ++i) {
    for (int j = i + 1; j < kElementDofs; ++j) {
      const double avg = 0.5 * (ke[i * kElementDofs + j] + ke[j * kElementDofs + i]);
      ke[i * kElementDofs + j] = avg;
      ke[j * kElementDofs + i] = avg;
    }
  }
  return ke;
}

ElementVector gather_element(const StructuredHexMesh& mesh, Index e, std::span<const double> u) {
  const auto nodes = mesh.element_nodes(e);
  ElementVector ue{};
  for (int a = 0; a < 8; ++a) {
    for (int c = 0; c < 3; ++c) ue[3 * a + c] = u[3 * nodes[a] + c];
  }
  return ue;
}

double element_energy(const ElementMatrix& k, const ElementVector& ue) {
  double energy = 0.0;
  for (int i = 0; i < kElementDofs; ++i) {
    double row = 0.0;
    for (int j = 0; j < kElementDofs; ++j) row += k[i * kElementDofs + j] * ue[j];
    energy += ue[i] * row;
  }
  return energy;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const double* v = values.data();
  const std::uint32_t* c = cols.data();
  for (Index r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (Index p = row_ptr[r]; p < row_ptr[r + 1]; ++p) sum += v[p] * x[c[p]];
    y[r] = sum;
  }
}

double CsrMatrix::at(Index r, Index c) const {
  const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) return 0.0;
  return values[static_cast<Index>(it - cols.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows, 0.0);
  for (Index r = 0; r < rows; ++r) d[r] = at(r, r);
  return d;
}

CsrMatrix CsrMatrix::from_dense(Index n, std::span<const double> dense) {
  CsrMatrix m;
  m.rows = n;
  m.row_ptr.assign(n + 1, 0);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const double v = dense[r * n + c];
      if (v != 0.0) {
        m.cols.push_back(static_cast<std::uint32_t>(c));
        m.values.push_back(v);
      }
    }
    m.row_ptr[r + 1] = m.values.size();
  }
  return m;
}

StiffnessAssembler::StiffnessAssembler(const StructuredHexMesh& mesh) : mesh_(&mesh) {
  const Index nn = mesh.node_count();
  const Index ndof = mesh.dof_count();

  // Node-to-node pattern: every node couples to the lattice neighbours within
  // one step along each axis. Offsets are enumerated k-slowest so the column
  // indices come out sorted.
  std::vector<std::vector<Index>> neighbours(nn);
  for (Index n = 0; n < nn; ++n) {
    const auto l = mesh.node_lattice(n);
    auto& list = neighbours[n];
    for (int dk = -1; dk <= 1; ++dk) {
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int i = l.i + di;
          const int j = l.j + dj;
          const int k = l.k + dk;
          if (i < 0 || j < 0 || k < 0 || i > mesh.nx() || j > mesh.ny() || k > mesh.nz()) continue;
          list.push_back(mesh.node_index(i, j, k));
        }
      }
    }
  }

  pattern_.rows = ndof;
  pattern_.row_ptr.assign(ndof + 1, 0);
  for (Index n = 0; n < nn; ++n) {
    for (int c = 0; c < 3; ++c) pattern_.row_ptr[3 * n + c + 1] = 3 * neighbours[n].size();
  }
  std::partial_sum(pattern_.row_ptr.begin(), pattern_.row_ptr.end(), pattern_.row_ptr.begin());
  pattern_.cols.resize(pattern_.row_ptr.back());
  pattern_.values.assign(pattern_.row_ptr.back(), 0.0);
  for (Index n = 0; n < nn; ++n) {
    for (int c = 0; c < 3; ++c) {
      Index p = pattern_.row_ptr[3 * n + c];
      for (Index m : neighbours[n]) {
        for (int d = 0; d < 3; ++d) pattern_.cols[p++] = static_cast<std::uint32_t>(3 * m + d);
      }
    }
  }

  const Index ne = mesh.element_count();
  scatter_.resize(ne * kElementDofs * kElementDofs);
  for (Index e = 0; e < ne; ++e) {
    const auto nodes = mesh.element_nodes(e);
    std::uint32_t* slot = scatter_.data() + e * kElementDofs * kElementDofs;
    for (int a = 0; a < 8; ++a) {
      const auto& row_list = neighbours[nodes[a]];
      for (int ca = 0; ca < 3; ++ca) {
        const Index row = 3 * nodes[a] + ca;
        for (int b = 0; b < 8; ++b) {
          const auto pos = static_cast<Index>(
              std::lower_bound(row_list.begin(), row_list.end(), nodes[b]) - row_list.begin());
          for (int cb = 0; cb < 3; ++cb) {
            slot[(3 * a + ca) * kElementDofs + 3 * b + cb] =
                static_cast<std::uint32_t>(pattern_.row_ptr[row] + 3 * pos + cb);
          }
        }
      }
    }
  }
}

LinearSystem StiffnessAssembler::assemble(std::span<const double> scalars, const ElementMatrix& k0,
                                          std::span<const std::uint8_t> fixed,
                                          std::span<const double> load) const {
  const Index ne = mesh_->element_count();
  const Index ndof = mesh_->dof_count();
  if (scalars.size() != ne) throw AssemblyError("assemble: one multiplier per element required");
  if (fixed.size() != ndof || load.size() != ndof) {
    throw AssemblyError("assemble: DOF mask and load must have one entry per DOF");
  }

  LinearSystem sys;
  sys.K = pattern_;
  double* values = sys.K.values.data();
  for (Index e = 0; e < ne; ++e) {
    const double s = scalars[e];
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw AssemblyError("assemble: element " + std::to_string(e) + " has non-positive stiffness multiplier " +
                          std::to_string(s));
    }
    const std::uint32_t* slot = scatter_.data() + e * kElementDofs * kElementDofs;
    for (int q = 0; q < kElementDofs * kElementDofs; ++q) values[slot[q]] += s * k0[q];
  }

  for (Index r = 0; r < ndof; ++r) {
    for (Index p = sys.K.row_ptr[r]; p < sys.K.row_ptr[r + 1]; ++p) {
      const Index c = sys.K.cols[p];
      if (c == r) continue;
      if (fixed[r] || fixed[c]) values[p] = 0.0;
    }
  }
  sys.F.assign(load.begin(), load.end());
  sys.fixed.assign(fixed.begin(), fixed.end());
  for (Index r = 0; r < ndof; ++r) {
    if (fixed[r]) sys.F[r] = 0.0;
  }
  return sys;
}

LinearSystem assemble(const StructuredHexMesh& mesh, std::span<const double> scalars, const ElementMatrix& k0,
                      std::span<const std::uint8_t> fixed, std::span<const double> load) {
  return StiffnessAssembler(mesh).assemble(scalars, k0, fixed, load);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> solve(const LinearSystem& system, const SolverOptions& options, std::span<const double> guess,
                          SolveStats* stats) {
  const Index n = system.K.rows;
  if (system.F.size() != n) throw DomainError("solve: load vector length does not match matrix");

  std::vector<double> x(n, 0.0);
  if (!guess.empty()) {
    if (guess.size() != n) throw DomainError("solve: initial guess length does not match matrix");
    std::copy(guess.begin(), guess.end(), x.begin());
    for (Index i = 0; i < n; ++i) {
      if (!system.fixed.empty() && system.fixed[i]) x[i] = 0.0;
    }
  }

  const double fnorm = std::sqrt(dot(system.F, system.F));
  if (fnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return std::vector<double>(n, 0.0);
  }

  std::vector<double> inv_diag = system.K.diagonal();
  for (auto& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("solve: non-positive diagonal entry", 1.0, 0);
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  system.K.multiply(x, q);
  for (Index i = 0; i < n; ++i) r[i] = system.F[i] - q[i];

  const double target = options.rel_tol * fnorm;
  const int cap = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= target) {
    if (stats) *stats = {0, rnorm / fnorm};
    return x;
  }

  for (Index i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (it < cap) {
    ++it;
    system.K.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      throw SolverError("solve: matrix is not positive definite along a search direction", rnorm / fnorm, it);
    }
    const double alpha = rz / pq;
    for (Index i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rnorm = std::sqrt(dot(r, r));
    if (rnorm <= target) break;
    for (Index i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (rnorm > target) {
    throw SolverError("solve: conjugate gradients did not converge in " + std::to_string(cap) +
                          " iterations (relative residual " + std::to_string(rnorm / fnorm) + ")",
                      rnorm / fnorm, it);
  }
  if (stats) *stats = {it, rnorm / fnorm};
  return x;
}

std::vector<double> solve_dense(const LinearSystem& system) {
  const Index n = system.K.rows;
  if (n > 3000) throw DomainError("solve_dense: limited to 3000 DOFs");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Index r = 0; r < n; ++r) {
    for (Index p = system.K.row_ptr[r]; p < system.K.row_ptr[r + 1]; ++p) {
      a(static_cast<Eigen::Index>(r), system.K.cols[p]) = system.K.values[p];
    }
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(system.F.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  return {x.data(), x.data() + x.size()};
}

double compliance(std::span<const double> u, std::span<const double> f) {
  if (u.size() != f.size()) throw DomainError("compliance: length mismatch");
  return dot(u, f);
}

}  // namespace seqtopo
