#include <algorithm>
#include <cmath>

#include "seqtopo/error.hpp"
#include "seqtopo/parallel.hpp"
#include "seqtopo/transfer.hpp"

namespace seqtopo {

namespace {

// LDL^T without pivoting on the SPD 4x4 normal matrix. Returns false when the
// smallest pivot falls below 1e-10 of the trace.
bool solve_normal_equations(std::array<std::array<double, 4>, 4> a, std::array<double, 4>& b) {
  const double trace = a[0][0] + a[1][1] + a[2][2] + a[3][3];
  for (int k = 0; k < 4; ++k) {
    const double pivot = a[k][k];
    if (!(pivot >= 1e-10 * trace)) return false;
    for (int i = k + 1; i < 4; ++i) {
      const double f = a[i][k] / pivot;
      for (int j = k; j < 4; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  for (int k = 3; k >= 0; --k) {
    double s = b[k];
    for (int j = k + 1; j < 4; ++j) s -= a[k][j] * b[j];
    b[k] = s / a[k][k];
  }
  return true;
}

}  // namespace

NodalFit fit_nodal_density(const StructuredHexMesh& mesh, const std::vector<double>& rho, Index node) {
  const std::vector<Index> elems = mesh.node_elements(node);
  if (elems.size() == 1) return {rho[elems[0]], NodalFitKind::Copy};

  const Vec3 xn = mesh.node_coords(node);
  const double h = mesh.h();
  if (elems.size() >= 4) {
    std::array<std::array<double, 4>, 4> a{};
    std::array<double, 4> b{};
    for (Index e : elems) {
      const Vec3 d = (mesh.element_centroid(e) - xn) * (1.0 / h);
      const std::array<double, 4> row{1.0, d.x, d.y, d.z};
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) a[i][j] += row[i] * row[j];
        b[i] += row[i] * rho[e];
      }
    }
    if (solve_normal_equations(a, b)) return {b[0], NodalFitKind::LeastSquares};
  }

  double wsum = 0.0;
  double vsum = 0.0;
  for (Index e : elems) {
    const double w = 1.0 / norm(mesh.element_centroid(e) - xn);
    wsum += w;
    vsum += w * rho[e];
  }
  return {vsum / wsum, NodalFitKind::InverseDistance};
}

NodalField map_densities_to_nodes(const StructuredHexMesh& mesh, const std::vector<double>& rho) {
  if (rho.size() != mesh.element_count()) throw DomainError("density field length does not match element count");
  NodalField out(mesh.node_count());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) out[n] = std::clamp(fit_nodal_density(mesh, rho, n).value, 0.0, 1.0);
  });
  return out;
}

}  // namespace seqtopo
