#include "seqtopo/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "seqtopo/error.hpp"
#include "seqtopo/parallel.hpp"

namespace seqtopo {

std::vector<double> solid_fractions(const StructuredHexMesh& mesh, std::span<const double> nodal,
                                    SolidConvention convention, int k) {
  if (k < 2) throw ConfigError("solid fractions need at least 2 samples per axis");
  if (nodal.size() != mesh.node_count()) throw DomainError("nodal field length does not match node count");
  const auto is_solid = [convention](double v) {
    return convention == SolidConvention::DensityAtLeastHalf ? v >= 0.5 : v <= 0.0;
  };
  std::vector<double> offsets(k);
  for (int i = 0; i < k; ++i) offsets[i] = (i + 0.5) / k;
  const double total = static_cast<double>(k) * k * k;

  std::vector<double> out(mesh.element_count());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (Index e = begin; e < end; ++e) {
      const auto nodes = mesh.element_nodes(e);
      double v[8];
      for (int a = 0; a < 8; ++a) v[a] = nodal[nodes[a]];
      int count = 0;
      for (double z : offsets) {
        for (double y : offsets) {
          for (double x : offsets) {
            // Corner order 0..7 as kHexCorners.
            const double c00 = v[0] * (1 - x) + v[1] * x;
            const double c10 = v[3] * (1 - x) + v[2] * x;
            const double c01 = v[4] * (1 - x) + v[5] * x;
            const double c11 = v[7] * (1 - x) + v[6] * x;
            const double c0 = c00 * (1 - y) + c10 * y;
            const double c1 = c01 * (1 - y) + c11 * y;
            if (is_solid(c0 * (1 - z) + c1 * z)) ++count;
          }
        }
      }
      out[e] = count / total;
    }
  });
  return out;
}

double volume_fraction(const StructuredHexMesh& mesh, std::span<const double> fractions) {
  if (fractions.size() != mesh.element_count()) throw DomainError("fraction field length does not match elements");
  double v = 0.0;
  for (Index e = 0; e < fractions.size(); ++e) v += mesh.element_volume(e) * fractions[e];
  return v / mesh.domain_volume();
}

EvaluatedDesign evaluate_compliance(const StructuredHexMesh& mesh, std::span<const double> fractions,
                                    const BoundaryConditions& bc, double eps0, double e0, double nu) {
  if (fractions.size() != mesh.element_count()) throw DomainError("fraction field length does not match elements");
  if (!(eps0 > 0.0 && eps0 <= 1.0)) throw ConfigError("eps0 must lie in (0, 1]");
  std::vector<double> scalars(fractions.size());
  for (Index e = 0; e < fractions.size(); ++e) {
    const double f = fractions[e];
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("solid fraction outside [0, 1]");
    scalars[e] = e0 * std::max(f, eps0);
  }
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), nu);
  const LinearSystem system = assemble(mesh, scalars, k0, bc.fixed, bc.load);
  const std::vector<double> u = solve(system);

  EvaluatedDesign d;
  d.compliance = compliance(u, system.F);
  d.fractions.assign(fractions.begin(), fractions.end());
  d.volume_fraction = volume_fraction(mesh, fractions);
  return d;
}

}  // namespace seqtopo
