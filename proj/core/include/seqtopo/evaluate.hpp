#pragma once

#include <span>
#include <vector>

#include "seqtopo/fem.hpp"
#include "seqtopo/mesh.hpp"

namespace seqtopo {

enum class SolidConvention {
  DensityAtLeastHalf,  // value >= 0.5 is solid
  PhiNonPositive,      // value <= 0 is solid
};

// Fraction of k^3 sub-cell samples (offsets (i + 0.5)/k) that are solid under
// trilinear interpolation of the nodal field. Throws ConfigError for k < 2.
std::vector<double> solid_fractions(const StructuredHexMesh& mesh, std::span<const double> nodal,
                                    SolidConvention convention, int k = 4);

struct EvaluatedDesign {
  double compliance = 0.0;
  double volume_fraction = 0.0;
  std::vector<double> fractions;
};

double volume_fraction(const StructuredHexMesh& mesh, std::span<const double> fractions);

// Multipliers max(f_e, eps0), no penalization; J = U^T F.
EvaluatedDesign evaluate_compliance(const StructuredHexMesh& mesh, std::span<const double> fractions,
                                    const BoundaryConditions& bc, double eps0 = 1e-3, double e0 = 1.0,
                                    double nu = 0.3);

}  // namespace seqtopo
