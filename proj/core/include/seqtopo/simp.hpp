#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqtopo/fem.hpp"
#include "seqtopo/history.hpp"
#include "seqtopo/mesh.hpp"

namespace seqtopo {

// Per-element densities in [0, 1].
using DensityField = std::vector<double>;

struct SimpParams {
  double penal = 3.0;
  double e0 = 1.0;
  double e_min = 1e-9;
  double nu = 0.3;
  double volfrac = 0.4;
  double filter_radius = 0.1;  // absolute length; benchmarks use 2h
  double move = 0.2;
  double damping = 0.5;        // OC exponent
  double change_tol = 0.01;    // stop once max |drho| falls below this
  int max_iters = 1000;

  // Throws ConfigError when a parameter leaves its admissible range.
  void validate() const;
};

// E_min + rho^p (E0 - E_min). Throws DomainError for rho outside [0, 1].
double interpolate_modulus(double rho, const SimpParams& params);

// dJ/drho_e = -p rho_e^(p-1) (E0 - E_min) u_e^T k0 u_e.
std::vector<double> compliance_sensitivity(const StructuredHexMesh& mesh, std::span<const double> rho,
                                           std::span<const double> u, const ElementMatrix& k0,
                                           const SimpParams& params);

// Density-weighted sensitivity filter with linear hat weights
// max(0, R - |x_e - x_i|) over element centroids. Neighbour lists are built
// once by a lattice window of half-width ceil(R/h).
class SensitivityFilter {
 public:
  SensitivityFilter(const StructuredHexMesh& mesh, double radius);

  std::vector<double> apply(std::span<const double> rho, std::span<const double> sensitivities) const;

  std::size_t neighbour_count(Index e) const { return offsets_[e + 1] - offsets_[e]; }

 private:
  const StructuredHexMesh* mesh_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> neighbours_;
  std::vector<double> weights_;
  std::vector<double> weight_sums_;
};

std::vector<double> filter_sensitivities(const StructuredHexMesh& mesh, std::span<const double> rho,
                                         std::span<const double> sensitivities, double radius);

struct OcResult {
  DensityField density;
  double multiplier = 0.0;
  // Volume target not reachable within the move limits; density sits at the
  // bracket endpoint.
  bool bracket_exhausted = false;
  double volume_error = 0.0;  // (sum V_e rho_e' - V_f V_D) / V_D
};

// Optimality Criteria update with a bisection on the volume multiplier over
// [1e-10, 1e10]. Sensitivities are clamped to at most -1e-30 first. Throws
// OptimizerError on non-finite input.
OcResult oc_update(const StructuredHexMesh& mesh, std::span<const double> rho,
                   std::span<const double> filtered_sensitivities, const SimpParams& params);

struct SimpResult {
  DensityField density;
  int iterations = 0;
  bool converged = false;
  double compliance = 0.0;  // of the last solved state
};

// Solve -> sensitivity -> filter -> OC from a uniform field rho = V_f until
// max |drho| < change_tol or max_iters. One "simp" history row per iteration.
SimpResult run_simp(const StructuredHexMesh& mesh, const BoundaryConditions& bc, const SimpParams& params,
                    RunHistory& history);

}  // namespace seqtopo
