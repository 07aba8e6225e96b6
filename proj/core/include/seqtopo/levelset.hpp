#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqtopo/fem.hpp"
#include "seqtopo/hilbertian.hpp"
#include "seqtopo/history.hpp"
#include "seqtopo/mesh.hpp"

namespace seqtopo {

using LevelSetField = std::vector<double>;  // phi < 0 solid, phi > 0 void

struct ErsatzParams {
  double eps0 = 1e-3;  // void stiffness ratio
  double eta = 0.1;    // Heaviside half-bandwidth, length units

  void validate() const;
};

struct AugmentedLagrangian {
  double lambda = 0.0;
  double penalty = 10.0;
  double growth = 1.1;
  double penalty_max = 100.0;
  int period = 5;

  void validate() const;
  friend bool operator==(const AugmentedLagrangian&, const AugmentedLagrangian&) = default;
};

struct HilbertianProjection {
  double alpha_min2 = 0.1;
  double beta = 0.5;
  double tau = 0.01;

  void validate() const;
  friend bool operator==(const HilbertianProjection&, const HilbertianProjection&) = default;
};

using ConstraintHandler = std::variant<AugmentedLagrangian, HilbertianProjection>;

struct EvolutionParams {
  double gamma = 0.1;
  double gamma_min = 1e-3;
  int n_steps = 10;
  double reinit_tol = 1e-3;  // fraction of h
  int reinit_max_steps = 200;
  double j_tol = 0.01;       // relative objective change
  int window = 5;
  double c_tol = 0.01;
  int max_iters = 300;

  void validate() const;
};

struct LevelSetParams {
  double e0 = 1.0;
  double nu = 0.3;
  double volfrac = 0.4;
  double reg_length = 0.1;  // Hilbertian regularization length
  ErsatzParams ersatz;
  EvolutionParams evolution;

  void validate() const;
};

double heaviside(double phi, double eta);
double heaviside_deriv(double phi, double eta);

// Trilinear centroid value: mean of the element's 8 nodal values.
std::vector<double> element_phi(const StructuredHexMesh& mesh, std::span<const double> phi);

// Trilinear gradient at the element centroid.
Vec3 element_gradient(const StructuredHexMesh& mesh, std::span<const double> phi, Index e);

// (1 - H(phi_e)) + eps0 H(phi_e) per element.
std::vector<double> ersatz_scalars(const StructuredHexMesh& mesh, std::span<const double> phi,
                                   const ErsatzParams& params);

struct LevelSetMeasures {
  double objective = 0.0;  // J
  double volume = 0.0;     // V
  double constraint = 0.0; // C = (V - V_f V_D) / V_D
};

// k0 already carries the solid modulus.
LevelSetMeasures ls_objective_and_volume(const StructuredHexMesh& mesh, std::span<const double> phi,
                                         std::span<const double> u, const ElementMatrix& k0,
                                         const ErsatzParams& params, double volfrac);

struct ShapeSensitivities {
  std::vector<double> objective;   // g_J
  std::vector<double> constraint;  // g_C
};

ShapeSensitivities shape_sensitivities(const StructuredHexMesh& mesh, std::span<const double> phi,
                                       std::span<const double> u, const ElementMatrix& k0,
                                       const ErsatzParams& params);

// Integrand w_e + (lambda - Lambda C) / V_D, lumped the same way.
std::vector<double> lagrangian_sensitivity(const ShapeSensitivities& s, const AugmentedLagrangian& al,
                                           double constraint);

// lambda <- lambda - Lambda C; Lambda grows when iteration % period == 0.
AugmentedLagrangian al_update(AugmentedLagrangian al, double constraint, int iteration);

struct ProjectedVelocity {
  std::vector<double> velocity;
  double alpha = 0.0;
};

ProjectedVelocity project_velocity(const HilbertianOperator& op, std::span<const double> g,
                                   std::span<const double> mu, double constraint, const HilbertianProjection& hp);

// Upwind (Godunov) gradient magnitude per node for the given speed signs.
std::vector<double> godunov_gradient_norm(const StructuredHexMesh& mesh, std::span<const double> phi,
                                          std::span<const double> speed);

// Central-difference gradient magnitude per node (one-sided on the boundary).
std::vector<double> central_gradient_norm(const StructuredHexMesh& mesh, std::span<const double> phi);

LevelSetField hj_evolve(const StructuredHexMesh& mesh, std::span<const double> phi, std::span<const double> velocity,
                        double gamma, int n_steps);

struct ReinitResult {
  LevelSetField phi;
  int steps = 0;
  bool converged = false;
  double last_change = 0.0;
};

ReinitResult reinitialize(const StructuredHexMesh& mesh, std::span<const double> phi, double tol = 1e-3,
                          int max_steps = 200);

// -(1/4) prod cos(freq pi (x_i - origin_i)) - offset/4, then reinitialized.
// Throws ConfigError unless 0 <= offset < 1 and freq > 0.
LevelSetField porous_initialization(const StructuredHexMesh& mesh, double freq = 4.0, double offset = 0.2);

struct LevelSetResult {
  LevelSetField phi;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double volume_fraction = 0.0;
  double initial_volume_fraction = 0.0;
  ConstraintHandler handler;
};

// Outer loop. on_iteration, when set, sees each post-reinitialization field.
LevelSetResult run_levelset(const StructuredHexMesh& mesh, std::span<const double> phi0,
                            const BoundaryConditions& bc, ConstraintHandler handler, const LevelSetParams& params,
                            RunHistory& history, const std::string& stage = "levelset",
                            const std::function<void(int, const LevelSetField&)>& on_iteration = {});

}  // namespace seqtopo
