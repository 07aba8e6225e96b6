#include "seqtopo/levelset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numbers>

#include "seqtopo/error.hpp"
#include "seqtopo/parallel.hpp"

namespace seqtopo {

void ErsatzParams::validate() const {
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw ConfigError("ersatz eps0 must lie in (0, 1)");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("Heaviside half-bandwidth must be > 0");
}

void AugmentedLagrangian::validate() const {
  if (!(penalty > 0.0 && penalty <= penalty_max)) throw ConfigError("AL penalty must lie in (0, penalty_max]");
  if (!(growth > 1.0)) throw ConfigError("AL growth factor must be > 1");
  if (period < 1) throw ConfigError("AL update period must be >= 1");
  if (!std::isfinite(lambda)) throw ConfigError("AL multiplier must be finite");
}

void HilbertianProjection::validate() const {
  if (!(alpha_min2 > 0.0 && alpha_min2 <= 1.0)) throw ConfigError("HP alpha_min^2 must lie in (0, 1]");
  if (!(tau > 0.0)) throw ConfigError("HP decay tolerance must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("HP beta must be > 0");
}

void EvolutionParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("CFL number must lie in (0, 1)");
  if (!(gamma_min > 0.0 && gamma_min <= gamma)) throw ConfigError("gamma_min must lie in (0, gamma]");
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (!(reinit_tol > 0.0) || reinit_max_steps < 1) throw ConfigError("invalid reinitialization settings");
  if (!(j_tol > 0.0) || window < 1 || !(c_tol > 0.0) || max_iters < 1) {
    throw ConfigError("invalid level-set stopping settings");
  }
}

void LevelSetParams::validate() const {
  if (!(e0 > 0.0) || !std::isfinite(e0)) throw ConfigError("E0 must be > 0");
  if (!(nu >= 0.0 && nu < 0.5)) throw ConfigError("Poisson ratio must lie in [0, 0.5)");
  if (!(volfrac > 0.0 && volfrac <= 1.0)) throw ConfigError("volume fraction must lie in (0, 1]");
  if (!(reg_length >= 0.0) || !std::isfinite(reg_length)) throw ConfigError("regularization length must be >= 0");
  ersatz.validate();
  evolution.validate();
}

double heaviside(double phi, double eta) {
  if (phi <= -eta) return 0.0;
  if (phi >= eta) return 1.0;
  const double pi = std::numbers::pi;
  return 0.5 + phi / (2.0 * eta) + std::sin(pi * phi / eta) / (2.0 * pi);
}

double heaviside_deriv(double phi, double eta) {
  if (std::abs(phi) > eta) return 0.0;
  return (1.0 + std::cos(std::numbers::pi * phi / eta)) / (2.0 * eta);
}

std::vector<double> element_phi(const StructuredHexMesh& mesh, std::span<const double> phi) {
  if (phi.size() != mesh.node_count()) throw DomainError("level-set field length does not match node count");
  std::vector<double> out(mesh.element_count());
  for (Index e = 0; e < out.size(); ++e) {
    double s = 0.0;
    for (Index n : mesh.element_nodes(e)) s += phi[n];
    out[e] = s / 8.0;
  }
  return out;
}

Vec3 element_gradient(const StructuredHexMesh& mesh, std::span<const double> phi, Index e) {
  const auto nodes = mesh.element_nodes(e);
  Vec3 g;
  for (int a = 0; a < 8; ++a) {
    const auto& c = kHexCorners[a];
    g.x += (c.i ? 1.0 : -1.0) * phi[nodes[a]];
    g.y += (c.j ? 1.0 : -1.0) * phi[nodes[a]];
    g.z += (c.k ? 1.0 : -1.0) * phi[nodes[a]];
  }
  return g * (1.0 / (4.0 * mesh.h()));
}

std::vector<double> ersatz_scalars(const StructuredHexMesh& mesh, std::span<const double> phi,
                                   const ErsatzParams& params) {
  std::vector<double> s = element_phi(mesh, phi);
  for (double& v : s) {
    const double hv = heaviside(v, params.eta);
    v = (1.0 - hv) + params.eps0 * hv;
  }
  return s;
}

LevelSetMeasures ls_objective_and_volume(const StructuredHexMesh& mesh, std::span<const double> phi,
                                         std::span<const double> u, const ElementMatrix& k0,
                                         const ErsatzParams& params, double volfrac) {
  if (u.size() != mesh.dof_count()) throw DomainError("displacement length does not match DOF count");
  const std::vector<double> pe = element_phi(mesh, phi);
  LevelSetMeasures m;
  for (Index e = 0; e < pe.size(); ++e) {
    const double hv = heaviside(pe[e], params.eta);
    const double scale = (1.0 - hv) + params.eps0 * hv;
    m.objective += scale * element_energy(k0, gather_element(mesh, e, u));
    m.volume += mesh.element_volume(e) * (1.0 - hv);
  }
  const double vd = mesh.domain_volume();
  m.constraint = (m.volume - volfrac * vd) / vd;
  return m;
}

ShapeSensitivities shape_sensitivities(const StructuredHexMesh& mesh, std::span<const double> phi,
                                       std::span<const double> u, const ElementMatrix& k0,
                                       const ErsatzParams& params) {
  if (u.size() != mesh.dof_count()) throw DomainError("displacement length does not match DOF count");
  const std::vector<double> pe = element_phi(mesh, phi);
  const double vd = mesh.domain_volume();
  ShapeSensitivities s{std::vector<double>(mesh.node_count(), 0.0), std::vector<double>(mesh.node_count(), 0.0)};
  for (Index e = 0; e < pe.size(); ++e) {
    const double dh = heaviside_deriv(pe[e], params.eta);
    if (dh == 0.0) continue;
    const double ve = mesh.element_volume(e);
    const double lump = dh * norm(element_gradient(mesh, phi, e)) * ve / 8.0;
    const double w = element_energy(k0, gather_element(mesh, e, u)) / ve;
    for (Index n : mesh.element_nodes(e)) {
      s.objective[n] += w * lump;
      s.constraint[n] += -lump / vd;
    }
  }
  return s;
}

std::vector<double> lagrangian_sensitivity(const ShapeSensitivities& s, const AugmentedLagrangian& al,
                                           double constraint) {
  const double coeff = al.lambda - al.penalty * constraint;
  std::vector<double> g(s.objective.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = s.objective[i] - coeff * s.constraint[i];
  return g;
}

AugmentedLagrangian al_update(AugmentedLagrangian al, double constraint, int iteration) {
  al.lambda -= al.penalty * constraint;
  if (al.period > 0 && iteration % al.period == 0) al.penalty = std::min(al.growth * al.penalty, al.penalty_max);
  return al;
}

ProjectedVelocity project_velocity(const HilbertianOperator& op, std::span<const double> g,
                                   std::span<const double> mu, double constraint, const HilbertianProjection& hp) {
  if (g.size() != op.size() || mu.size() != op.size()) throw DomainError("velocity inputs do not match node count");
  const double mu_norm2 = op.inner(mu, mu);
  if (!(mu_norm2 > 0.0)) throw HandlerError("Hilbertian projection: constraint direction has zero norm");
  const double mu_norm = std::sqrt(mu_norm2);

  const double coeff = op.inner(mu, g) / mu_norm2;
  std::vector<double> pg(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pg[i] = g[i] - coeff * mu[i];
  const double pg_norm = op.norm(pg);

  double alpha = hp.beta * constraint / mu_norm;
  const double decay = std::min(1.0, std::abs(constraint) / hp.tau);
  const double alpha_min = std::sqrt(hp.alpha_min2) * decay;
  const double mag = std::clamp(std::abs(alpha), alpha_min, 1.0);
  alpha = alpha < 0.0 ? -mag : (alpha > 0.0 ? mag : 0.0);

  ProjectedVelocity out;
  out.alpha = alpha;
  out.velocity.assign(g.size(), 0.0);
  if (pg_norm >= 1e-14) {
    const double a = std::sqrt(std::max(0.0, 1.0 - alpha * alpha)) / pg_norm;
    for (std::size_t i = 0; i < g.size(); ++i) out.velocity[i] += a * pg[i];
  }
  for (std::size_t i = 0; i < g.size(); ++i) out.velocity[i] += alpha / mu_norm * mu[i];
  return out;
}

namespace {

// One-sided differences along an axis; a missing side copies the other.
struct AxisDiff {
  double minus;
  double plus;
};

AxisDiff axis_diff(std::span<const double> phi, Index n, int pos, int count, Index stride, double h) {
  const bool has_minus = pos > 0;
  const bool has_plus = pos < count;
  double dm = has_minus ? (phi[n] - phi[n - stride]) / h : 0.0;
  double dp = has_plus ? (phi[n + stride] - phi[n]) / h : 0.0;
  if (!has_minus) dm = dp;
  if (!has_plus) dp = dm;
  return {dm, dp};
}

template <typename F>
void for_each_node_axis(const StructuredHexMesh& mesh, Index n, F&& f) {
  const LatticeIndex l = mesh.node_lattice(n);
  const Index sx = 1;
  const Index sy = static_cast<Index>(mesh.nx() + 1);
  const Index sz = sy * static_cast<Index>(mesh.ny() + 1);
  f(l.i, mesh.nx(), sx);
  f(l.j, mesh.ny(), sy);
  f(l.k, mesh.nz(), sz);
}

}  // namespace

std::vector<double> godunov_gradient_norm(const StructuredHexMesh& mesh, std::span<const double> phi,
                                          std::span<const double> speed) {
  if (phi.size() != mesh.node_count() || speed.size() != mesh.node_count()) {
    throw DomainError("field length does not match node count");
  }
  const double h = mesh.h();
  std::vector<double> out(phi.size());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (Index n = begin; n < end; ++n) {
      const bool positive = speed[n] >= 0.0;
      double g2 = 0.0;
      for_each_node_axis(mesh, n, [&](int pos, int count, Index stride) {
        const AxisDiff d = axis_diff(phi, n, pos, count, stride, h);
        if (positive) {
          const double a = std::max(d.minus, 0.0);
          const double b = std::min(d.plus, 0.0);
          g2 += a * a + b * b;
        } else {
          const double a = std::min(d.minus, 0.0);
          const double b = std::max(d.plus, 0.0);
          g2 += a * a + b * b;
        }
      });
      out[n] = std::sqrt(g2);
    }
  });
  return out;
}

std::vector<double> central_gradient_norm(const StructuredHexMesh& mesh, std::span<const double> phi) {
  if (phi.size() != mesh.node_count()) throw DomainError("field length does not match node count");
  const double h = mesh.h();
  std::vector<double> out(phi.size());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (Index n = begin; n < end; ++n) {
      double g2 = 0.0;
      for_each_node_axis(mesh, n, [&](int pos, int count, Index stride) {
        const AxisDiff d = axis_diff(phi, n, pos, count, stride, h);
        const double c = 0.5 * (d.minus + d.plus);
        g2 += c * c;
      });
      out[n] = std::sqrt(g2);
    }
  });
  return out;
}

LevelSetField hj_evolve(const StructuredHexMesh& mesh, std::span<const double> phi, std::span<const double> velocity,
                        double gamma, int n_steps) {
  if (phi.size() != mesh.node_count() || velocity.size() != mesh.node_count()) {
    throw DomainError("field length does not match node count");
  }
  LevelSetField cur(phi.begin(), phi.end());
  double vmax = 0.0;
  for (double v : velocity) {
    if (!std::isfinite(v)) throw DomainError("velocity contains non-finite values");
    vmax = std::max(vmax, std::abs(v));
  }
  if (vmax == 0.0) return cur;
  const double dt = gamma * mesh.h() / vmax;
  for (int step = 0; step < n_steps; ++step) {
    const std::vector<double> grad = godunov_gradient_norm(mesh, cur, velocity);
    for (Index n = 0; n < cur.size(); ++n) cur[n] -= dt * velocity[n] * grad[n];
  }
  return cur;
}

ReinitResult reinitialize(const StructuredHexMesh& mesh, std::span<const double> phi, double tol, int max_steps) {
  if (phi.size() != mesh.node_count()) throw DomainError("field length does not match node count");
  for (double v : phi) {
    if (!std::isfinite(v)) throw DomainError("level-set field contains non-finite values");
  }
  const double h = mesh.h();
  const double dtau = 0.5 * h;
  ReinitResult r;
  r.phi.assign(phi.begin(), phi.end());
  std::vector<double> sign(phi.size());
  for (int step = 1; step <= max_steps; ++step) {
    const std::vector<double> central = central_gradient_norm(mesh, r.phi);
    for (Index n = 0; n < sign.size(); ++n) {
      const double p = r.phi[n];
      const double denom = std::sqrt(p * p + h * h * central[n] * central[n]);
      sign[n] = denom > 0.0 ? p / denom : 0.0;
    }
    const std::vector<double> grad = godunov_gradient_norm(mesh, r.phi, sign);
    double change = 0.0;
    for (Index n = 0; n < sign.size(); ++n) {
      const double d = -dtau * sign[n] * (grad[n] - 1.0);
      r.phi[n] += d;
      change = std::max(change, std::abs(d));
    }
    r.steps = step;
    r.last_change = change;
    if (change < tol * h) {
      r.converged = true;
      break;
    }
  }
  return r;
}

LevelSetField porous_initialization(const StructuredHexMesh& mesh, double freq, double offset) {
  if (!(freq > 0.0) || !std::isfinite(freq)) throw ConfigError("porous frequency must be > 0");
  if (!(offset >= 0.0 && offset < 1.0)) throw ConfigError("porous offset must lie in [0, 1)");
  const double pi = std::numbers::pi;
  const Vec3 o = mesh.origin();
  LevelSetField phi(mesh.node_count());
  for (Index n = 0; n < phi.size(); ++n) {
    const Vec3 x = mesh.node_coords(n) - o;
    phi[n] = -0.25 * std::cos(freq * pi * x.x) * std::cos(freq * pi * x.y) * std::cos(freq * pi * x.z) -
             0.25 * offset;
  }
  return reinitialize(mesh, phi).phi;
}

LevelSetResult run_levelset(const StructuredHexMesh& mesh, std::span<const double> phi0,
                            const BoundaryConditions& bc, ConstraintHandler handler, const LevelSetParams& params,
                            RunHistory& history, const std::string& stage,
                            const std::function<void(int, const LevelSetField&)>& on_iteration) {
  params.validate();
  std::visit([](const auto& hd) { hd.validate(); }, handler);
  if (phi0.size() != mesh.node_count()) throw DomainError("initial level set length does not match node count");
  for (double v : phi0) {
    if (!std::isfinite(v)) throw DomainError("initial level set contains non-finite values");
  }

  const EvolutionParams& evo = params.evolution;
  ElementMatrix k0 = element_stiffness_unit(mesh.h(), params.nu);
  for (double& v : k0) v *= params.e0;
  const StiffnessAssembler assembler(mesh);
  const HilbertianOperator op(mesh, params.reg_length, bc.load_nodes);
  const double vd = mesh.domain_volume();

  LevelSetResult result;
  LevelSetField phi(phi0.begin(), phi0.end());
  std::vector<double> u;
  double gamma = evo.gamma;
  double prev_objective = 0.0;
  double prev_constraint = 0.0;
  int increases = 0;
  std::deque<double> changes;

  for (int it = 1; it <= evo.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    HistoryRecord rec;
    rec.stage = stage;
    rec.iteration = it;

    ReinitResult ri = reinitialize(mesh, phi, evo.reinit_tol, evo.reinit_max_steps);
    phi = std::move(ri.phi);
    if (!ri.converged) rec.note = "reinit-step-cap";
    if (on_iteration) on_iteration(it, phi);

    const std::vector<double> scalars = ersatz_scalars(mesh, phi, params.ersatz);
    const LinearSystem system = assembler.assemble(scalars, k0, bc.fixed, bc.load);
    u = solve(system, {}, u);
    const LevelSetMeasures m = ls_objective_and_volume(mesh, phi, u, k0, params.ersatz, params.volfrac);
    if (it == 1) result.initial_volume_fraction = m.volume / vd;
    result.objective = m.objective;
    result.volume_fraction = m.volume / vd;
    result.iterations = it;

    // Objective trace: J for HP, the augmented Lagrangian for AL. Both the
    // current and previous values use the current multipliers so that a
    // multiplier update alone never counts as an increase.
    auto trace = [&](double j, double c) {
      if (const auto* al = std::get_if<AugmentedLagrangian>(&handler)) {
        return j - al->lambda * c + 0.5 * al->penalty * c * c;
      }
      return j;
    };
    if (const auto* al = std::get_if<AugmentedLagrangian>(&handler)) {
      rec.lambda = al->lambda;
      rec.penalty = al->penalty;
    }

    if (it > 1) {
      changes.push_back(std::abs(m.objective - prev_objective) / std::max(std::abs(prev_objective), 1e-300));
      if (static_cast<int>(changes.size()) > evo.window) changes.pop_front();
      increases = trace(m.objective, m.constraint) > trace(prev_objective, prev_constraint) ? increases + 1 : 0;
      if (increases >= 2) {
        gamma = std::max(0.75 * gamma, evo.gamma_min);
        increases = 0;
      }
    }
    prev_objective = m.objective;
    prev_constraint = m.constraint;

    const bool converged = static_cast<int>(changes.size()) == evo.window &&
                           std::all_of(changes.begin(), changes.end(), [&](double c) { return c < evo.j_tol; }) &&
                           std::abs(m.constraint) < evo.c_tol;

    rec.objective = m.objective;
    rec.volume_fraction = m.volume / vd;
    rec.constraint = m.constraint;
    rec.gamma = gamma;

    if (!converged && it < evo.max_iters) {
      const ShapeSensitivities sens = shape_sensitivities(mesh, phi, u, k0, params.ersatz);
      std::vector<double> velocity;
      if (auto* al = std::get_if<AugmentedLagrangian>(&handler)) {
        velocity = op.extend(lagrangian_sensitivity(sens, *al, m.constraint));
        *al = al_update(*al, m.constraint, it);
      } else {
        const auto& hp = std::get<HilbertianProjection>(handler);
        const ProjectedVelocity pv =
            project_velocity(op, op.extend(sens.objective), op.extend(sens.constraint), m.constraint, hp);
        velocity = pv.velocity;
        rec.alpha = pv.alpha;
      }
      LevelSetField next = hj_evolve(mesh, phi, velocity, gamma, evo.n_steps);
      double change = 0.0;
      for (Index n = 0; n < next.size(); ++n) change = std::max(change, std::abs(next[n] - phi[n]));
      rec.change = change;
      phi = std::move(next);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.append(std::move(rec));
    if (converged) {
      result.converged = true;
      break;
    }
  }
  result.phi = std::move(phi);
  result.handler = handler;
  return result;
}

}  // namespace seqtopo
