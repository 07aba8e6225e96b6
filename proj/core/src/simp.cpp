#include "seqtopo/simp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "seqtopo/error.hpp"
#include "seqtopo/parallel.hpp"

namespace seqtopo {

void SimpParams::validate() const {
  if (!(penal >= 1.0)) throw ConfigError("simp: penalization exponent must be >= 1");
  if (!(e_min > 0.0 && e_min < e0)) throw ConfigError("simp: need 0 < E_min < E0");
  if (!(volfrac > 0.0 && volfrac < 1.0)) throw ConfigError("simp: volume fraction must lie in (0, 1)");
  if (!(filter_radius > 0.0)) throw ConfigError("simp: filter radius must be positive");
  if (!(move >= 0.0 && move < 1.0)) throw ConfigError("simp: move limit must lie in [0, 1)");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("simp: OC damping must lie in (0, 1]");
  if (!(change_tol > 0.0)) throw ConfigError("simp: change tolerance must be positive");
  if (max_iters < 1) throw ConfigError("simp: max_iters must be >= 1");
}

double interpolate_modulus(double rho, const SimpParams& params) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw DomainError("interpolate_modulus: density " + std::to_string(rho) + " outside [0, 1]");
  }
  return params.e_min + std::pow(rho, params.penal) * (params.e0 - params.e_min);
}

std::vector<double> compliance_sensitivity(const StructuredHexMesh& mesh, std::span<const double> rho,
                                           std::span<const double> u, const ElementMatrix& k0,
                                           const SimpParams& params) {
  const Index ne = mesh.element_count();
  if (rho.size() != ne || u.size() != mesh.dof_count()) {
    throw DomainError("compliance_sensitivity: field sizes do not match the mesh");
  }
  std::vector<double> g(ne);
  const double de = params.e0 - params.e_min;
  parallel_for(ne, [&](std::size_t begin, std::size_t end) {
    for (Index e = begin; e < end; ++e) {
      const double energy = element_energy(k0, gather_element(mesh, e, u));
      g[e] = -params.penal * std::pow(rho[e], params.penal - 1.0) * de * energy;
    }
  });
  return g;
}

SensitivityFilter::SensitivityFilter(const StructuredHexMesh& mesh, double radius) : mesh_(&mesh) {
  if (!(radius > 0.0)) throw ConfigError("sensitivity filter: radius must be positive");
  const Index ne = mesh.element_count();
  const int w = static_cast<int>(std::ceil(radius / mesh.h()));
  offsets_.assign(ne + 1, 0);
  weight_sums_.assign(ne, 0.0);
  for (Index e = 0; e < ne; ++e) {
    const auto l = mesh.element_lattice(e);
    const Vec3 xe = mesh.element_centroid(e);
    for (int k = std::max(0, l.k - w); k <= std::min(mesh.nz() - 1, l.k + w); ++k) {
      for (int j = std::max(0, l.j - w); j <= std::min(mesh.ny() - 1, l.j + w); ++j) {
        for (int i = std::max(0, l.i - w); i <= std::min(mesh.nx() - 1, l.i + w); ++i) {
          const Index other = mesh.element_index(i, j, k);
          const double weight = radius - norm(xe - mesh.element_centroid(other));
          if (weight <= 0.0) continue;
          neighbours_.push_back(static_cast<std::uint32_t>(other));
          weights_.push_back(weight);
          weight_sums_[e] += weight;
        }
      }
    }
    offsets_[e + 1] = neighbours_.size();
  }
}

std::vector<double> SensitivityFilter::apply(std::span<const double> rho,
                                             std::span<const double> sensitivities) const {
  const Index ne = mesh_->element_count();
  if (rho.size() != ne || sensitivities.size() != ne) {
    throw DomainError("sensitivity filter: field sizes do not match the mesh");
  }
  std::vector<double> out(ne);
  parallel_for(ne, [&](std::size_t begin, std::size_t end) {
    for (Index e = begin; e < end; ++e) {
      double num = 0.0;
      for (std::size_t p = offsets_[e]; p < offsets_[e + 1]; ++p) {
        const Index i = neighbours_[p];
        num += rho[i] / mesh_->element_volume(i) * weights_[p] * sensitivities[i];
      }
      const double rho_e = std::max(rho[e], 1e-3);
      out[e] = num / (rho_e / mesh_->element_volume(e) * weight_sums_[e]);
    }
  });
  return out;
}

std::vector<double> filter_sensitivities(const StructuredHexMesh& mesh, std::span<const double> rho,
                                         std::span<const double> sensitivities, double radius) {
  return SensitivityFilter(mesh, radius).apply(rho, sensitivities);
}

OcResult oc_update(const StructuredHexMesh& mesh, std::span<const double> rho,
                   std::span<const double> filtered_sensitivities, const SimpParams& params) {
  const Index ne = mesh.element_count();
  if (rho.size() != ne || filtered_sensitivities.size() != ne) {
    throw DomainError("oc_update: field sizes do not match the mesh");
  }
  std::vector<double> g(ne);
  for (Index e = 0; e < ne; ++e) {
    if (!std::isfinite(filtered_sensitivities[e]) || !std::isfinite(rho[e])) {
      throw OptimizerError("oc_update: non-finite density or sensitivity at element " + std::to_string(e));
    }
    g[e] = std::min(filtered_sensitivities[e], -1e-30);
  }

  const double target = params.volfrac * mesh.domain_volume();
  OcResult result;
  result.density.resize(ne);
  auto update = [&](double mu) {
    double volume = 0.0;
    for (Index e = 0; e < ne; ++e) {
      const double ve = mesh.element_volume(e);
      const double b = -g[e] / (mu * ve);
      const double lo = std::max(0.0, rho[e] - params.move);
      const double hi = std::min(1.0, rho[e] + params.move);
      const double next = std::clamp(rho[e] * std::pow(b, params.damping), lo, hi);
      result.density[e] = next;
      volume += ve * next;
    }
    return volume;
  };

  const double mu_lo = 1e-10;
  const double mu_hi = 1e10;
  double l1 = mu_lo;
  double l2 = mu_hi;
  double volume = 0.0;
  while ((l2 - l1) / (l1 + l2) > 1e-10) {
    const double mid = 0.5 * (l1 + l2);
    volume = update(mid);
    result.multiplier = mid;
    if (volume > target) {
      l1 = mid;
    } else {
      l2 = mid;
    }
  }
  if (!std::isfinite(volume)) throw OptimizerError("oc_update: bisection produced a non-finite volume");
  result.volume_error = (volume - target) / mesh.domain_volume();
  result.bracket_exhausted = std::abs(result.volume_error) > 1e-6;
  return result;
}

SimpResult run_simp(const StructuredHexMesh& mesh, const BoundaryConditions& bc, const SimpParams& params,
                    RunHistory& history) {
  params.validate();
  using Clock = std::chrono::steady_clock;
  const Index ne = mesh.element_count();
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), params.nu);
  const StiffnessAssembler assembler(mesh);
  const SensitivityFilter filter(mesh, params.filter_radius);

  SimpResult result;
  result.density.assign(ne, params.volfrac);
  std::vector<double> scalars(ne);
  std::vector<double> u;

  for (int it = 1; it <= params.max_iters; ++it) {
    const auto start = Clock::now();
    for (Index e = 0; e < ne; ++e) scalars[e] = interpolate_modulus(result.density[e], params);
    const LinearSystem sys = assembler.assemble(scalars, k0, bc.fixed, bc.load);
    u = solve(sys, {}, u);
    const double j = compliance(u, sys.F);

    const auto raw = compliance_sensitivity(mesh, result.density, u, k0, params);
    const auto filtered = filter.apply(result.density, raw);
    OcResult oc = oc_update(mesh, result.density, filtered, params);

    double change = 0.0;
    double volume = 0.0;
    for (Index e = 0; e < ne; ++e) {
      change = std::max(change, std::abs(oc.density[e] - result.density[e]));
      volume += mesh.element_volume(e) * oc.density[e];
    }
    result.density = std::move(oc.density);
    result.iterations = it;
    result.compliance = j;

    HistoryRecord rec;
    rec.stage = "simp";
    rec.iteration = it;
    rec.objective = j;
    rec.volume_fraction = volume / mesh.domain_volume();
    rec.constraint = rec.volume_fraction - params.volfrac;
    rec.change = change;
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (oc.bracket_exhausted) rec.note = "oc-bracket-exhausted";
    history.append(std::move(rec));

    if (change < params.change_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace seqtopo
