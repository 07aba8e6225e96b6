#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "oracles.hpp"
#include "seqtopo/benchmark_problems.hpp"
#include "seqtopo/error.hpp"
#include "seqtopo/evaluate.hpp"
#include "seqtopo/simp.hpp"

using namespace seqtopo;

namespace {

// J(rho) by an independent dense solve.
double dense_compliance(const StructuredHexMesh& mesh, const BoundaryConditions& bc, const std::vector<double>& rho,
                        const SimpParams& p) {
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), p.nu);
  std::vector<double> e(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) e[i] = p.e_min + std::pow(rho[i], p.penal) * (p.e0 - p.e_min);
  const Eigen::VectorXd u = oracle::dense_solve_free(oracle::dense_stiffness(mesh, e, k0), bc.load, bc.fixed);
  double j = 0.0;
  for (Index i = 0; i < mesh.dof_count(); ++i) j += u(i) * bc.load[i];
  return j;
}

}  // namespace

TEST(Interpolation, Endpoints) {
  SimpParams p;
  EXPECT_DOUBLE_EQ(interpolate_modulus(1.0, p), 1.0);
  EXPECT_DOUBLE_EQ(interpolate_modulus(0.0, p), 1e-9);
  EXPECT_DOUBLE_EQ(interpolate_modulus(0.5, p), 1e-9 + 0.125 * (1 - 1e-9));
  EXPECT_THROW(interpolate_modulus(1.1, p), DomainError);
  EXPECT_THROW(interpolate_modulus(-0.1, p), DomainError);
}

TEST(SimpParamsValidation, RejectsOutOfRange) {
  auto bad = [](auto mutate) {
    SimpParams p;
    mutate(p);
    EXPECT_THROW(p.validate(), ConfigError);
  };
  bad([](SimpParams& p) { p.penal = 0.5; });
  bad([](SimpParams& p) { p.e_min = 0.0; });
  bad([](SimpParams& p) { p.e_min = 2.0; });
  bad([](SimpParams& p) { p.volfrac = 1.0; });
  bad([](SimpParams& p) { p.filter_radius = 0.0; });
  bad([](SimpParams& p) { p.move = 1.0; });
  bad([](SimpParams& p) { p.damping = 0.0; });
  bad([](SimpParams& p) { p.max_iters = 0; });
  EXPECT_NO_THROW(SimpParams{}.validate());
}

TEST(Sensitivity, ZeroDisplacementGivesZero) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  const SimpParams p;
  const auto g = compliance_sensitivity(mesh, std::vector<double>(2, 0.5), std::vector<double>(mesh.dof_count(), 0.0),
                                        element_stiffness_unit(1.0, 0.3), p);
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(Sensitivity, LinearPenaltyIsDensityIndependent) {
  oracle::Rng rng(31);
  const StructuredHexMesh mesh(3, 2, 2, 0.5);
  SimpParams p;
  p.penal = 1.0;
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), p.nu);
  const auto u = oracle::uniform_field(rng, mesh.dof_count(), -1, 1);
  const auto a = compliance_sensitivity(mesh, oracle::uniform_field(rng, mesh.element_count(), 0, 1), u, k0, p);
  const auto b = compliance_sensitivity(mesh, oracle::uniform_field(rng, mesh.element_count(), 0, 1), u, k0, p);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    EXPECT_NEAR(a[e], b[e], 1e-14 * std::abs(a[e]));
    EXPECT_NEAR(a[e], -(p.e0 - p.e_min) * element_energy(k0, gather_element(mesh, e, u)), 1e-14 * std::abs(a[e]));
  }
}

TEST(SensitivityProperty, MatchesCentralDifferences) {
  oracle::Rng rng(32);
  const StructuredHexMesh mesh(3, 2, 2, 0.5);
  const auto bc = oracle::clamped_corner_load(mesh);
  for (double penal : {1.0, 3.0}) {
    SimpParams p;
    p.penal = penal;
    const ElementMatrix k0 = element_stiffness_unit(mesh.h(), p.nu);
    for (int trial = 0; trial < 3; ++trial) {
      const auto rho = oracle::uniform_field(rng, mesh.element_count(), 0.2, 0.9);
      std::vector<double> e(rho.size());
      for (std::size_t i = 0; i < rho.size(); ++i) e[i] = interpolate_modulus(rho[i], p);
      const auto u = solve_dense(assemble(mesh, e, k0, bc.fixed, bc.load));
      const auto g = compliance_sensitivity(mesh, rho, u, k0, p);
      for (Index el = 0; el < mesh.element_count(); ++el) {
        const double d = 1e-6;
        auto rp = rho;
        auto rm = rho;
        rp[el] += d;
        rm[el] -= d;
        const double fd = (dense_compliance(mesh, bc, rp, p) - dense_compliance(mesh, bc, rm, p)) / (2 * d);
        EXPECT_LT(std::abs(g[el] - fd), 1e-4 * std::abs(fd)) << "penal " << penal << " element " << el;
      }
    }
  }
}

TEST(Filter, SelfOnlyRadiusIsIdentity) {
  oracle::Rng rng(33);
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  const auto rho = oracle::uniform_field(rng, mesh.element_count(), 0.01, 1);
  const auto g = oracle::uniform_field(rng, mesh.element_count(), -3, 0);
  const auto out = filter_sensitivities(mesh, rho, g, 0.9 * mesh.h());
  for (Index e = 0; e < g.size(); ++e) EXPECT_NEAR(out[e], g[e], 1e-14 * std::abs(g[e]));
}

TEST(Filter, UniformFieldsReproduced) {
  const StructuredHexMesh mesh(5, 3, 3, 0.2);
  const std::vector<double> rho(mesh.element_count(), 0.4);
  const std::vector<double> g(mesh.element_count(), -2.5);
  for (double v : filter_sensitivities(mesh, rho, g, 2.5 * mesh.h())) EXPECT_NEAR(v, -2.5, 1e-14);
}

TEST(FilterProperty, MatchesBruteForceOnSmallMeshes) {
  oracle::Rng rng(34);
  for (int trial = 0; trial < 12; ++trial) {
    const StructuredHexMesh mesh(1 + rng() % 7, 1 + rng() % 5, 1 + rng() % 5, oracle::uniform(rng, 0.05, 1.0));
    if (mesh.element_count() > 200) continue;
    const double radius = oracle::uniform(rng, 0.5, 3.5) * mesh.h();
    const auto rho = oracle::uniform_field(rng, mesh.element_count(), 0.0, 1.0);
    const auto g = oracle::uniform_field(rng, mesh.element_count(), -10, 0);
    const auto lib = filter_sensitivities(mesh, rho, g, radius);
    const auto ref = oracle::brute_force_filter(mesh, rho, g, radius);
    for (Index e = 0; e < ref.size(); ++e) EXPECT_NEAR(lib[e], ref[e], 1e-12 * std::abs(ref[e]) + 1e-15);
  }
}

TEST(Filter, RejectsBadInput) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  EXPECT_THROW(SensitivityFilter(mesh, 0.0), ConfigError);
  EXPECT_THROW(filter_sensitivities(mesh, std::vector<double>(1), std::vector<double>(2), 1.0), DomainError);
}

TEST(Oc, StationaryUniformDesign) {
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  SimpParams p;
  const std::vector<double> rho(mesh.element_count(), p.volfrac);
  const OcResult r = oc_update(mesh, rho, std::vector<double>(rho.size(), -1.0), p);
  for (double v : r.density) EXPECT_NEAR(v, p.volfrac, 1e-9);
  EXPECT_FALSE(r.bracket_exhausted);
}

TEST(Oc, ZeroMoveLimitFreezesDesign) {
  oracle::Rng rng(35);
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  SimpParams p;
  p.move = 0.0;
  const auto rho = oracle::uniform_field(rng, mesh.element_count(), 0.1, 0.9);
  const OcResult r = oc_update(mesh, rho, oracle::uniform_field(rng, rho.size(), -2, -0.1), p);
  EXPECT_EQ(r.density, rho);
}

TEST(Oc, TwoElementHandBisection) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  SimpParams p;
  p.volfrac = 0.5;
  p.move = 1.0;
  p.damping = 0.5;
  const OcResult r = oc_update(mesh, std::vector<double>{0.5, 0.5}, std::vector<double>{-4.0, -1.0}, p);
  EXPECT_NEAR(r.density[0], 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.density[1], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.density[0] + r.density[1], 1.0, 1e-9);
}

TEST(Oc, NonFiniteInputThrows) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  EXPECT_THROW(oc_update(mesh, std::vector<double>{0.5, 0.5}, std::vector<double>{std::nan(""), -1.0}, SimpParams{}),
               OptimizerError);
}

TEST(OcProperty, BoundsMoveLimitAndVolume) {
  oracle::Rng rng(36);
  for (int trial = 0; trial < 30; ++trial) {
    const StructuredHexMesh mesh(1 + rng() % 6, 1 + rng() % 4, 1 + rng() % 4, 0.25);
    SimpParams p;
    p.volfrac = oracle::uniform(rng, 0.2, 0.6);
    const auto rho = oracle::uniform_field(rng, mesh.element_count(), 0.0, 1.0);
    const auto g = oracle::uniform_field(rng, mesh.element_count(), -5, 0);
    const OcResult r = oc_update(mesh, rho, g, p);
    double volume = 0.0;
    for (Index e = 0; e < rho.size(); ++e) {
      ASSERT_GE(r.density[e], 0.0);
      ASSERT_LE(r.density[e], 1.0);
      ASSERT_LE(std::abs(r.density[e] - rho[e]), p.move + 1e-15);
      volume += mesh.element_volume(e) * r.density[e];
    }
    const double err = std::abs(volume / mesh.domain_volume() - p.volfrac);
    if (r.bracket_exhausted) {
      EXPECT_GT(err, 1e-6);
    } else {
      EXPECT_LE(err, 1e-6);
    }
  }
}

TEST(RunSimp, LooseToleranceStopsAfterOneIteration) {
  const BenchmarkProblem p = build_benchmark(BenchmarkId::Cantilever, {8, 4, 4});
  SimpParams sp;
  sp.filter_radius = 2 * p.mesh.h();
  sp.change_tol = 1.0;
  RunHistory h;
  const SimpResult r = run_simp(p.mesh, p.bc, sp, h);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.records()[0].stage, "simp");
}

TEST(RunSimp, CompliancePredominantlyDecreasesAndVolumeHeld) {
  const BenchmarkProblem p = build_benchmark(BenchmarkId::Cantilever, {12, 6, 6});
  SimpParams sp;
  sp.filter_radius = 2 * p.mesh.h();
  sp.change_tol = 0.01;
  RunHistory h;
  const SimpResult r = run_simp(p.mesh, p.bc, sp, h);
  ASSERT_GT(r.iterations, 5);
  int increases = 0;
  const auto& recs = h.records();
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if (recs[i].objective > recs[i - 1].objective) ++increases;
    EXPECT_EQ(recs[i].iteration, recs[i - 1].iteration + 1);
  }
  EXPECT_LE(increases, static_cast<int>(0.05 * (recs.size() - 1)) + 1);
  EXPECT_NEAR(volume_fraction(p.mesh, r.density), 0.4, 1e-6);
  for (double v : r.density) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_LT(recs.back().objective, 0.5 * recs.front().objective);
}
