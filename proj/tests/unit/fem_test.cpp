#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "oracles.hpp"
#include "seqtopo/error.hpp"
#include "seqtopo/fem.hpp"

using namespace seqtopo;

namespace {

double max_abs(const ElementMatrix& k) {
  double m = 0.0;
  for (double v : k) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(ElementStiffness, SymmetricWithSixRigidModes) {
  for (double nu : {0.0, 0.3, 0.45}) {
    const ElementMatrix k = element_stiffness_unit(0.05, nu);
    const double kmax = max_abs(k);
    for (int r = 0; r < 24; ++r) {
      for (int c = 0; c < 24; ++c) EXPECT_NEAR(k[24 * r + c], k[24 * c + r], 1e-12 * kmax);
    }
    Eigen::Matrix<double, 24, 24> m = Eigen::Map<const Eigen::Matrix<double, 24, 24, Eigen::RowMajor>>(k.data());
    const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 24, 24>>(m).eigenvalues();
    int zero = 0;
    for (int i = 0; i < 24; ++i) {
      EXPECT_GT(ev(i), -1e-10 * ev(23));
      if (std::abs(ev(i)) <= 1e-10 * ev(23)) ++zero;
    }
    EXPECT_EQ(zero, 6) << "nu = " << nu;
  }
}

TEST(ElementStiffness, RigidModesInNullSpace) {
  const double h = 0.5;
  const ElementMatrix k = element_stiffness_unit(h, 0.3);
  for (const auto& mode : oracle::rigid_body_modes(h)) {
    for (int r = 0; r < 24; ++r) {
      double s = 0.0;
      for (int c = 0; c < 24; ++c) s += k[24 * r + c] * mode[c];
      EXPECT_NEAR(s, 0.0, 1e-10 * max_abs(k));
    }
  }
}

TEST(ElementStiffness, ScalesLinearlyWithEdge) {
  const ElementMatrix a = element_stiffness_unit(1.0, 0.3);
  const ElementMatrix b = element_stiffness_unit(2.0, 0.3);
  for (int i = 0; i < 576; ++i) EXPECT_NEAR(b[i], 2.0 * a[i], 1e-12);
}

TEST(ElementStiffness, UniaxialStretchEnergy) {
  // u_x = eps x with free lateral faces is not a pure mode of one element;
  // with nu = 0 the stiffness is uncoupled and the energy is E eps^2 h^3.
  const double h = 1.0;
  const double eps = 1e-3;
  const ElementMatrix k = element_stiffness_unit(h, 0.0);
  ElementVector u{};
  for (int a = 0; a < 8; ++a) u[3 * a] = eps * h * kHexCorners[a].i;
  EXPECT_NEAR(element_energy(k, u), eps * eps * h * h * h, 1e-15);
}

TEST(ElementStiffness, RejectsBadMaterial) {
  EXPECT_THROW(element_stiffness_unit(0.1, 0.5), MaterialError);
  EXPECT_THROW(element_stiffness_unit(0.1, -0.1), MaterialError);
  EXPECT_THROW(element_stiffness_unit(0.0, 0.3), MaterialError);
}

TEST(Assembly, MatchesDenseOracle) {
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  const auto bc = oracle::clamped_corner_load(mesh);
  const std::vector<double> ones(mesh.element_count(), 1.0);
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), 0.3);
  const LinearSystem sys = assemble(mesh, ones, k0, bc.fixed, bc.load);
  const Eigen::MatrixXd kd = oracle::dense_stiffness(mesh, ones, k0);
  const double kmax = kd.cwiseAbs().maxCoeff();
  for (Index r = 0; r < mesh.dof_count(); ++r) {
    for (Index c = 0; c < mesh.dof_count(); ++c) {
      double expected = kd(r, c);
      if (bc.fixed[r] || bc.fixed[c]) expected = r == c ? kd(r, c) : 0.0;
      ASSERT_NEAR(sys.K.at(r, c), expected, 1e-12 * kmax) << r << "," << c;
    }
    if (bc.fixed[r]) {
      EXPECT_EQ(sys.F[r], 0.0);
    }
  }
}

TEST(Assembly, SingleElementIsScatteredK0) {
  const StructuredHexMesh mesh(1, 1, 1, 1.0);
  const ElementMatrix k0 = element_stiffness_unit(1.0, 0.3);
  std::vector<std::uint8_t> fixed(24, 0);
  fixed[0] = 1;
  const LinearSystem sys = assemble(mesh, std::vector<double>{1.0}, k0, fixed, std::vector<double>(24, 1.0));
  const auto nodes = mesh.element_nodes(0);
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      for (int c = 0; c < 3; ++c) {
        for (int d = 0; d < 3; ++d) {
          const Index r = 3 * nodes[a] + c;
          const Index s = 3 * nodes[b] + d;
          double expected = k0[24 * (3 * a + c) + 3 * b + d];
          if ((r == 0 || s == 0) && r != s) expected = 0.0;
          EXPECT_DOUBLE_EQ(sys.K.at(r, s), expected);
        }
      }
    }
  }
  EXPECT_EQ(sys.F[0], 0.0);
}

TEST(Assembly, LinearInScalars) {
  oracle::Rng rng(21);
  const StructuredHexMesh mesh(3, 2, 2, 0.5);
  const auto bc = oracle::clamped_corner_load(mesh);
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), 0.3);
  auto s = oracle::uniform_field(rng, mesh.element_count(), 0.1, 1.0);
  const LinearSystem a = assemble(mesh, s, k0, bc.fixed, bc.load);
  for (double& v : s) v *= 2.0;
  const LinearSystem b = assemble(mesh, s, k0, bc.fixed, bc.load);
  for (Index r = 0; r < mesh.dof_count(); ++r) {
    for (Index c = 0; c < mesh.dof_count(); ++c) {
      if (bc.fixed[r] || bc.fixed[c]) continue;
      EXPECT_NEAR(b.K.at(r, c), 2.0 * a.K.at(r, c), 1e-13 * std::abs(a.K.at(r, c)) + 1e-300);
    }
  }
}

TEST(Assembly, AssemblerReuseMatchesFreshAssembly) {
  oracle::Rng rng(22);
  const StructuredHexMesh mesh(4, 3, 2, 0.25);
  const auto bc = oracle::clamped_corner_load(mesh);
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), 0.3);
  const StiffnessAssembler assembler(mesh);
  for (int trial = 0; trial < 3; ++trial) {
    const auto s = oracle::uniform_field(rng, mesh.element_count(), 0.1, 1.0);
    const LinearSystem a = assembler.assemble(s, k0, bc.fixed, bc.load);
    const LinearSystem b = assemble(mesh, s, k0, bc.fixed, bc.load);
    EXPECT_EQ(a.K.values, b.K.values);
    EXPECT_EQ(a.K.cols, b.K.cols);
  }
}

TEST(Assembly, RejectsBadScalars) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  const auto bc = oracle::clamped_corner_load(mesh);
  const ElementMatrix k0 = element_stiffness_unit(1.0, 0.3);
  EXPECT_THROW(assemble(mesh, std::vector<double>{1.0, 0.0}, k0, bc.fixed, bc.load), AssemblyError);
  EXPECT_THROW(assemble(mesh, std::vector<double>{1.0, std::nan("")}, k0, bc.fixed, bc.load), AssemblyError);
  EXPECT_THROW(assemble(mesh, std::vector<double>{1.0}, k0, bc.fixed, bc.load), AssemblyError);
}

TEST(Solve, ZeroLoadGivesZero) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  auto bc = oracle::clamped_corner_load(mesh);
  std::fill(bc.load.begin(), bc.load.end(), 0.0);
  const LinearSystem sys = assemble(mesh, std::vector<double>(2, 1.0), element_stiffness_unit(1.0, 0.3), bc.fixed, bc.load);
  for (double v : solve(sys)) EXPECT_EQ(v, 0.0);
}

TEST(Solve, ScalarSystem) {
  LinearSystem sys;
  sys.K = CsrMatrix::from_dense(1, std::vector<double>{2.0});
  sys.F = {3.0};
  sys.fixed = {0};
  EXPECT_DOUBLE_EQ(solve(sys)[0], 1.5);
  EXPECT_DOUBLE_EQ(solve_dense(sys)[0], 1.5);
}

TEST(Solve, PcgMatchesDenseOracleAndDensePath) {
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  const auto bc = oracle::clamped_corner_load(mesh);
  const std::vector<double> ones(mesh.element_count(), 1.0);
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), 0.3);
  const LinearSystem sys = assemble(mesh, ones, k0, bc.fixed, bc.load);
  const Eigen::VectorXd ref = oracle::dense_solve_free(oracle::dense_stiffness(mesh, ones, k0), bc.load, bc.fixed);
  const auto u = solve(sys);
  const auto ud = solve_dense(sys);
  double e1 = 0.0;
  double e2 = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    e1 += (u[i] - ref(i)) * (u[i] - ref(i));
    e2 += (ud[i] - ref(i)) * (ud[i] - ref(i));
  }
  EXPECT_LT(std::sqrt(e1) / ref.norm(), 1e-7);
  EXPECT_LT(std::sqrt(e2) / ref.norm(), 1e-12);
}

TEST(Solve, WarmStartConvergesFasterToSameSolution) {
  const StructuredHexMesh mesh(6, 3, 3, 1.0 / 3);
  const auto bc = oracle::clamped_corner_load(mesh);
  const ElementMatrix k0 = element_stiffness_unit(mesh.h(), 0.3);
  const LinearSystem sys = assemble(mesh, std::vector<double>(mesh.element_count(), 1.0), k0, bc.fixed, bc.load);
  SolveStats cold;
  const auto u = solve(sys, {}, {}, &cold);
  SolveStats warm;
  const auto v = solve(sys, {}, u, &warm);
  EXPECT_LT(warm.iterations, cold.iterations);
  EXPECT_LE(cold.relative_residual, 1e-8);
  for (Index i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i], v[i], 1e-6 * std::abs(u[i]) + 1e-12);
}

TEST(Solve, IterationCapRaisesSolverError) {
  const StructuredHexMesh mesh(6, 3, 3, 1.0 / 3);
  const auto bc = oracle::clamped_corner_load(mesh);
  const LinearSystem sys = assemble(mesh, std::vector<double>(mesh.element_count(), 1.0),
                                    element_stiffness_unit(mesh.h(), 0.3), bc.fixed, bc.load);
  try {
    solve(sys, {1e-8, 3});
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.iterations(), 3);
    EXPECT_GT(e.residual(), 1e-8);
  }
}

TEST(Compliance, DotProductAndEnergyConsistency) {
  EXPECT_EQ(compliance(std::vector<double>{0, 0}, std::vector<double>{3, 4}), 0.0);
  EXPECT_EQ(compliance(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 11.0);
  EXPECT_THROW(compliance(std::vector<double>{1}, std::vector<double>{3, 4}), DomainError);

  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  const auto bc = oracle::clamped_corner_load(mesh);
  const LinearSystem sys = assemble(mesh, std::vector<double>(mesh.element_count(), 1.0),
                                    element_stiffness_unit(mesh.h(), 0.3), bc.fixed, bc.load);
  const auto u = solve(sys);
  std::vector<double> ku(u.size());
  sys.K.multiply(u, ku);
  double energy = 0.0;
  for (Index i = 0; i < u.size(); ++i) energy += u[i] * ku[i];
  EXPECT_NEAR(compliance(u, sys.F), energy, 1e-6 * energy);
}

TEST(SolveProperty, LoadScalingIsQuadraticInCompliance) {
  oracle::Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const StructuredHexMesh mesh(3, 2, 2, 0.5);
    auto bc = oracle::clamped_corner_load(mesh);
    const auto s = oracle::uniform_field(rng, mesh.element_count(), 0.1, 1.0);
    const ElementMatrix k0 = element_stiffness_unit(mesh.h(), 0.3);
    const double scale = oracle::uniform(rng, 0.5, 4.0);
    const LinearSystem a = assemble(mesh, s, k0, bc.fixed, bc.load);
    for (double& f : bc.load) f *= scale;
    const LinearSystem b = assemble(mesh, s, k0, bc.fixed, bc.load);
    const auto ua = solve_dense(a);
    const auto ub = solve_dense(b);
    EXPECT_NEAR(compliance(ub, b.F), scale * scale * compliance(ua, a.F), 1e-10 * compliance(ub, b.F));
    for (Index i = 0; i < ua.size(); ++i) EXPECT_NEAR(ub[i], scale * ua[i], 1e-10 * (std::abs(ub[i]) + 1e-12));
  }
}

TEST(SolveProperty, PcgAgreesWithDenseOnSmallRandomSystems) {
  oracle::Rng rng(24);
  for (int trial = 0; trial < 8; ++trial) {
    const StructuredHexMesh mesh(1 + rng() % 5, 1 + rng() % 3, 1 + rng() % 3, oracle::uniform(rng, 0.1, 1.0));
    if (mesh.dof_count() > 500) continue;
    const auto bc = oracle::clamped_corner_load(mesh);
    const auto s = oracle::uniform_field(rng, mesh.element_count(), 1e-3, 1.0);
    const LinearSystem sys = assemble(mesh, s, element_stiffness_unit(mesh.h(), 0.3), bc.fixed, bc.load);
    const auto u = solve(sys);
    const auto ref = solve_dense(sys);
    double diff = 0.0;
    double norm = 0.0;
    for (Index i = 0; i < u.size(); ++i) {
      diff += (u[i] - ref[i]) * (u[i] - ref[i]);
      norm += ref[i] * ref[i];
    }
    EXPECT_LT(std::sqrt(diff / norm), 1e-6);
  }
}
