#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "seqtopo/benchmark_problems.hpp"
#include "seqtopo/error.hpp"
#include "seqtopo/mesh.hpp"

using namespace seqtopo;

TEST(Mesh, NodeCoordinatesOnBenchmarkDomain) {
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  EXPECT_EQ(mesh.node_coords(mesh.node_index(0, 0, 0)), (Vec3{0, 0, 0}));
  EXPECT_EQ(mesh.node_coords(mesh.node_index(4, 2, 2)), (Vec3{2.0, 1.0, 1.0}));
  EXPECT_EQ(mesh.node_coords(mesh.node_index(1, 1, 1)), (Vec3{0.5, 0.5, 0.5}));
  EXPECT_EQ(mesh.node_count(), 45u);
  EXPECT_EQ(mesh.element_count(), 16u);
  EXPECT_DOUBLE_EQ(mesh.element_volume(3), 0.125);
}

TEST(Mesh, OriginShiftsCoordinates) {
  const StructuredHexMesh mesh(2, 2, 2, 0.25, {1, -1, 2});
  EXPECT_EQ(mesh.node_coords(mesh.node_index(2, 1, 0)), (Vec3{1.5, -0.75, 2.0}));
}

TEST(Mesh, RejectsInvalidConstruction) {
  EXPECT_THROW(StructuredHexMesh(0, 1, 1, 0.1), ConfigError);
  EXPECT_THROW(StructuredHexMesh(1, 1, 1, 0.0), ConfigError);
  EXPECT_THROW(StructuredHexMesh(1, 1, 1, -1.0), ConfigError);
}

TEST(Mesh, IndexOutOfRangeThrows) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  EXPECT_THROW(mesh.node_lattice(mesh.node_count()), std::out_of_range);
  EXPECT_THROW(mesh.element_lattice(mesh.element_count()), std::out_of_range);
}

TEST(Mesh, SingleElementUsesUnitCellNodes) {
  const StructuredHexMesh mesh(1, 1, 1, 1.0);
  auto nodes = mesh.element_nodes(0);
  std::sort(nodes.begin(), nodes.end());
  for (Index i = 0; i < 8; ++i) EXPECT_EQ(nodes[i], i);
}

TEST(Mesh, ElementNodesFollowCornerOrder) {
  const StructuredHexMesh mesh(3, 2, 2, 0.5);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    const Vec3 base = mesh.node_coords(nodes[0]);
    for (int a = 0; a < 8; ++a) {
      const Vec3 d = mesh.node_coords(nodes[a]) - base;
      EXPECT_EQ(d, (Vec3{0.5 * kHexCorners[a].i, 0.5 * kHexCorners[a].j, 0.5 * kHexCorners[a].k}));
    }
  }
}

TEST(Mesh, FaceNeighboursShareFourNodes) {
  const StructuredHexMesh mesh(2, 1, 1, 1.0);
  const auto a = mesh.element_nodes(0);
  const auto b = mesh.element_nodes(1);
  const std::set<Index> sa(a.begin(), a.end());
  int shared = 0;
  for (Index n : b) shared += sa.count(n);
  EXPECT_EQ(shared, 4);
}

TEST(Mesh, InteriorNodesBelongToEightElements) {
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  std::vector<int> count(mesh.node_count(), 0);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    for (Index n : mesh.element_nodes(e)) ++count[n];
  }
  for (Index n = 0; n < mesh.node_count(); ++n) {
    if (!mesh.is_boundary_node(n)) {
      EXPECT_EQ(count[n], 8) << n;
    }
    EXPECT_EQ(static_cast<int>(mesh.node_elements(n).size()), count[n]);
  }
}

TEST(MeshProperty, LatticeRoundTrip) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = 1 + static_cast<int>(rng() % 6);
    const int ny = 1 + static_cast<int>(rng() % 5);
    const int nz = 1 + static_cast<int>(rng() % 4);
    const StructuredHexMesh mesh(nx, ny, nz, oracle::uniform(rng, 0.01, 2.0));
    for (Index n = 0; n < mesh.node_count(); ++n) {
      const LatticeIndex l = mesh.node_lattice(n);
      ASSERT_EQ(mesh.node_index(l.i, l.j, l.k), n);
    }
    for (Index e = 0; e < mesh.element_count(); ++e) {
      const LatticeIndex l = mesh.element_lattice(e);
      ASSERT_EQ(mesh.element_index(l.i, l.j, l.k), e);
    }
  }
}

TEST(MeshProperty, AdjacencySymmetry) {
  oracle::Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const StructuredHexMesh mesh(1 + rng() % 5, 1 + rng() % 4, 1 + rng() % 3, 0.3);
    for (Index n = 0; n < mesh.node_count(); ++n) {
      for (Index e : mesh.node_elements(n)) {
        const auto nodes = mesh.element_nodes(e);
        EXPECT_NE(std::find(nodes.begin(), nodes.end(), n), nodes.end());
      }
    }
    for (Index e = 0; e < mesh.element_count(); ++e) {
      const auto nodes = mesh.element_nodes(e);
      EXPECT_EQ(std::set<Index>(nodes.begin(), nodes.end()).size(), 8u);
      for (Index n : nodes) {
        const auto elems = mesh.node_elements(n);
        EXPECT_TRUE(std::binary_search(elems.begin(), elems.end(), e));
      }
    }
  }
}

TEST(Selection, WholeFaceOnPaperMesh) {
  const StructuredHexMesh mesh(40, 20, 20, 0.05);
  EXPECT_EQ(select_nodes(mesh, RegionSelector::whole_face(Face::XMin)).size(), 441u);
  EXPECT_EQ(select_nodes(mesh, RegionSelector::whole_face(Face::ZMax)).size(), 41u * 21u);
}

TEST(Selection, DiskMatchesBruteForceScan) {
  const StructuredHexMesh mesh(40, 20, 20, 0.05);
  const auto sel = select_nodes(mesh, RegionSelector::disk(Face::XMax, {2.0, 0.5, 0.5}, 0.1));
  std::vector<Index> expected;
  for (int k = 0; k <= 20; ++k) {
    for (int j = 0; j <= 20; ++j) {
      const double y = 0.05 * j - 0.5;
      const double z = 0.05 * k - 0.5;
      if (y * y + z * z <= 0.01 + 1e-12) expected.push_back(mesh.node_index(40, j, k));
    }
  }
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(sel, expected);
  EXPECT_EQ(sel.size(), 13u);
}

TEST(Selection, DegenerateBoxPicksOneNode) {
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  const auto sel = select_nodes(mesh, RegionSelector::box({1.0, 0.5, 0.5}, {1.0, 0.5, 0.5}));
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_EQ(sel[0], mesh.node_index(2, 1, 1));
}

TEST(Selection, IdempotentAndSorted) {
  const StructuredHexMesh mesh(10, 5, 5, 0.2);
  const auto sel = RegionSelector::strip(Face::ZMin, 0, 1.6, 2.0);
  const auto a = select_nodes(mesh, sel);
  EXPECT_EQ(a, select_nodes(mesh, sel));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(a.size(), 3u * 6u);
}

TEST(Selection, InvalidSelectorsThrow) {
  const StructuredHexMesh mesh(4, 2, 2, 0.5);
  EXPECT_THROW(select_nodes(mesh, RegionSelector::disk(Face::XMax, {1.0, 0.5, 0.5}, 0.1)), ConfigError);
  EXPECT_THROW(select_nodes(mesh, RegionSelector::box({1, 1, 1}, {0, 0, 0})), ConfigError);
  EXPECT_THROW(select_nodes(mesh, RegionSelector::strip(Face::ZMin, 2, 0, 1)), ConfigError);
  EXPECT_THROW(parse_face("w=0"), ConfigError);
}

TEST(Selection, FaceNamesParse) {
  EXPECT_EQ(parse_face("x=0"), Face::XMin);
  EXPECT_EQ(parse_face("x=L"), Face::XMax);
  EXPECT_EQ(parse_face("zmax"), Face::ZMax);
  for (Face f : {Face::XMin, Face::XMax, Face::YMin, Face::YMax, Face::ZMin, Face::ZMax}) {
    EXPECT_EQ(parse_face(face_name(f)), f);
  }
}

TEST(Benchmarks, CantileverSupportsAndLoad) {
  const BenchmarkProblem p = build_benchmark(BenchmarkId::Cantilever, {40, 20, 20});
  EXPECT_EQ(p.support_nodes.size(), 4u * 49u);
  for (Index n : p.support_nodes) {
    EXPECT_EQ(p.mesh.node_lattice(n).i, 0);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(p.bc.fixed[3 * n + c], 1);
  }
  Vec3 total;
  for (Index n = 0; n < p.mesh.node_count(); ++n) total += Vec3{p.bc.load[3 * n], p.bc.load[3 * n + 1], p.bc.load[3 * n + 2]};
  EXPECT_NEAR(total.x, 0.0, 1e-15);
  EXPECT_NEAR(total.y, 0.0, 1e-15);
  EXPECT_NEAR(total.z, -1.0, 1e-14);
  EXPECT_EQ(p.bc.load_nodes.size(), 13u);
}

TEST(Benchmarks, MbbSymmetryFaceAndStrip) {
  const BenchmarkProblem p = build_benchmark(BenchmarkId::Mbb, {40, 20, 20});
  int fixed_x = 0;
  for (Index n = 0; n < p.mesh.node_count(); ++n) fixed_x += p.bc.fixed[3 * n];
  EXPECT_EQ(fixed_x, 441);
  int fixed_z = 0;
  for (Index n = 0; n < p.mesh.node_count(); ++n) {
    if (p.bc.fixed[3 * n + 2]) {
      ++fixed_z;
      EXPECT_EQ(p.mesh.node_lattice(n).k, 0);
      EXPECT_GE(p.mesh.node_lattice(n).i, 39);
    }
  }
  EXPECT_EQ(fixed_z, 2 * 21);
  double fz = 0.0;
  for (Index n : p.bc.load_nodes) {
    EXPECT_EQ(p.mesh.node_lattice(n).k, 20);
    const Vec3 x = p.mesh.node_coords(n);
    EXPECT_LE(x.x * x.x + (x.y - 0.5) * (x.y - 0.5), 0.01 + 1e-12);
    fz += p.bc.load[3 * n + 2];
  }
  EXPECT_EQ(p.bc.load_nodes.size(), 9u);
  EXPECT_NEAR(fz, -1.0, 1e-14);
}

TEST(Benchmarks, RejectInconsistentResolution) {
  EXPECT_THROW(build_benchmark(BenchmarkId::Cantilever, {40, 10, 20}), ConfigError);
  EXPECT_THROW(build_benchmark(BenchmarkId::Mbb, {6, 3, 3}), ConfigError);
  EXPECT_THROW(build_benchmark(BenchmarkId::Custom, {40, 20, 20}), ConfigError);
  EXPECT_THROW(parse_benchmark_id("bridge"), ConfigError);
}
