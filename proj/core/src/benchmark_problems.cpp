#include "seqtopo/benchmark_problems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqtopo/error.hpp"

namespace seqtopo {

BenchmarkId parse_benchmark_id(std::string_view text) {
  if (text == "cantilever") return BenchmarkId::Cantilever;
  if (text == "mbb") return BenchmarkId::Mbb;
  if (text == "custom") return BenchmarkId::Custom;
  throw ConfigError("unknown benchmark '" + std::string(text) + "' (expected cantilever, mbb or custom)");
}

std::string_view benchmark_name(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Cantilever: return "cantilever";
    case BenchmarkId::Mbb: return "mbb";
    case BenchmarkId::Custom: return "custom";
  }
  return "?";
}

void distribute_load(BoundaryConditions& bc, std::span<const Index> nodes, const Vec3& force) {
  if (nodes.empty()) throw ConfigError("load region selects no nodes");
  const double share = 1.0 / static_cast<double>(nodes.size());
  for (Index n : nodes) {
    for (int c = 0; c < 3; ++c) bc.load[3 * n + c] += force[c] * share;
  }
  bc.load_nodes.insert(bc.load_nodes.end(), nodes.begin(), nodes.end());
  std::sort(bc.load_nodes.begin(), bc.load_nodes.end());
  bc.load_nodes.erase(std::unique(bc.load_nodes.begin(), bc.load_nodes.end()), bc.load_nodes.end());
}

void fix_nodes(BoundaryConditions& bc, std::span<const Index> nodes, DofMask mask) {
  const bool m[3] = {mask.x, mask.y, mask.z};
  for (Index n : nodes) {
    for (int c = 0; c < 3; ++c) {
      if (m[c]) bc.fixed[3 * n + c] = 1;
    }
  }
}

BenchmarkProblem build_benchmark(BenchmarkId id, Resolution res) {
  if (id == BenchmarkId::Custom) throw ConfigError("custom problems are defined by configuration");
  if (res.nx < 2 || res.ny < 1 || res.nz < 1 || res.nx != 2 * res.ny || res.ny != res.nz) {
    throw ConfigError("benchmark resolution must satisfy nx = 2 ny = 2 nz");
  }
  if (id == BenchmarkId::Mbb && res.ny % 2 != 0) {
    throw ConfigError("mbb benchmark needs an even ny so that y = 0.5 is a node plane");
  }
  const double h = 2.0 / res.nx;
  BenchmarkProblem p{StructuredHexMesh(res.nx, res.ny, res.nz, h), {}, {}};
  const auto& mesh = p.mesh;
  p.bc.fixed.assign(mesh.dof_count(), 0);
  p.bc.load.assign(mesh.dof_count(), 0.0);

  std::vector<Index> supports;
  auto add_support = [&](const std::vector<Index>& nodes, DofMask mask) {
    if (nodes.empty()) throw ConfigError("support region selects no nodes");
    fix_nodes(p.bc, nodes, mask);
    supports.insert(supports.end(), nodes.begin(), nodes.end());
  };

  if (id == BenchmarkId::Cantilever) {
    const double s = 0.3;
    for (double y0 : {0.0, 1.0 - s}) {
      for (double z0 : {0.0, 1.0 - s}) {
        add_support(select_nodes(mesh, RegionSelector::box({0.0, y0, z0}, {0.0, y0 + s, z0 + s})), {});
      }
    }
    const auto load = select_nodes(mesh, RegionSelector::disk(Face::XMax, {2.0, 0.5, 0.5}, 0.1));
    distribute_load(p.bc, load, {0.0, 0.0, -1.0});
  } else {
    add_support(select_nodes(mesh, RegionSelector::whole_face(Face::XMin)), {true, false, false});
    add_support(select_nodes(mesh, RegionSelector::strip(Face::ZMin, 0, 2.0 - h, 2.0)), {false, false, true});
    add_support(select_nodes(mesh, RegionSelector::box({2.0 - h, 0.5, 0.0}, {2.0, 0.5, 0.0})),
                {false, true, false});
    const auto load = select_nodes(mesh, RegionSelector::disk(Face::ZMax, {0.0, 0.5, 1.0}, 0.1));
    distribute_load(p.bc, load, {0.0, 0.0, -1.0});
  }
  std::sort(supports.begin(), supports.end());
  supports.erase(std::unique(supports.begin(), supports.end()), supports.end());
  p.support_nodes = std::move(supports);
  return p;
}

}  // namespace seqtopo
