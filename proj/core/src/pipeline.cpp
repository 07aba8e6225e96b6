#include "seqtopo/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqtopo/error.hpp"
#include "seqtopo/io.hpp"
#include "seqtopo/parallel.hpp"

namespace seqtopo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class ArtifactWriter {
 public:
  ArtifactWriter(bool enabled, const std::string& dir, std::vector<std::string>& list)
      : enabled_(enabled), dir_(dir), list_(list) {
    if (!enabled_) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
  }

  bool enabled() const { return enabled_; }

  template <typename F>
  void write(const std::string& name, F&& writer) {
    if (!enabled_) return;
    const std::string path = (std::filesystem::path(dir_) / name).string();
    writer(path);
    list_.push_back(name);
  }

  void manifest(const std::string& status, const std::string& error) {
    if (!enabled_) return;
    const std::string path = (std::filesystem::path(dir_) / "manifest.txt").string();
    std::ofstream out(path);
    out << "status: " << status << '\n';
    if (!error.empty()) out << "error: " << error << '\n';
    for (const auto& f : list_) out << "artifact: " << f << '\n';
  }

 private:
  bool enabled_;
  std::string dir_;
  std::vector<std::string>& list_;
};

}  // namespace

TransferResult run_transfer(const StructuredHexMesh& mesh, const DensityField& density, double iso) {
  TransferResult t;
  t.nodal_density = map_densities_to_nodes(mesh, density);
  t.surface = extract_isosurface(mesh, t.nodal_density, iso);
  t.phi = build_sdf(mesh, t.surface, t.nodal_density, iso);
  return t;
}

TriangleSurface extract_levelset_surface(const StructuredHexMesh& mesh, const LevelSetField& phi) {
  NodalField negated(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) negated[i] = -phi[i];
  return extract_isosurface(mesh, negated, 0.0);
}

void append_evaluation(RunHistory& history, int iteration, const EvaluatedDesign& design, double wall_seconds,
                       const std::string& note) {
  HistoryRecord r;
  r.stage = "evaluate";
  r.iteration = iteration;
  r.objective = design.compliance;
  r.volume_fraction = design.volume_fraction;
  r.wall_seconds = wall_seconds;
  r.note = note;
  history.append(std::move(r));
}

PipelineResult run_pipeline(const PipelineConfig& config, bool write_artifacts) {
  config.validate();
  set_worker_count(config.workers);

  PipelineResult result;
  ArtifactWriter out(write_artifacts, config.output_dir, result.artifacts);
  try {
    const BenchmarkProblem problem = build_problem(config);
    const StructuredHexMesh& mesh = problem.mesh;
    const bool sequential = config.initialization == Initialization::SimpSdf;
    int eval_iteration = 0;

    LevelSetField phi0;
    if (sequential) {
      auto t0 = Clock::now();
      const SimpResult simp = run_simp(mesh, problem.bc, config.simp_params(), result.history);
      result.timings.simp = seconds_since(t0);
      result.ran_simp = true;
      result.simp_iterations = simp.iterations;
      result.simp_converged = simp.converged;
      result.simp_volume_fraction = volume_fraction(mesh, simp.density);

      t0 = Clock::now();
      TransferResult transfer = run_transfer(mesh, simp.density, config.iso);
      result.timings.transfer = seconds_since(t0);
      result.ambiguous_cells += transfer.surface.ambiguous_cells;
      result.dropped_triangles += transfer.surface.dropped_degenerate;
      phi0 = transfer.phi;

      out.write("simp.vtk", [&](const std::string& p) {
        const NamedField points[] = {{"rho_n", transfer.nodal_density}, {"phi", transfer.phi}};
        const NamedField cells[] = {{"density", simp.density}};
        write_vtk(p, mesh, points, cells);
      });
      out.write("simp_extracted.stl", [&](const std::string& p) { write_stl(p, transfer.surface, "simp_extracted"); });

      t0 = Clock::now();
      const auto fractions =
          solid_fractions(mesh, transfer.nodal_density, SolidConvention::DensityAtLeastHalf, config.samples);
      const EvaluatedDesign simp_eval =
          evaluate_compliance(mesh, fractions, problem.bc, config.eps0, config.e0, config.nu);
      const double dt = seconds_since(t0);
      result.timings.evaluate += dt;
      result.simp_extracted_volume_fraction = simp_eval.volume_fraction;
      result.simp_extracted_compliance = simp_eval.compliance;
      append_evaluation(result.history, ++eval_iteration, simp_eval, dt, "simp-extracted");
    } else {
      const auto t0 = Clock::now();
      phi0 = porous_initialization(mesh, config.porous_freq, config.porous_offset);
      result.timings.levelset += seconds_since(t0);
    }

    auto t0 = Clock::now();
    std::function<void(int, const LevelSetField&)> snapshot;
    if (out.enabled() && config.snapshot_period > 0) {
      snapshot = [&](int it, const LevelSetField& phi) {
        if (it % config.snapshot_period != 0) return;
        char name[64];
        std::snprintf(name, sizeof name, "levelset_%04d.vtk", it);
        out.write(name, [&](const std::string& p) {
          const NamedField points[] = {{"phi", phi}};
          write_vtk(p, mesh, points, {});
        });
      };
    }
    const LevelSetResult ls = run_levelset(mesh, phi0, problem.bc, config.constraint_handler(),
                                           config.levelset_params(), result.history, "levelset", snapshot);
    result.timings.levelset += seconds_since(t0);
    result.levelset_iterations = ls.iterations;
    result.levelset_converged = ls.converged;
    result.levelset_initial_volume_fraction = ls.initial_volume_fraction;
    result.levelset_volume_fraction = ls.volume_fraction;

    t0 = Clock::now();
    const auto fractions = solid_fractions(mesh, ls.phi, SolidConvention::PhiNonPositive, config.samples);
    const EvaluatedDesign final_eval = evaluate_compliance(mesh, fractions, problem.bc, config.eps0, config.e0, config.nu);
    const double dt = seconds_since(t0);
    result.timings.evaluate += dt;
    result.final_volume_fraction = final_eval.volume_fraction;
    result.final_compliance = final_eval.compliance;
    append_evaluation(result.history, ++eval_iteration, final_eval, dt, "levelset-final");

    const TriangleSurface final_surface = extract_levelset_surface(mesh, ls.phi);
    result.ambiguous_cells += final_surface.ambiguous_cells;
    result.dropped_triangles += final_surface.dropped_degenerate;
    out.write("levelset.vtk", [&](const std::string& p) {
      const NamedField points[] = {{"phi", ls.phi}};
      const NamedField cells[] = {{"fraction", final_eval.fractions}};
      write_vtk(p, mesh, points, cells);
    });
    out.write("final.stl", [&](const std::string& p) { write_stl(p, final_surface, "final"); });
    out.write("history.csv", [&](const std::string& p) { write_history(p, result.history); });
    out.write("summary.txt", [&](const std::string& p) {
      std::ofstream f(p);
      if (!f) throw IoError("cannot open '" + p + "' for writing");
      f << summary_text(config, result);
    });
    out.write("config.ini", [&](const std::string& p) {
      std::ofstream f(p);
      if (!f) throw IoError("cannot open '" + p + "' for writing");
      f << serialize_config(config);
    });
    out.manifest("ok", "");
  } catch (const std::exception& e) {
    try {
      out.write("history.csv", [&](const std::string& p) { write_history(p, result.history); });
    } catch (const std::exception&) {
    }
    out.manifest("failed", e.what());
    throw;
  }
  return result;
}

std::string summary_text(const PipelineConfig& config, const PipelineResult& r) {
  std::ostringstream s;
  s << "benchmark: " << benchmark_name(config.benchmark) << '\n';
  s << "resolution: " << config.resolution.nx << ' ' << config.resolution.ny << ' ' << config.resolution.nz << '\n';
  s << "initialization: " << initialization_name(config.initialization) << '\n';
  s << "handler: "
    << (std::holds_alternative<AugmentedLagrangian>(config.constraint_handler()) ? "augmented-lagrangian"
                                                                                 : "hilbertian-projection")
    << '\n';
  s << "change_tol: " << fmt(config.change_tol) << '\n';
  s << "workers: " << config.workers << '\n';
  s << "simp_iterations: " << r.simp_iterations << '\n';
  s << "simp_converged: " << (r.ran_simp ? (r.simp_converged ? "yes" : "no") : "n/a") << '\n';
  s << "simp_volume_fraction: " << fmt(r.simp_volume_fraction) << '\n';
  s << "simp_extracted_volume_fraction: " << fmt(r.simp_extracted_volume_fraction) << '\n';
  s << "simp_extracted_compliance: " << fmt(r.simp_extracted_compliance) << '\n';
  s << "levelset_iterations: " << r.levelset_iterations << '\n';
  s << "levelset_converged: " << (r.levelset_converged ? "yes" : "no") << '\n';
  s << "levelset_initial_volume_fraction: " << fmt(r.levelset_initial_volume_fraction) << '\n';
  s << "levelset_volume_fraction: " << fmt(r.levelset_volume_fraction) << '\n';
  s << "final_volume_fraction: " << fmt(r.final_volume_fraction) << '\n';
  s << "final_compliance: " << fmt(r.final_compliance) << '\n';
  s << "ambiguous_cells: " << r.ambiguous_cells << '\n';
  s << "dropped_degenerate_triangles: " << r.dropped_triangles << '\n';
  s << "time_simp_s: " << fmt(r.timings.simp) << '\n';
  s << "time_extraction_s: " << fmt(r.timings.transfer) << '\n';
  s << "time_levelset_s: " << fmt(r.timings.levelset) << '\n';
  s << "time_evaluate_s: " << fmt(r.timings.evaluate) << '\n';
  s << "time_cumulative_s: " << fmt(r.timings.cumulative()) << '\n';
  return s.str();
}

}  // namespace seqtopo
