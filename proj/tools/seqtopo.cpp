#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqtopo/config.hpp"
#include "seqtopo/error.hpp"
#include "seqtopo/evaluate.hpp"
#include "seqtopo/io.hpp"
#include "seqtopo/parallel.hpp"
#include "seqtopo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace seqtopo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<int> workers;
  std::vector<int> resolution;
  std::optional<std::string> benchmark;
  std::optional<double> change_tol;
  std::uint64_t seed = 0;  // reserved: the pipeline draws no random numbers
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "configuration file (key = value with [sections])")
      ->check(CLI::ExistingFile);
  app->add_option("--out", o.out_dir, "output directory (overrides [output] output_dir)");
  app->add_option("--workers", o.workers, "intra-stage worker threads; 1 is bit-reproducible")
      ->check(CLI::PositiveNumber);
  app->add_option("--resolution", o.resolution, "mesh cells NX NY NZ")->expected(3);
  app->add_option("--benchmark", o.benchmark, "cantilever, mbb or custom");
  app->add_option("--change-tol", o.change_tol, "SIMP stop threshold on max density change");
  app->add_option("--seed", o.seed, "reserved; accepted for reproducibility scripts, unused");
}

PipelineConfig make_config(const CommonOptions& o) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig{} : load_config(o.config_path);
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  if (o.workers) c.workers = *o.workers;
  if (o.resolution.size() == 3) c.resolution = {o.resolution[0], o.resolution[1], o.resolution[2]};
  if (o.benchmark) c.benchmark = parse_benchmark_id(*o.benchmark);
  if (o.change_tol) c.change_tol = *o.change_tol;
  c.validate();
  set_worker_count(c.workers);
  return c;
}

std::string in_dir(const PipelineConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return (fs::path(c.output_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
}

void check_grid(const VtkData& data, const StructuredHexMesh& mesh, const std::string& path) {
  if (data.nx != mesh.nx() || data.ny != mesh.ny() || data.nz != mesh.nz()) {
    throw ConfigError("'" + path + "' grid does not match the configured resolution");
  }
}

int cmd_run(const CommonOptions& o) {
  const PipelineConfig c = make_config(o);
  const PipelineResult r = run_pipeline(c);
  std::cout << summary_text(c, r);
  return 0;
}

int cmd_simp(const CommonOptions& o) {
  const PipelineConfig c = make_config(o);
  const BenchmarkProblem p = build_problem(c);
  RunHistory history;
  const auto t0 = Clock::now();
  const SimpResult s = run_simp(p.mesh, p.bc, c.simp_params(), history);
  const double dt = seconds_since(t0);
  const NamedField cells[] = {{"density", s.density}};
  write_vtk(in_dir(c, "simp.vtk"), p.mesh, {}, cells);
  write_history(in_dir(c, "history.csv"), history);
  std::cout << "simp_iterations: " << s.iterations << "\nsimp_converged: " << (s.converged ? "yes" : "no")
            << "\ncompliance: " << s.compliance << "\nvolume_fraction: " << volume_fraction(p.mesh, s.density)
            << "\ntime_simp_s: " << dt << '\n';
  return 0;
}

int cmd_transfer(const CommonOptions& o, const std::string& input) {
  const PipelineConfig c = make_config(o);
  const BenchmarkProblem p = build_problem(c);
  const VtkData data = read_vtk(input);
  check_grid(data, p.mesh, input);
  const auto t0 = Clock::now();
  const TransferResult t = run_transfer(p.mesh, data.cell("density"), c.iso);
  const double dt = seconds_since(t0);
  const NamedField points[] = {{"rho_n", t.nodal_density}, {"phi", t.phi}};
  const NamedField cells[] = {{"density", data.cell("density")}};
  write_vtk(in_dir(c, "transfer.vtk"), p.mesh, points, cells);
  write_stl(in_dir(c, "simp_extracted.stl"), t.surface, "simp_extracted");
  std::cout << "triangles: " << t.surface.size() << "\nambiguous_cells: " << t.surface.ambiguous_cells
            << "\ndropped_degenerate_triangles: " << t.surface.dropped_degenerate << "\ntime_extraction_s: " << dt
            << '\n';
  return 0;
}

int cmd_levelset(const CommonOptions& o, const std::string& input) {
  PipelineConfig c = make_config(o);
  c.initialization = input.empty() ? Initialization::Porous : Initialization::SimpSdf;
  const BenchmarkProblem p = build_problem(c);
  const auto t0 = Clock::now();
  LevelSetField phi0;
  if (input.empty()) {
    phi0 = porous_initialization(p.mesh, c.porous_freq, c.porous_offset);
  } else {
    const VtkData data = read_vtk(input);
    check_grid(data, p.mesh, input);
    phi0 = data.point("phi");
  }
  RunHistory history;
  const LevelSetResult ls =
      run_levelset(p.mesh, phi0, p.bc, c.constraint_handler(), c.levelset_params(), history);
  const double dt = seconds_since(t0);
  const NamedField points[] = {{"phi", ls.phi}};
  write_vtk(in_dir(c, "levelset.vtk"), p.mesh, points, {});
  write_stl(in_dir(c, "final.stl"), extract_levelset_surface(p.mesh, ls.phi), "final");
  write_history(in_dir(c, "history.csv"), history);
  std::cout << "levelset_iterations: " << ls.iterations << "\nlevelset_converged: " << (ls.converged ? "yes" : "no")
            << "\nobjective: " << ls.objective << "\nvolume_fraction: " << ls.volume_fraction
            << "\ninitial_volume_fraction: " << ls.initial_volume_fraction << "\ntime_levelset_s: " << dt << '\n';
  return 0;
}

int cmd_evaluate(const CommonOptions& o, const std::string& input, const std::string& field) {
  const PipelineConfig c = make_config(o);
  const BenchmarkProblem p = build_problem(c);
  const VtkData data = read_vtk(input);
  check_grid(data, p.mesh, input);
  const SolidConvention conv = field == "phi" ? SolidConvention::PhiNonPositive : SolidConvention::DensityAtLeastHalf;
  const auto t0 = Clock::now();
  const auto fractions = solid_fractions(p.mesh, data.point(field), conv, c.samples);
  const EvaluatedDesign d = evaluate_compliance(p.mesh, fractions, p.bc, c.eps0, c.e0, c.nu);
  const double dt = seconds_since(t0);
  RunHistory history;
  append_evaluation(history, 1, d, dt, fs::path(input).filename().string());
  write_history(in_dir(c, "evaluation.csv"), history);
  std::cout << "compliance: " << d.compliance << "\nvolume_fraction: " << d.volume_fraction
            << "\ntime_evaluate_s: " << dt << '\n';
  return 0;
}

int cmd_bench(const CommonOptions& o) {
  const PipelineConfig base = make_config(o);
  struct Row {
    std::string run;
    PipelineConfig config;
    PipelineResult result;
  };
  std::vector<Row> rows;
  for (double tol : {0.005, 0.01, 0.02, 0.04, 0.08}) {
    PipelineConfig c = base;
    c.initialization = Initialization::SimpSdf;
    c.change_tol = tol;
    char name[32];
    std::snprintf(name, sizeof name, "sequential_%g", tol * 100.0);
    c.output_dir = (fs::path(base.output_dir) / name).string();
    std::cerr << "running " << name << '\n';
    rows.push_back({name, c, run_pipeline(c)});
  }
  PipelineConfig porous = base;
  porous.initialization = Initialization::Porous;
  porous.output_dir = (fs::path(base.output_dir) / "porous").string();
  std::cerr << "running porous\n";
  rows.push_back({"porous", porous, run_pipeline(porous)});

  const double baseline = rows.back().result.timings.cumulative();
  std::ostringstream csv;
  csv << "run,change_tol,simp_iterations,levelset_iterations,time_simp_s,time_extraction_s,time_levelset_s,"
         "time_cumulative_s,speedup,final_compliance,final_volume_fraction\n";
  for (const auto& r : rows) {
    const auto& t = r.result.timings;
    csv << r.run << ',';
    if (r.config.initialization == Initialization::SimpSdf) csv << r.config.change_tol;
    csv << ',' << r.result.simp_iterations << ',' << r.result.levelset_iterations << ',' << t.simp << ','
        << t.transfer << ',' << t.levelset << ',' << t.cumulative() << ',' << baseline / t.cumulative() << ','
        << r.result.final_compliance << ',' << r.result.final_volume_fraction << '\n';
  }
  write_text(in_dir(base, "bench.csv"), csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential SIMP to level-set topology optimization"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string input;
  std::string field = "phi";

  auto* run = app.add_subcommand("run", "full pipeline: SIMP, transfer, level set, evaluation");
  add_common(run, opts);
  auto* simp = app.add_subcommand("simp", "SIMP stage only; writes simp.vtk");
  add_common(simp, opts);
  auto* transfer = app.add_subcommand("transfer", "density VTK to signed distance; writes transfer.vtk");
  add_common(transfer, opts);
  transfer->add_option("--input", input, "VTK with cell field 'density'")->required()->check(CLI::ExistingFile);
  auto* levelset = app.add_subcommand("levelset", "level-set stage; porous start without --input");
  add_common(levelset, opts);
  levelset->add_option("--input", input, "VTK with point field 'phi'")->check(CLI::ExistingFile);
  auto* evaluate = app.add_subcommand("evaluate", "cut-cell compliance of a design VTK");
  add_common(evaluate, opts);
  evaluate->add_option("--input", input, "VTK with the nodal design field")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--field", field, "point field: phi (solid <= 0) or rho_n (solid >= 0.5)")
      ->check(CLI::IsMember({"phi", "rho_n"}));
  auto* bench = app.add_subcommand("bench", "sweep change_tol over 0.5,1,2,4,8 % plus the porous baseline");
  add_common(bench, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(opts);
    if (*simp) return cmd_simp(opts);
    if (*transfer) return cmd_transfer(opts, input);
    if (*levelset) return cmd_levelset(opts, input);
    if (*evaluate) return cmd_evaluate(opts, input, field);
    if (*bench) return cmd_bench(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
