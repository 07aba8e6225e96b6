#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "seqtopo/benchmark_problems.hpp"
#include "seqtopo/levelset.hpp"
#include "seqtopo/simp.hpp"

namespace seqtopo {

enum class Initialization { SimpSdf, Porous };
enum class HandlerChoice { Auto, AugmentedLagrangian, HilbertianProjection };

Initialization parse_initialization(std::string_view text);
std::string_view initialization_name(Initialization init);
HandlerChoice parse_handler_choice(std::string_view text);
std::string_view handler_choice_name(HandlerChoice choice);

// Boundary-condition entry for custom problems, written as
//   <kind>:<face or ->:<numbers>:<payload>
// kinds: face, box (x0,y0,z0,x1,y1,z1), disk (cx,cy,cz,r), strip (axis,lo,hi).
// The payload is a DOF mask ("xyz", "z", ...) for supports and a force
// "fx,fy,fz" for loads.
struct RegionSpec {
  std::string text;
  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

struct PipelineConfig {
  // [problem]
  BenchmarkId benchmark = BenchmarkId::Cantilever;
  Resolution resolution;
  double custom_h = 0.05;                 // element edge for custom problems
  std::vector<RegionSpec> custom_supports;
  std::vector<RegionSpec> custom_loads;

  // [material]
  double e0 = 1.0;
  double nu = 0.3;

  // [simp]
  double penal = 3.0;
  double e_min = 1e-9;
  double volfrac = 0.4;
  double filter_radius_h = 2.0;  // in element edges
  double move = 0.2;
  double damping = 0.5;
  double change_tol = 0.01;
  int simp_max_iters = 1000;

  // [transfer]
  double iso = 0.5;

  // [levelset]
  Initialization initialization = Initialization::SimpSdf;
  HandlerChoice handler = HandlerChoice::Auto;
  double eps0 = 1e-3;
  double eta_h = 2.0;
  double reg_length_h = 2.0;
  double gamma = 0.1;
  double gamma_min = 1e-3;
  int n_steps = 10;
  double reinit_tol = 1e-3;
  int reinit_max_steps = 200;
  double j_tol_h = 0.2;             // J_tol = j_tol_h * h
  double sequential_j_divisor = 5.0;
  int window = 5;
  double c_tol = 0.01;
  int ls_max_iters = 300;
  double porous_freq = 4.0;
  double porous_offset = 0.2;
  AugmentedLagrangian al;
  HilbertianProjection hp;

  // [evaluate]
  int samples = 4;

  // [output]
  std::string output_dir = "out";
  int snapshot_period = 0;  // level-set VTK every k iterations; 0 disables
  int workers = 1;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;

  double h() const;
  SimpParams simp_params() const;
  LevelSetParams levelset_params() const;
  ConstraintHandler constraint_handler() const;
  void validate() const;
};

// Line-oriented "key = value" text with [section] headers; '#' starts a
// comment. Unknown sections or keys throw ConfigError with the line number.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::string& path);
std::string serialize_config(const PipelineConfig& config);

// Problem described by the config (benchmark or custom).
BenchmarkProblem build_problem(const PipelineConfig& config);

}  // namespace seqtopo
