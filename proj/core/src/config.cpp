#include "seqtopo/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>
#include <variant>

#include "seqtopo/error.hpp"

namespace seqtopo {

Initialization parse_initialization(std::string_view text) {
  if (text == "simp-sdf") return Initialization::SimpSdf;
  if (text == "porous") return Initialization::Porous;
  throw ConfigError("unknown initialization '" + std::string(text) + "' (expected simp-sdf or porous)");
}

std::string_view initialization_name(Initialization init) {
  return init == Initialization::SimpSdf ? "simp-sdf" : "porous";
}

HandlerChoice parse_handler_choice(std::string_view text) {
  if (text == "auto") return HandlerChoice::Auto;
  if (text == "al") return HandlerChoice::AugmentedLagrangian;
  if (text == "hp") return HandlerChoice::HilbertianProjection;
  throw ConfigError("unknown constraint handler '" + std::string(text) + "' (expected auto, al or hp)");
}

std::string_view handler_choice_name(HandlerChoice choice) {
  switch (choice) {
    case HandlerChoice::Auto: return "auto";
    case HandlerChoice::AugmentedLagrangian: return "al";
    case HandlerChoice::HilbertianProjection: return "hp";
  }
  return "?";
}

double PipelineConfig::h() const {
  return benchmark == BenchmarkId::Custom ? custom_h : 2.0 / resolution.nx;
}

SimpParams PipelineConfig::simp_params() const {
  SimpParams p;
  p.penal = penal;
  p.e0 = e0;
  p.e_min = e_min;
  p.nu = nu;
  p.volfrac = volfrac;
  p.filter_radius = filter_radius_h * h();
  p.move = move;
  p.damping = damping;
  p.change_tol = change_tol;
  p.max_iters = simp_max_iters;
  return p;
}

LevelSetParams PipelineConfig::levelset_params() const {
  LevelSetParams p;
  p.e0 = e0;
  p.nu = nu;
  p.volfrac = volfrac;
  p.reg_length = reg_length_h * h();
  p.ersatz.eps0 = eps0;
  p.ersatz.eta = eta_h * h();
  EvolutionParams& e = p.evolution;
  e.gamma = gamma;
  e.gamma_min = gamma_min;
  e.n_steps = n_steps;
  e.reinit_tol = reinit_tol;
  e.reinit_max_steps = reinit_max_steps;
  e.j_tol = j_tol_h * h();
  if (initialization == Initialization::SimpSdf) e.j_tol /= sequential_j_divisor;
  e.window = window;
  e.c_tol = c_tol;
  e.max_iters = ls_max_iters;
  return p;
}

ConstraintHandler PipelineConfig::constraint_handler() const {
  HandlerChoice choice = handler;
  if (choice == HandlerChoice::Auto) {
    choice = initialization == Initialization::SimpSdf ? HandlerChoice::HilbertianProjection
                                                       : HandlerChoice::AugmentedLagrangian;
  }
  if (choice == HandlerChoice::AugmentedLagrangian) return al;
  return hp;
}

void PipelineConfig::validate() const {
  if (resolution.nx < 1 || resolution.ny < 1 || resolution.nz < 1) throw ConfigError("resolution must be positive");
  if (benchmark == BenchmarkId::Custom) {
    if (!(custom_h > 0.0)) throw ConfigError("custom element size must be > 0");
    if (custom_supports.empty() || custom_loads.empty()) {
      throw ConfigError("custom problems need at least one support and one load");
    }
  }
  if (!(iso > 0.0 && iso < 1.0)) throw ConfigError("iso threshold must lie in (0, 1)");
  if (!(sequential_j_divisor > 0.0)) throw ConfigError("sequential J_tol divisor must be > 0");
  if (!(porous_freq > 0.0)) throw ConfigError("porous frequency must be > 0");
  if (!(porous_offset >= 0.0 && porous_offset < 1.0)) throw ConfigError("porous offset must lie in [0, 1)");
  if (samples < 2) throw ConfigError("evaluation needs at least 2 samples per axis");
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  if (snapshot_period < 0) throw ConfigError("snapshot period must be >= 0");
  if (output_dir.empty()) throw ConfigError("output directory must not be empty");
  simp_params().validate();
  levelset_params().validate();
  std::visit([](const auto& hd) { hd.validate(); }, constraint_handler());
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T>
Field number(std::string section, std::string key, T PipelineConfig::*member) {
  return {std::move(section), std::move(key),
          [member](const PipelineConfig& c) {
            if constexpr (std::is_same_v<T, int>) {
              return std::to_string(c.*member);
            } else {
              return format_double(c.*member);
            }
          },
          [member](PipelineConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, int>) {
              c.*member = parse_int(v);
            } else {
              c.*member = parse_double(v);
            }
          }};
}

template <typename H, typename T>
Field handler_number(std::string section, std::string key, H PipelineConfig::*handler, T H::*member) {
  return {std::move(section), std::move(key),
          [handler, member](const PipelineConfig& c) {
            if constexpr (std::is_same_v<T, int>) {
              return std::to_string(c.*handler.*member);
            } else {
              return format_double(c.*handler.*member);
            }
          },
          [handler, member](PipelineConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, int>) {
              c.*handler.*member = parse_int(v);
            } else {
              c.*handler.*member = parse_double(v);
            }
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"problem", "benchmark", [](const PipelineConfig& c) { return std::string(benchmark_name(c.benchmark)); },
       [](PipelineConfig& c, const std::string& v) { c.benchmark = parse_benchmark_id(v); }},
      {"problem", "nx", [](const PipelineConfig& c) { return std::to_string(c.resolution.nx); },
       [](PipelineConfig& c, const std::string& v) { c.resolution.nx = parse_int(v); }},
      {"problem", "ny", [](const PipelineConfig& c) { return std::to_string(c.resolution.ny); },
       [](PipelineConfig& c, const std::string& v) { c.resolution.ny = parse_int(v); }},
      {"problem", "nz", [](const PipelineConfig& c) { return std::to_string(c.resolution.nz); },
       [](PipelineConfig& c, const std::string& v) { c.resolution.nz = parse_int(v); }},
      number("problem", "custom_h", &PipelineConfig::custom_h),
      number("material", "e0", &PipelineConfig::e0),
      number("material", "nu", &PipelineConfig::nu),
      number("simp", "penal", &PipelineConfig::penal),
      number("simp", "e_min", &PipelineConfig::e_min),
      number("simp", "volfrac", &PipelineConfig::volfrac),
      number("simp", "filter_radius_h", &PipelineConfig::filter_radius_h),
      number("simp", "move", &PipelineConfig::move),
      number("simp", "damping", &PipelineConfig::damping),
      number("simp", "change_tol", &PipelineConfig::change_tol),
      number("simp", "max_iters", &PipelineConfig::simp_max_iters),
      number("transfer", "iso", &PipelineConfig::iso),
      {"levelset", "initialization",
       [](const PipelineConfig& c) { return std::string(initialization_name(c.initialization)); },
       [](PipelineConfig& c, const std::string& v) { c.initialization = parse_initialization(v); }},
      {"levelset", "handler", [](const PipelineConfig& c) { return std::string(handler_choice_name(c.handler)); },
       [](PipelineConfig& c, const std::string& v) { c.handler = parse_handler_choice(v); }},
      number("levelset", "eps0", &PipelineConfig::eps0),
      number("levelset", "eta_h", &PipelineConfig::eta_h),
      number("levelset", "reg_length_h", &PipelineConfig::reg_length_h),
      number("levelset", "gamma", &PipelineConfig::gamma),
      number("levelset", "gamma_min", &PipelineConfig::gamma_min),
      number("levelset", "n_steps", &PipelineConfig::n_steps),
      number("levelset", "reinit_tol", &PipelineConfig::reinit_tol),
      number("levelset", "reinit_max_steps", &PipelineConfig::reinit_max_steps),
      number("levelset", "j_tol_h", &PipelineConfig::j_tol_h),
      number("levelset", "sequential_j_divisor", &PipelineConfig::sequential_j_divisor),
      number("levelset", "window", &PipelineConfig::window),
      number("levelset", "c_tol", &PipelineConfig::c_tol),
      number("levelset", "max_iters", &PipelineConfig::ls_max_iters),
      number("levelset", "porous_freq", &PipelineConfig::porous_freq),
      number("levelset", "porous_offset", &PipelineConfig::porous_offset),
      handler_number("levelset", "al_lambda", &PipelineConfig::al, &AugmentedLagrangian::lambda),
      handler_number("levelset", "al_penalty", &PipelineConfig::al, &AugmentedLagrangian::penalty),
      handler_number("levelset", "al_growth", &PipelineConfig::al, &AugmentedLagrangian::growth),
      handler_number("levelset", "al_penalty_max", &PipelineConfig::al, &AugmentedLagrangian::penalty_max),
      handler_number("levelset", "al_period", &PipelineConfig::al, &AugmentedLagrangian::period),
      handler_number("levelset", "hp_alpha_min2", &PipelineConfig::hp, &HilbertianProjection::alpha_min2),
      handler_number("levelset", "hp_beta", &PipelineConfig::hp, &HilbertianProjection::beta),
      handler_number("levelset", "hp_tau", &PipelineConfig::hp, &HilbertianProjection::tau),
      number("evaluate", "samples", &PipelineConfig::samples),
      {"output", "dir", [](const PipelineConfig& c) { return c.output_dir; },
       [](PipelineConfig& c, const std::string& v) { c.output_dir = v; }},
      number("output", "snapshot_period", &PipelineConfig::snapshot_period),
      number("output", "workers", &PipelineConfig::workers),
  };
  return f;
}

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const std::string& context) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.size() != expected) {
    throw ConfigError(context + ": expected " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

DofMask parse_mask(const std::string& text) {
  DofMask m{false, false, false};
  for (char ch : text) {
    if (ch == 'x') m.x = true;
    else if (ch == 'y') m.y = true;
    else if (ch == 'z') m.z = true;
    else throw ConfigError("invalid DOF mask '" + text + "'");
  }
  if (!m.x && !m.y && !m.z) throw ConfigError("empty DOF mask");
  return m;
}

struct ParsedRegion {
  RegionSelector selector;
  std::string payload;
};

ParsedRegion parse_region(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(trim(item));
  const std::string ctx = "region '" + text + "'";
  if (parts.size() < 3) throw ConfigError(ctx + ": expected <kind>:<face>:...:<payload>");
  const std::string& kind = parts[0];
  ParsedRegion r;
  r.payload = parts.back();
  if (kind == "face") {
    if (parts.size() != 3) throw ConfigError(ctx + ": face takes no numbers");
    r.selector = RegionSelector::whole_face(parse_face(parts[1]));
    return r;
  }
  if (parts.size() != 4) throw ConfigError(ctx + ": expected <kind>:<face>:<numbers>:<payload>");
  if (kind == "box") {
    const auto v = parse_numbers(parts[2], 6, ctx);
    r.selector = RegionSelector::box({v[0], v[1], v[2]}, {v[3], v[4], v[5]});
  } else if (kind == "disk") {
    const auto v = parse_numbers(parts[2], 4, ctx);
    r.selector = RegionSelector::disk(parse_face(parts[1]), {v[0], v[1], v[2]}, v[3]);
  } else if (kind == "strip") {
    const auto v = parse_numbers(parts[2], 3, ctx);
    r.selector = RegionSelector::strip(parse_face(parts[1]), static_cast<int>(v[0]), v[1], v[2]);
  } else {
    throw ConfigError(ctx + ": unknown region kind '" + kind + "'");
  }
  return r;
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  std::string section;
  std::stringstream ss{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      static const char* known[] = {"problem", "material", "simp", "transfer", "levelset", "evaluate", "output"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (section == "problem" && (key == "support" || key == "load")) {
        parse_region(value);  // validate syntax early
        (key == "support" ? c.custom_supports : c.custom_loads).push_back({value});
        continue;
      }
      const auto& all = fields();
      const auto it = std::find_if(all.begin(), all.end(),
                                   [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == all.end()) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
      it->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string serialize_config(const PipelineConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(config) + "\n";
    if (f.section == "problem" && f.key == "custom_h") {
      for (const auto& s : config.custom_supports) out += "support = " + s.text + "\n";
      for (const auto& l : config.custom_loads) out += "load = " + l.text + "\n";
    }
  }
  return out;
}

BenchmarkProblem build_problem(const PipelineConfig& config) {
  if (config.benchmark != BenchmarkId::Custom) return build_benchmark(config.benchmark, config.resolution);
  const Resolution& r = config.resolution;
  BenchmarkProblem p{StructuredHexMesh(r.nx, r.ny, r.nz, config.custom_h), {}, {}};
  p.bc.fixed.assign(p.mesh.dof_count(), 0);
  p.bc.load.assign(p.mesh.dof_count(), 0.0);
  for (const auto& s : config.custom_supports) {
    const ParsedRegion pr = parse_region(s.text);
    const auto nodes = select_nodes(p.mesh, pr.selector);
    if (nodes.empty()) throw ConfigError("support region '" + s.text + "' selects no nodes");
    fix_nodes(p.bc, nodes, parse_mask(pr.payload));
    p.support_nodes.insert(p.support_nodes.end(), nodes.begin(), nodes.end());
  }
  std::sort(p.support_nodes.begin(), p.support_nodes.end());
  p.support_nodes.erase(std::unique(p.support_nodes.begin(), p.support_nodes.end()), p.support_nodes.end());
  for (const auto& l : config.custom_loads) {
    const ParsedRegion pr = parse_region(l.text);
    const auto f = parse_numbers(pr.payload, 3, "load '" + l.text + "'");
    distribute_load(p.bc, select_nodes(p.mesh, pr.selector), {f[0], f[1], f[2]});
  }
  return p;
}

}  // namespace seqtopo
