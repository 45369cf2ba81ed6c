#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "capflow/flow.hpp"
#include "capflow/grid.hpp"
#include "capflow/io.hpp"
#include "capflow/mincut.hpp"
#include "capflow/oracle.hpp"
#include "capflow/stencil.hpp"

namespace capflow {

/// Invalid configuration; `key` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& msg) : std::runtime_error(key + ": " + msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Flat "section.key = value" text. '#' starts a comment; later duplicates are
/// an error.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& is) {
    KeyValueFile f;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
      }
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
      if (f.values_.count(key)) throw ConfigError(key, "given twice");
      f.values_[key] = val;
    }
    return f;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw ConfigError(key, "missing");
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    const auto v = get(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError(key, "missing");
    }
    return to_number(key, *v);
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const {
    const double x = number(key, fallback ? std::optional<double>(*fallback) : std::nullopt);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key, "expected an integer");
    return static_cast<int>(x);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(require(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_number(key, trim(item)));
    return out;
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError(key, "expected a boolean, got '" + *v + "'");
  }

  /// Keys present in the file but never queried.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) out.push_back(k);
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double to_number(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a number, got '" + v + "'");
    }
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

enum class InitKind { cap, box, mask_file };

struct RunConfig {
  HalfSpaceGrid grid;
  BetaField beta;
  SetMask initial;
  InitKind init_kind = InitKind::cap;

  double lambda = 1.0;
  int steps = 1;
  StencilKind stencil = StencilKind::diagonal;
  StepOptions step;

  std::string output_dir = "out";
  int cadence = 1;

  bool analysis = true;
  double window = 0.0;  // absolute length; 0 selects the 6h default
  std::vector<double> density_radii;
  std::optional<double> b_n;
  std::optional<double> c_iso;

  Objective objective = Objective::atw;
  bool constrained = false;  // minimize: constrained capillary instead of one step
};

namespace detail {

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  const std::filesystem::path fp(p);
  if (fp.is_absolute() || base.empty()) return fp.string();
  return (base / fp).string();
}

}  // namespace detail

/// Builds and validates a run configuration. Relative file paths are resolved
/// against `base_dir` (normally the directory of the config file). Lengths are
/// absolute unless `units = grid`, which measures them in cells.
inline RunConfig load_run_config(const KeyValueFile& kv, const std::filesystem::path& base_dir = {}) {
  RunConfig rc;
  const std::string units = kv.get("units").value_or("absolute");
  if (units != "absolute" && units != "grid") throw ConfigError("units", "expected 'absolute' or 'grid'");

  // grid
  const int d = kv.integer("grid.d", 2);
  if (d != 2 && d != 3) throw ConfigError("grid.d", "dimension must be 2 or 3");
  std::vector<int> ext;
  for (double x : kv.numbers("grid.extents")) {
    if (x != std::floor(x) || x < 1) throw ConfigError("grid.extents", "extents must be positive integers");
    ext.push_back(static_cast<int>(x));
  }
  if (static_cast<int>(ext.size()) != d) throw ConfigError("grid.extents", "expected " + std::to_string(d) + " values");
  const double h = kv.number("grid.h");
  if (!(h > 0.0)) throw ConfigError("grid.h", "spacing must be positive");
  rc.grid = HalfSpaceGrid(d, ext, h);
  const double unit = units == "grid" ? h : 1.0;

  // beta
  const double kappa = kv.number("beta.kappa", 0.25);
  if (!(kappa > 0.0 && kappa <= 0.5)) throw ConfigError("beta.kappa", "must lie in (0, 1/2]");
  const bool has_value = kv.has("beta.value"), has_csv = kv.has("beta.csv");
  if (has_value == has_csv) throw ConfigError("beta", "give exactly one of beta.value and beta.csv");
  std::vector<double> samples;
  if (has_value) {
    samples.assign(rc.grid.columns(), kv.number("beta.value"));
  } else {
    const std::string path = detail::resolve_path(kv.require("beta.csv"), base_dir);
    std::ifstream is(path);
    if (!is) throw ConfigError("beta.csv", "cannot open " + path);
    try {
      samples = read_beta_csv(is);
    } catch (const FormatError& e) {
      throw ConfigError("beta.csv", e.what());
    }
    if (samples.size() != rc.grid.columns()) {
      throw ConfigError("beta.csv", "expected " + std::to_string(rc.grid.columns()) + " samples, got " +
                                        std::to_string(samples.size()));
    }
  }
  for (double b : samples) {
    if (!(b >= -1.0 && b <= 1.0 - 2.0 * kappa)) {
      throw ConfigError("beta", "value " + std::to_string(b) + " outside [-1, 1 - 2 kappa] = [-1, " +
                                    std::to_string(1.0 - 2.0 * kappa) + "]");
    }
  }
  rc.beta = BetaField(rc.grid, samples, kappa);

  // init
  const std::string kind = kv.require("init.kind");
  const std::vector<std::string> cap_keys{"init.center", "init.radius", "init.contact_cos"};
  const std::vector<std::string> box_keys{"init.lo", "init.hi"};
  const std::vector<std::string> file_keys{"init.file"};
  auto forbid = [&](const std::vector<std::string>& keys) {
    for (const auto& k : keys) {
      if (kv.has(k)) throw ConfigError(k, "not valid with init.kind = " + kind + " (exactly one init source)");
    }
  };
  if (kind == "cap") {
    forbid(box_keys);
    forbid(file_keys);
    rc.init_kind = InitKind::cap;
    const std::vector<double> c = kv.numbers("init.center");
    if (static_cast<int>(c.size()) != d - 1) {
      throw ConfigError("init.center", "expected " + std::to_string(d - 1) + " horizontal coordinates");
    }
    Point foot{0, 0, 0};
    for (int a = 0; a < d - 1; ++a) foot[a] = c[a] * unit;
    const double r = kv.number("init.radius") * unit;
    if (!(r > 0.0)) throw ConfigError("init.radius", "must be positive");
    const double cc = kv.number("init.contact_cos", 0.0);
    if (!(cc >= -1.0 && cc <= 1.0)) throw ConfigError("init.contact_cos", "must lie in [-1, 1]");
    rc.initial = cap_mask(rc.grid, foot, r, cc);
  } else if (kind == "box") {
    forbid(cap_keys);
    forbid(file_keys);
    rc.init_kind = InitKind::box;
    const std::vector<double> lo = kv.numbers("init.lo"), hi = kv.numbers("init.hi");
    if (static_cast<int>(lo.size()) != d) throw ConfigError("init.lo", "expected " + std::to_string(d) + " cell indices");
    if (static_cast<int>(hi.size()) != d) throw ConfigError("init.hi", "expected " + std::to_string(d) + " cell indices");
    Cell l{0, 0, 0}, u{1, 1, 1};
    for (int a = 0; a < d; ++a) {
      l[a] = static_cast<int>(lo[a]);
      u[a] = static_cast<int>(hi[a]);
      if (l[a] != lo[a] || u[a] != hi[a]) throw ConfigError("init.lo", "box corners are integer cell indices");
      if (l[a] < 0 || u[a] > rc.grid.extent(a) || l[a] >= u[a]) {
        throw ConfigError("init.hi", "box [lo, hi) must be nonempty and inside the grid");
      }
    }
    rc.initial = box_mask(rc.grid, l, u);
  } else if (kind == "mask") {
    forbid(cap_keys);
    forbid(box_keys);
    rc.init_kind = InitKind::mask_file;
    const std::string path = detail::resolve_path(kv.require("init.file"), base_dir);
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("init.file", "cannot open " + path);
    try {
      rc.initial = read_pgm(is, rc.grid);
    } catch (const FormatError& e) {
      throw ConfigError("init.file", e.what());
    }
  } else {
    throw ConfigError("init.kind", "expected cap, box or mask, got '" + kind + "'");
  }

  // flow
  const bool has_dt = kv.has("flow.dt"), has_lambda = kv.has("flow.lambda");
  if (has_dt == has_lambda) throw ConfigError("flow", "give exactly one of flow.dt and flow.lambda");
  if (has_dt) {
    const double dt = kv.number("flow.dt");
    if (!(dt > 0.0)) throw ConfigError("flow.dt", "must be positive");
    rc.lambda = FlowConfig::lambda_from_dt(dt);
  } else {
    rc.lambda = kv.number("flow.lambda");
  }
  if (!(rc.lambda >= 1.0)) throw ConfigError(has_dt ? "flow.dt" : "flow.lambda", "lambda = 1/dt must be >= 1");
  rc.steps = kv.integer("flow.steps", 1);
  if (rc.steps < 1) throw ConfigError("flow.steps", "must be >= 1");
  try {
    rc.step.solver = parse_solver(kv.get("flow.solver").value_or("mincut"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("flow.solver", e.what());
  }
  try {
    rc.step.selection = parse_selection(kv.get("flow.selection").value_or("minimal"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("flow.selection", e.what());
  }
  try {
    rc.stencil = parse_stencil_kind(kv.get("flow.stencil").value_or("diagonal"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("flow.stencil", e.what());
  }
  rc.step.relax.tol = kv.number("flow.relax_tol", 1e-8);
  if (!(rc.step.relax.tol > 0.0)) throw ConfigError("flow.relax_tol", "must be positive");
  rc.step.relax.max_iter = static_cast<std::size_t>(kv.integer("flow.relax_max_iter", 200000));
  rc.step.relax.isotropic = kv.flag("flow.relax_isotropic", false);

  // output
  rc.output_dir = detail::resolve_path(kv.get("output.dir").value_or("out"), {});
  rc.cadence = kv.integer("output.cadence", 1);
  if (rc.cadence < 1) throw ConfigError("output.cadence", "must be >= 1");

  // analysis
  rc.analysis = kv.flag("analysis.enabled", true);
  rc.window = kv.number("analysis.window", 6.0 * h / unit) * unit;
  if (!(rc.window >= 3.0 * h)) throw ConfigError("analysis.window", "must be at least 3 cells");
  if (kv.has("analysis.density_radii")) {
    for (double r : kv.numbers("analysis.density_radii")) {
      if (!(r * unit >= 2.0 * h)) throw ConfigError("analysis.density_radii", "radii must be at least 2 cells");
      rc.density_radii.push_back(r * unit);
    }
  } else {
    rc.density_radii = {2.0 * h, 4.0 * h};
  }
  if (kv.has("analysis.b_n")) {
    rc.b_n = kv.number("analysis.b_n");
    if (!(*rc.b_n > 0.0)) throw ConfigError("analysis.b_n", "must be positive");
  }
  if (kv.has("analysis.c_iso")) {
    rc.c_iso = kv.number("analysis.c_iso");
    if (!(*rc.c_iso > 0.0)) throw ConfigError("analysis.c_iso", "must be positive");
  }

  // oracle / minimize
  try {
    rc.objective = parse_objective(kv.get("oracle.objective").value_or("atw"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("oracle.objective", e.what());
  }
  rc.constrained = kv.flag("minimize.constrained", false);

  for (const auto& k : kv.unused()) throw ConfigError(k, "unknown key");
  return rc;
}

inline RunConfig load_run_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config", "cannot open " + path);
  const KeyValueFile kv = KeyValueFile::parse(is);
  return load_run_config(kv, std::filesystem::path(path).parent_path());
}

inline FlowConfig flow_config(const RunConfig& rc) {
  FlowConfig fc;
  fc.lambda = rc.lambda;
  fc.steps = rc.steps;
  fc.step = rc.step;
  fc.stencil = rc.stencil;
  fc.beta = rc.beta;
  fc.initial = rc.initial;
  return fc;
}

}  // namespace capflow
