// capflow command line: evolve, minimize, oracle-compare, analyze.
//
// Exit status: 0 success, 1 oracle comparison FAIL or solver failure,
// 2 invalid configuration or input, 3 I/O failure while writing results.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "capflow/capflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace capflow;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;

std::string frame_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05d.pgm", k);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::ios_base::failure("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::ios_base::failure("write failed: " + path);
}

AnalysisOptions analysis_options(const RunConfig& rc) {
  AnalysisOptions o;
  o.kappa = rc.beta.kappa();
  o.b_n = rc.b_n;
  o.c_iso = rc.c_iso;
  o.window = rc.window;
  o.density_radii = rc.density_radii;
  return o;
}

int run_evolve(const std::string& config, const std::string& out_override) {
  RunConfig rc = load_run_config_file(config);
  if (!out_override.empty()) rc.output_dir = out_override;
  const Trajectory tr = evolve(flow_config(rc));

  ensure_dir(rc.output_dir);
  const fs::path dir(rc.output_dir);
  save_pgm((dir / "initial.pgm").string(), tr.frames.front().mask);
  for (const Frame& f : tr.frames) {
    if (f.k == 0) continue;
    if (f.k % rc.cadence == 0 || f.k == rc.steps) save_pgm((dir / frame_name(f.k)).string(), f.mask);
  }
  std::ostringstream metrics;
  write_metrics_csv(metrics, tr);
  write_text((dir / "metrics.csv").string(), metrics.str());

  if (rc.analysis) {
    const json rep = analysis_report(tr, rc.beta, analysis_options(rc));
    write_text((dir / "analysis.json").string(), rep.dump(2) + "\n");
    // Per-sample diagnostics of the last nonempty frame.
    std::size_t last = 0;
    for (std::size_t i = 0; i < tr.frames.size(); ++i) {
      if (!tr.frames[i].mask.empty()) last = i;
    }
    const double window = rc.window > 0.0 ? rc.window : 6.0 * rc.grid.spacing();
    std::ostringstream contact;
    write_contact_csv(contact, contact_angle_profile(tr.frames[last].mask, rc.beta, window));
    write_text((dir / "contact_angle.csv").string(), contact.str());
    if (last > 0) {
      std::ostringstream vel;
      write_velocity_csv(vel, velocity_curvature_report(tr.frames[last - 1].mask, tr.frames[last].mask, rc.lambda,
                                                        window));
      write_text((dir / "velocity.csv").string(), vel.str());
    }
  }
  std::cout << "evolve: " << rc.steps << " steps, final volume " << tr.frames.back().metrics.volume << ", output in "
            << rc.output_dir << "\n";
  return 0;
}

int run_minimize(const std::string& config, bool constrained_flag, const std::string& out_path,
                 const std::string& dimacs) {
  const RunConfig rc = load_run_config_file(config);
  const bool constrained = constrained_flag || rc.constrained;
  const Stencil st = make_stencil(rc.stencil, rc.grid);
  if (rc.initial.empty() && constrained) throw ConfigError("init", "constrained minimization needs a nonempty E_0");

  EnergyGraph g;
  if (constrained) {
    BuildOptions bo;
    bo.must_include = &rc.initial;
    g = build_graph(rc.initial, rc.beta, 0.0, st, bo);
  } else {
    g = build_graph(rc.initial, rc.beta, rc.lambda, st);
  }
  if (!dimacs.empty()) {
    std::ofstream os(dimacs);
    if (!os) throw std::ios_base::failure("cannot open " + dimacs + " for writing");
    write_dimacs(os, g);
    if (!os) throw std::ios_base::failure("write failed: " + dimacs);
  }
  SetMask result;
  if (constrained) {
    result = constrained_capillary_minimizer(rc.initial, rc.beta, st, rc.step.selection);
  } else {
    result = gmm_step(rc.initial, rc.beta, rc.lambda, st, rc.step);
  }
  const std::string path = out_path.empty() ? (fs::path(rc.output_dir) / "minimizer.pgm").string() : out_path;
  if (fs::path(path).has_parent_path()) ensure_dir(fs::path(path).parent_path().string());
  save_pgm(path, result);

  json out;
  out["mode"] = constrained ? "constrained-capillary" : "atw-step";
  if (constrained) {
    out["energy"] = to_json(capillary(result, rc.beta, st));
  } else {
    out["energy"] = to_json(atw(result, rc.initial, rc.beta, rc.lambda, st, signed_distance(rc.initial)));
  }
  out["volume"] = result.volume();
  out["initial_volume"] = rc.initial.volume();
  out["subset_of_initial"] = result.subset_of(rc.initial);
  out["superset_of_initial"] = rc.initial.subset_of(result);
  out["output"] = path;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_oracle_compare(const std::string& config, bool corrupt, const std::string& json_path) {
  const RunConfig rc = load_run_config_file(config);
  if (rc.grid.size() > kOracleMaxCells) {
    throw ConfigError("grid.extents", std::to_string(rc.grid.size()) + " cells exceed the oracle cap of " +
                                          std::to_string(kOracleMaxCells));
  }
  const Stencil st = make_stencil(rc.stencil, rc.grid);
  const Objective obj = rc.objective;
  const double lambda = obj == Objective::atw ? rc.lambda : 0.0;
  const OracleReport orc = enumerate(rc.initial, rc.beta, rc.lambda, st, obj);
  const ScalarField dist = signed_distance(rc.initial);

  BuildOptions bo;
  bo.corrupt_unary_sign = corrupt;
  if (obj == Objective::constrained_capillary) bo.must_include = &rc.initial;
  bo.dist = lambda > 0.0 ? &dist : nullptr;

  json out;
  out["objective"] = to_string(obj);
  out["cells"] = rc.grid.size();
  out["oracle"] = to_json(orc);

  bool pass = true;
  std::vector<std::string> reasons;
  if (obj == Objective::atw && rc.initial.empty()) {
    // The empty set is the unique minimizer; no graph is built.
    out["mincut"] = {{"energy", 0.0}, {"note", "empty E_0 maps to the empty set"}};
  } else {
    const EnergyGraph g = build_graph(rc.initial, rc.beta, lambda, st, bo);
    const CutResult cut = solve_min_cut(g, Selection::minimal);
    const double e_min = oracle_energy(cut.minimal, rc.initial, rc.beta, rc.lambda, st, dist, obj);
    const double e_max = oracle_energy(cut.maximal, rc.initial, rc.beta, rc.lambda, st, dist, obj);
    out["mincut"] = {{"energy_minimal", e_min},
                     {"energy_maximal", e_max},
                     {"graph_energy", cut.energy()},
                     {"minimal", mask_bits(cut.minimal)},
                     {"maximal", mask_bits(cut.maximal)}};
    if (e_min != orc.minimum || e_max != orc.minimum) {
      pass = false;
      reasons.push_back("energy mismatch: mincut " + std::to_string(e_min) + " vs oracle " +
                        std::to_string(orc.minimum));
    }
    if (!(cut.minimal == orc.lattice_min) || !(cut.maximal == orc.lattice_max)) {
      pass = false;
      reasons.push_back("minimizer lattice mismatch");
    }

    RelaxOptions ro;
    ro.tol = rc.step.relax.tol;
    ro.max_iter = rc.step.relax.max_iter;
    const RelaxSolution rs = solve_linear_tv(linear_tv_from_graph(g), ScalarField::indicator(rc.initial), ro);
    const double slack = 1e-12 * (1.0 + std::abs(orc.minimum));
    const bool within = rs.converged && rs.energy() >= orc.minimum - slack &&
                        rs.energy() <= orc.minimum + rs.gap + slack;
    out["relax"] = {{"energy", rs.energy()},
                    {"gap", rs.gap},
                    {"iterations", rs.iterations},
                    {"converged", rs.converged},
                    {"within_gap", within}};
    if (!within) {
      pass = false;
      reasons.push_back("relax energy " + std::to_string(rs.energy()) + " not within gap " +
                        std::to_string(rs.gap) + " of oracle minimum");
    }
  }
  out["pass"] = pass;
  out["reasons"] = reasons;
  const std::string text = out.dump(2) + "\n";
  if (!json_path.empty()) write_text(json_path, text);
  std::cout << text << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : kExitFail;
}

int run_analyze(const std::string& config, const std::string& frames_dir, const std::string& out_path) {
  const RunConfig rc = load_run_config_file(config);
  const fs::path dir(frames_dir);
  if (!fs::is_directory(dir)) throw ConfigError("--frames", "not a directory: " + frames_dir);
  std::vector<int> steps{0};
  std::vector<SetMask> masks;
  try {
    masks.push_back(load_pgm((dir / "initial.pgm").string(), rc.grid));
  } catch (const std::ios_base::failure& e) {
    throw ConfigError("--frames", e.what());
  }
  const std::regex pattern("frame_(\\d+)\\.pgm");
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.push_back({std::stoi(m[1]), entry.path()});
  }
  std::sort(files.begin(), files.end());
  for (const auto& [k, p] : files) {
    steps.push_back(k);
    masks.push_back(load_pgm(p.string(), rc.grid));
  }
  if (masks.size() < 2) throw ConfigError("--frames", "need initial.pgm and at least one frame");
  const Trajectory tr = rebuild_trajectory(masks, rc.beta, rc.lambda, rc.stencil, steps);
  const json rep = analysis_report(tr, rc.beta, analysis_options(rc));
  const std::string target = out_path.empty() ? (dir / "analysis.json").string() : out_path;
  write_text(target, rep.dump(2) + "\n");
  std::cout << "analyze: " << masks.size() << " frames, report in " << target << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capflow: minimizing movements for capillary mean curvature flow on a half-space grid"};
  app.require_subcommand(1);

  std::string config, out, dimacs, json_path, frames;
  bool constrained = false, corrupt = false;

  auto* evolve_cmd = app.add_subcommand("evolve", "run the implicit time stepping and write frames and reports");
  evolve_cmd->add_option("config", config, "run configuration")->required();
  evolve_cmd->add_option("--out", out, "output directory (overrides output.dir)");

  auto* min_cmd = app.add_subcommand("minimize", "one implicit step, or the constrained capillary minimizer");
  min_cmd->add_option("config", config, "run configuration")->required();
  min_cmd->add_flag("--constrained", constrained, "minimize the capillary energy among supersets of E_0");
  min_cmd->add_option("--out", out, "PGM file for the minimizer");
  min_cmd->add_option("--dump-dimacs", dimacs, "write the flow network in DIMACS format");

  auto* oracle_cmd = app.add_subcommand("oracle-compare", "compare mincut and relax with exhaustive enumeration");
  oracle_cmd->add_option("config", config, "run configuration (at most 22 cells)")->required();
  oracle_cmd->add_flag("--corrupt-unary-sign", corrupt, "debug: flip the fidelity sign in the graph");
  oracle_cmd->add_option("--json", json_path, "also write the report to this file");

  auto* analyze_cmd = app.add_subcommand("analyze", "recompute diagnostics from stored frames");
  analyze_cmd->add_option("config", config, "run configuration used for the frames")->required();
  analyze_cmd->add_option("--frames", frames, "directory with initial.pgm and frame_*.pgm")->required();
  analyze_cmd->add_option("--out", out, "report path (default: <frames>/analysis.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*evolve_cmd) return run_evolve(config, out);
    if (*min_cmd) return run_minimize(config, constrained, out, dimacs);
    if (*oracle_cmd) return run_oracle_compare(config, corrupt, json_path);
    if (*analyze_cmd) return run_analyze(config, frames, out);
  } catch (const ConfigError& e) {
    std::cerr << "capflow: invalid configuration: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const FormatError& e) {
    std::cerr << "capflow: invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "capflow: i/o failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "capflow: invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "capflow: " << e.what() << "\n";
    return kExitFail;
  }
  return 0;
}
