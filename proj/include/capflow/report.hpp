#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "capflow/analysis.hpp"
#include "capflow/energy.hpp"
#include "capflow/flow.hpp"

namespace capflow {

/// Metrics of a stored frame sequence (frames[0] = E_0), recomputed exactly as
/// evolve() records them.
inline Trajectory rebuild_trajectory(const std::vector<SetMask>& masks, const BetaField& beta, double lambda,
                                     StencilKind kind, const std::vector<int>& steps = {}) {
  if (masks.empty()) throw std::invalid_argument("rebuild_trajectory: no frames");
  const Stencil st = make_stencil(kind, masks[0].grid());
  Trajectory tr;
  tr.lambda = lambda;
  tr.stencil = kind;
  tr.full_perimeter0 = full_perimeter(masks[0], st);
  double cum = 0.0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const int k = steps.empty() ? static_cast<int>(i) : steps[i];
    Frame f{k, k / lambda, masks[i], measure(masks[i], beta, st)};
    if (i > 0 && !masks[i - 1].empty()) {
      const ScalarField dist = signed_distance(masks[i - 1]);
      f.metrics.fidelity = atw(masks[i], masks[i - 1], beta, lambda, st, dist).fidelity_term;
      f.metrics.sym_diff_prev = sym_diff_volume(masks[i], masks[i - 1]);
      double dmax = 0.0;
      for (std::size_t c = 0; c < masks[i].size(); ++c) {
        if (masks[i][c] != masks[i - 1][c]) dmax = std::max(dmax, std::abs(dist[c]));
      }
      f.metrics.max_dist_on_symdiff = dmax;
    }
    cum += f.metrics.fidelity;
    f.metrics.dissipation_cum = cum;
    tr.frames.push_back(std::move(f));
  }
  return tr;
}

struct AnalysisOptions {
  double kappa = 0.5;
  std::optional<double> b_n;
  std::optional<double> c_iso;
  double window = 0.0;  // 0 selects 6h
  std::vector<double> density_radii;
};

/// Everything written to analysis.json for one trajectory. Continuum constants
/// are reported next to the measured quantities; nothing here decides pass/fail.
inline nlohmann::json analysis_report(const Trajectory& tr, const BetaField& beta, const AnalysisOptions& opt) {
  using nlohmann::json;
  const HalfSpaceGrid& g = tr.frames.at(0).mask.grid();
  const int n = g.dim() - 1;
  const double h = g.spacing();
  const double window = opt.window > 0.0 ? opt.window : 6.0 * h;
  const double b_n = opt.b_n.value_or(default_besicovitch(n));
  const double c_iso = opt.c_iso.value_or(default_isoperimetric(n));
  const TheoryConstants k = constants(n, opt.kappa, b_n, c_iso);
  const Stencil st = make_stencil(tr.stencil, g);
  const double P0 = tr.full_perimeter0;

  json out;
  out["constants"] = to_json(k);
  out["constants"]["defaults"] = {{"b_n", !opt.b_n.has_value()}, {"c_iso", !opt.c_iso.has_value()}};
  out["lambda"] = tr.lambda;
  out["steps"] = tr.frames.size() - 1;
  out["stencil"] = to_string(tr.stencil);
  out["full_perimeter0"] = P0;

  if (!tr.frames[0].mask.empty()) {
    const DomainReport dr = domain_report(tr.frames[0].mask, opt.kappa, st);
    out["domain"] = {{"R0", dr.R0}, {"box_half_width", dr.box_half_width},
                     {"box_smaller_than_R0", dr.box_smaller_than_R0}};
  }

  const double holder = tr.frames.size() >= 2 ? holder_modulus(tr) : 0.0;
  out["holder"] = {{"modulus", holder}, {"theta", k.theta}, {"ratio_to_theta", holder / k.theta}};

  const std::vector<double> linf = linfty_per_step(tr);
  double linf_max = 0.0;
  for (double x : linf) linf_max = std::max(linf_max, x);
  out["linfty"] = {{"per_step", linf},
                   {"max", linf_max},
                   {"sqrt_lambda_max", std::sqrt(tr.lambda) * linf_max},
                   {"R", k.R}};

  out["dissipation"] = to_json(dissipation_ledger(tr));

  // Velocity ledger: sum_k dt * sum v^2 h^{d-1}, against alpha * P(E_0).
  double l2 = 0.0, rel_dev_sum = 0.0;
  std::size_t rel_dev_steps = 0;
  json per_step = json::array();
  for (std::size_t i = 1; i < tr.frames.size(); ++i) {
    if (tr.frames[i].mask.empty() || tr.frames[i - 1].mask.empty()) continue;
    const VelocityReport vr = velocity_curvature_report(tr.frames[i - 1].mask, tr.frames[i].mask, tr.lambda, window);
    l2 += vr.dissipation / tr.lambda;
    per_step.push_back({{"k", tr.frames[i].k},
                        {"dissipation", vr.dissipation},
                        {"median_relative_deviation", vr.median_relative_deviation},
                        {"median_abs_velocity", vr.median_abs_velocity},
                        {"median_abs_curvature", vr.median_abs_curvature},
                        {"flagged", vr.flagged}});
    rel_dev_sum += vr.median_relative_deviation;
    ++rel_dev_steps;
  }
  out["velocity"] = {{"l2_ledger", l2},
                     {"alpha_times_P0", k.alpha * P0},
                     {"mean_median_relative_deviation", rel_dev_steps ? rel_dev_sum / rel_dev_steps : 0.0},
                     {"per_step", per_step}};

  // Contact angle over all nonempty frames touching the plane.
  double csum = 0.0, bsum = 0.0;
  std::size_t cframes = 0, flagged = 0;
  for (const Frame& f : tr.frames) {
    if (f.mask.wetted_cells() == 0) continue;
    const ContactProfile p = contact_angle_profile(f.mask, beta, std::max(window, 3.0 * h));
    flagged += p.flagged;
    if (p.ok == 0) continue;
    csum += p.mean_cosine;
    bsum += p.mean_beta;
    ++cframes;
  }
  out["contact_angle"] = {{"frames", cframes},
                          {"mean_cosine", cframes ? csum / cframes : 0.0},
                          {"mean_beta", cframes ? bsum / cframes : 0.0},
                          {"flagged_samples", flagged}};

  // Density extremes over all nonempty frames.
  std::vector<double> radii = opt.density_radii;
  if (radii.empty()) radii = {2.0 * h, 4.0 * h};
  json dens = json::array();
  for (double r : radii) {
    double lo = 1.0, hi = 0.0;
    bool any = false;
    for (const Frame& f : tr.frames) {
      if (f.mask.empty()) continue;
      const DensityRow row = density_report(f.mask, {r}).front();
      if (row.centers == 0) continue;
      any = true;
      lo = std::min(lo, row.min_fraction);
      hi = std::max(hi, row.max_fraction);
    }
    dens.push_back({{"r", r},
                    {"min_fraction", any ? lo : 0.0},
                    {"max_fraction", any ? hi : 0.0},
                    {"lower_bound", std::pow(opt.kappa / 4.0, n + 1)},
                    {"gamma_over_sqrt_lambda", k.gamma / std::sqrt(tr.lambda)}});
  }
  out["density"] = dens;

  json trace = json::array();
  for (const Frame& f : tr.frames) trace.push_back(trace_perimeter(f.mask));
  out["trace_perimeter"] = trace;
  return out;
}

}  // namespace capflow
