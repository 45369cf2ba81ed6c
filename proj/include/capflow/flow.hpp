#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "capflow/distance.hpp"
#include "capflow/energy.hpp"
#include "capflow/grid.hpp"
#include "capflow/mincut.hpp"
#include "capflow/relax.hpp"
#include "capflow/stencil.hpp"

namespace capflow {

enum class Solver { mincut, relax };

inline const char* to_string(Solver s) { return s == Solver::mincut ? "mincut" : "relax"; }

inline Solver parse_solver(const std::string& s) {
  if (s == "mincut") return Solver::mincut;
  if (s == "relax") return Solver::relax;
  throw std::invalid_argument("unknown solver '" + s + "'");
}

struct StepOptions {
  Solver solver = Solver::mincut;
  Selection selection = Selection::minimal;
  RelaxOptions relax;
};

/// One implicit step: a minimizer of atw(., prev, beta, lambda). The empty set
/// is a fixed point. For the relax solver the 1/2-superlevel set of the
/// relaxed minimizer is returned (selection does not apply).
inline SetMask gmm_step(const SetMask& prev, const BetaField& beta, double lambda, const Stencil& st,
                        const StepOptions& opt = {}, const ScalarField* dist = nullptr) {
  if (lambda < 1.0) throw std::invalid_argument("gmm_step: lambda must be >= 1");
  if (prev.empty()) return prev;
  std::optional<ScalarField> own;
  if (!dist) {
    own = signed_distance(prev);
    dist = &*own;
  }
  SetMask next;
  if (opt.solver == Solver::mincut) {
    BuildOptions bo;
    bo.dist = dist;
    next = solve_min_cut(build_graph(prev, beta, lambda, st, bo), opt.selection).mask;
  } else {
    const RelaxSolution sol = minimize_levelset(prev, beta, lambda, st, opt.relax);
    if (!sol.converged) {
      throw std::runtime_error("gmm_step: relax solver stopped at gap " + std::to_string(sol.gap) + " after " +
                               std::to_string(sol.iterations) + " iterations");
    }
    next = threshold(sol.u, 0.5);
  }
  // The previous set has energy capillary(prev); a candidate above it can only
  // come from round-off in near-ties.
  const double e_next = atw(next, prev, beta, lambda, st, *dist).atw_total;
  const double e_prev = capillary(prev, beta, st).capillary_total;
  if (e_next > e_prev) return prev;
  return next;
}

struct StepMetrics {
  double volume = 0.0;
  double perimeter_in_omega = 0.0;
  double trace_term = 0.0;
  double capillary_total = 0.0;
  double fidelity = 0.0;  // lambda * sum over the symmetric difference of |d_prev| h^d
  double sym_diff_prev = 0.0;
  double max_dist_on_symdiff = 0.0;
  double dissipation_cum = 0.0;
  double wetted = 0.0;  // footprint measure on the plane
};

struct Frame {
  int k = 0;
  double t = 0.0;
  SetMask mask;
  StepMetrics metrics;
};

struct Trajectory {
  double lambda = 1.0;
  StencilKind stencil = StencilKind::axis;
  double full_perimeter0 = 0.0;  // perimeter of E_0 in the whole space
  std::vector<Frame> frames;     // frames[0] is E_0
};

struct FlowConfig {
  double lambda = 1.0;
  int steps = 1;
  StepOptions step;
  StencilKind stencil = StencilKind::diagonal;
  BetaField beta;
  SetMask initial;

  static double lambda_from_dt(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("flow: time step must be positive");
    return 1.0 / dt;
  }
};

inline StepMetrics measure(const SetMask& mask, const BetaField& beta, const Stencil& st) {
  StepMetrics m;
  const EnergyBreakdown e = capillary(mask, beta, st);
  m.volume = mask.volume();
  m.perimeter_in_omega = e.perimeter_in_omega;
  m.trace_term = e.trace_term;
  m.capillary_total = e.capillary_total;
  m.wetted = static_cast<double>(mask.wetted_cells()) * mask.grid().face_area();
  return m;
}

/// Iterated minimization E(k) = argmin atw(., E(k-1), beta, lambda), t = k / lambda.
inline Trajectory evolve(const FlowConfig& cfg) {
  if (cfg.lambda < 1.0) throw std::invalid_argument("evolve: lambda must be >= 1");
  if (cfg.steps < 1) throw std::invalid_argument("evolve: steps must be >= 1");
  require_same_grid(cfg.initial.grid(), cfg.beta.grid(), "evolve");
  const Stencil st = make_stencil(cfg.stencil, cfg.initial.grid());
  Trajectory tr;
  tr.lambda = cfg.lambda;
  tr.stencil = cfg.stencil;
  tr.full_perimeter0 = full_perimeter(cfg.initial, st);
  tr.frames.push_back({0, 0.0, cfg.initial, measure(cfg.initial, cfg.beta, st)});
  double cum = 0.0;
  for (int k = 1; k <= cfg.steps; ++k) {
    const SetMask& prev = tr.frames.back().mask;
    Frame f;
    f.k = k;
    f.t = static_cast<double>(k) / cfg.lambda;
    if (prev.empty()) {
      f.mask = prev;
      f.metrics.dissipation_cum = cum;
      tr.frames.push_back(std::move(f));
      continue;
    }
    const ScalarField dist = signed_distance(prev);
    f.mask = gmm_step(prev, cfg.beta, cfg.lambda, st, cfg.step, &dist);
    f.metrics = measure(f.mask, cfg.beta, st);
    f.metrics.fidelity = atw(f.mask, prev, cfg.beta, cfg.lambda, st, dist).fidelity_term;
    f.metrics.sym_diff_prev = sym_diff_volume(f.mask, prev);
    double dmax = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (f.mask[i] != prev[i]) dmax = std::max(dmax, std::abs(dist[i]));
    }
    f.metrics.max_dist_on_symdiff = dmax;
    cum += f.metrics.fidelity;
    f.metrics.dissipation_cum = cum;
    tr.frames.push_back(std::move(f));
  }
  return tr;
}

inline void write_metrics_csv(std::ostream& os, const Trajectory& tr) {
  os << "k,t,volume,perimeter_in_omega,trace_term,capillary_total,fidelity,sym_diff_prev,max_dist_on_symdiff,"
        "dissipation_cum\n";
  os.precision(17);
  for (const Frame& f : tr.frames) {
    const StepMetrics& m = f.metrics;
    os << f.k << ',' << f.t << ',' << m.volume << ',' << m.perimeter_in_omega << ',' << m.trace_term << ','
       << m.capillary_total << ',' << m.fidelity << ',' << m.sym_diff_prev << ',' << m.max_dist_on_symdiff << ','
       << m.dissipation_cum << '\n';
  }
}

/// Minimizer of the capillary energy among supersets of e0.
inline SetMask constrained_capillary_minimizer(const SetMask& e0, const BetaField& beta, const Stencil& st,
                                               Selection sel = Selection::minimal) {
  if (e0.empty()) throw std::invalid_argument("constrained_capillary_minimizer: e0 must be nonempty");
  BuildOptions bo;
  bo.must_include = &e0;
  return solve_min_cut(build_graph(e0, beta, 0.0, st, bo), sel).mask;
}

/// Radius of the cylinder guaranteed to contain every minimizer:
/// D + 1 + max{8^{n^2+n+1} (P/kappa)^{(n+1)/n}, 4 mu},  mu = (1/kappa + 2)^{(n+1)/n}.
inline double domain_bound_R0(double perimeter_e0, double kappa, int n, double horizontal_radius) {
  if (!(kappa > 0.0 && kappa <= 0.5)) throw std::invalid_argument("domain_bound_R0: kappa must lie in (0, 1/2]");
  if (n < 1) throw std::invalid_argument("domain_bound_R0: n must be >= 1");
  if (perimeter_e0 < 0.0 || horizontal_radius < 0.0) throw std::invalid_argument("domain_bound_R0: negative input");
  const double ex = static_cast<double>(n + 1) / n;
  const double mu = std::pow(1.0 / kappa + 2.0, ex);
  const double big = std::pow(8.0, n * n + n + 1) * std::pow(perimeter_e0 / kappa, ex);
  return horizontal_radius + 1.0 + std::max(big, 4.0 * mu);
}

/// Radius of the smallest vertical cylinder around the horizontal bounding-box
/// center that contains the set.
inline double horizontal_radius(const SetMask& m) {
  const HalfSpaceGrid& g = m.grid();
  const int v = g.vertical_axis();
  Point lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  bool any = false;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    any = true;
    const Cell c = g.cell(i);
    for (int a = 0; a < v; ++a) {
      lo[a] = std::min(lo[a], c[a] * g.spacing());
      hi[a] = std::max(hi[a], (c[a] + 1) * g.spacing());
    }
  }
  if (!any) return 0.0;
  double r2 = 0.0;
  for (int a = 0; a < v; ++a) r2 += 0.25 * (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(r2);
}

struct DomainReport {
  double R0 = 0.0;
  double box_half_width = 0.0;
  bool box_smaller_than_R0 = true;
};

inline DomainReport domain_report(const SetMask& e0, double kappa, const Stencil& st) {
  const HalfSpaceGrid& g = e0.grid();
  DomainReport r;
  r.R0 = domain_bound_R0(full_perimeter(e0, st), kappa, g.dim() - 1, horizontal_radius(e0));
  double hw2 = 0.0;
  for (int a = 0; a < g.vertical_axis(); ++a) hw2 += 0.25 * std::pow(g.extent(a) * g.spacing(), 2);
  r.box_half_width = std::sqrt(hw2);
  r.box_smaller_than_R0 = r.box_half_width < r.R0;
  return r;
}

}  // namespace capflow
