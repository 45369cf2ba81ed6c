#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "capflow/distance.hpp"
#include "capflow/grid.hpp"
#include "capflow/mincut.hpp"
#include "capflow/stencil.hpp"
#include "capflow/summation.hpp"

namespace capflow {

/// min over u in [lo, hi]^cells of  sum_b radius_b |(K u)_b|_2 + <unary, u> + constant,
/// where each row of K is u[plus] - u[minus] (index -1 reads as 0) and rows
/// are grouped into blocks. Blocks of size one give the anisotropic total
/// variation; blocks of size d give the isotropic one.
struct LinearTvProblem {
  HalfSpaceGrid grid;
  struct Row {
    int plus;
    int minus;
  };
  struct Block {
    std::size_t first;
    std::size_t count;
    double radius;
  };
  std::vector<Row> rows;
  std::vector<Block> blocks;
  std::vector<double> unary;
  std::vector<double> lo;
  std::vector<double> hi;
  double constant = 0.0;

  std::size_t cells() const { return unary.size(); }

  double row_value(const Row& r, std::span<const double> u) const {
    return (r.plus >= 0 ? u[r.plus] : 0.0) - (r.minus >= 0 ? u[r.minus] : 0.0);
  }

  /// Objective without the constant.
  double primal(std::span<const double> u) const {
    TermSum sum;
    for (const Block& b : blocks) {
      double s2 = 0.0;
      for (std::size_t k = b.first; k < b.first + b.count; ++k) {
        const double x = row_value(rows[k], u);
        s2 += x * x;
      }
      sum.add(b.radius * std::sqrt(s2));
    }
    for (std::size_t c = 0; c < cells(); ++c) sum.add(unary[c] * u[c]);
    return sum.total();
  }
};

inline LinearTvProblem linear_tv_from_graph(const EnergyGraph& g) {
  LinearTvProblem p;
  p.grid = g.grid;
  p.unary = g.unary;
  p.constant = g.constant;
  p.lo.assign(g.cells(), 0.0);
  p.hi.assign(g.cells(), 1.0);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    if (g.must_include[c]) p.lo[c] = 1.0;
    if (g.must_exclude[c]) {
      p.hi[c] = 0.0;
      p.unary[c] = 0.0;
    }
  }
  for (const auto& pr : g.pairs) {
    p.blocks.push_back({p.rows.size(), 1, pr.w});
    p.rows.push_back({static_cast<int>(pr.u), static_cast<int>(pr.v)});
  }
  return p;
}

/// Isotropic variant (experimental): forward differences per cell with zero
/// extension outside the box, |grad u| weighted by h^{d-1}; the walls facing
/// the backward directions contribute linearly. No exactness claims.
inline LinearTvProblem isotropic_problem(const SetMask& prev, const BetaField& beta, double lambda) {
  const HalfSpaceGrid& g = prev.grid();
  LinearTvProblem p;
  p.grid = g;
  p.unary.assign(g.size(), 0.0);
  p.lo.assign(g.size(), 0.0);
  p.hi.assign(g.size(), 1.0);
  const double area = g.face_area();
  const double vol = g.cell_volume();
  const int v = g.vertical_axis();
  std::optional<ScalarField> dist;
  if (lambda > 0.0) dist = signed_distance(prev);
  TermSum constant;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Cell c = g.cell(i);
    if (dist) {
      const double d = (*dist)[i];
      if (std::isinf(d)) {
        p.hi[i] = 0.0;
      } else {
        p.unary[i] += lambda * d * vol;
        if (prev[i]) constant.add(-lambda * d * vol);
      }
    }
    if (g.on_bottom_row(i)) p.unary[i] -= beta[g.column_of(i)] * area;
    const std::size_t first = p.rows.size();
    for (int a = 0; a < g.dim(); ++a) {
      Cell n = c;
      n[a] += 1;
      p.rows.push_back({g.contains(n) ? static_cast<int>(g.index(n)) : -1, static_cast<int>(i)});
      if (a != v && c[a] == 0) p.unary[i] += area;
    }
    p.blocks.push_back({first, static_cast<std::size_t>(g.dim()), area});
  }
  p.constant = constant.total();
  return p;
}

struct RelaxTracePoint {
  std::size_t iteration;
  double primal;
  double gap;
};

struct RelaxSolution {
  ScalarField u;
  double primal = 0.0;  // level-set energy (without the constant)
  double offset = 0.0;  // constant turning primal into the binary-energy scale
  double gap = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<RelaxTracePoint> trace;

  double energy() const { return primal + offset; }
};

struct RelaxOptions {
  double tol = 1e-8;
  std::size_t max_iter = 200000;
  std::size_t check_every = 25;
  bool isotropic = false;
  bool record_trace = false;
};

/// First-order primal-dual splitting with fixed steps tau * sigma * L^2 <= 1,
/// over-relaxation 1, warm-started at `init`. Stops once the duality gap of
/// the Lagrangian pair is below tol.
inline RelaxSolution solve_linear_tv(const LinearTvProblem& p, const ScalarField& init, const RelaxOptions& opt) {
  const std::size_t n = p.cells();
  const std::size_t m = p.rows.size();
  std::vector<double> u(n), ubar(n), uold(n), kt(n), y(m, 0.0);
  for (std::size_t c = 0; c < n; ++c) u[c] = std::clamp(init[c], p.lo[c], p.hi[c]);
  ubar = u;

  // ||K||^2 <= max row nnz * max column nnz.
  std::vector<std::size_t> col(n, 0);
  for (const auto& r : p.rows) {
    if (r.plus >= 0) ++col[r.plus];
    if (r.minus >= 0) ++col[r.minus];
  }
  const double l2 = 2.0 * static_cast<double>(std::max<std::size_t>(1, *std::max_element(col.begin(), col.end())));
  double wmax = 0.0;
  for (const auto& b : p.blocks) wmax = std::max(wmax, b.radius);
  if (wmax <= 0.0) wmax = 1.0;
  const double L = std::sqrt(l2);
  const double tau = 1.0 / (wmax * L);
  const double sigma = wmax / L;

  auto apply_kt = [&](const std::vector<double>& yy) {
    std::fill(kt.begin(), kt.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      if (p.rows[k].plus >= 0) kt[p.rows[k].plus] += yy[k];
      if (p.rows[k].minus >= 0) kt[p.rows[k].minus] -= yy[k];
    }
  };
  auto dual_value = [&]() {
    apply_kt(y);
    TermSum sum;
    for (std::size_t c = 0; c < n; ++c) {
      const double gc = kt[c] + p.unary[c];
      sum.add(gc > 0.0 ? gc * p.lo[c] : gc * p.hi[c]);
    }
    return sum.total();
  };

  RelaxSolution sol;
  sol.offset = p.constant;
  std::size_t it = 0;
  while (true) {
    if (it % opt.check_every == 0 || it >= opt.max_iter) {
      const double primal = p.primal(u);
      const double gap = std::max(0.0, primal - dual_value());
      sol.primal = primal;
      sol.gap = gap;
      if (opt.record_trace) sol.trace.push_back({it, primal, gap});
      if (gap <= opt.tol) {
        sol.converged = true;
        break;
      }
      if (it >= opt.max_iter) break;
    }
    // Dual ascent and projection onto the weighted balls.
    for (const auto& b : p.blocks) {
      double s2 = 0.0;
      for (std::size_t k = b.first; k < b.first + b.count; ++k) {
        y[k] += sigma * p.row_value(p.rows[k], ubar);
        s2 += y[k] * y[k];
      }
      const double norm = std::sqrt(s2);
      if (norm > b.radius) {
        const double scale = b.radius / norm;
        for (std::size_t k = b.first; k < b.first + b.count; ++k) y[k] *= scale;
      }
    }
    // Primal descent and projection onto the box.
    apply_kt(y);
    uold = u;
    for (std::size_t c = 0; c < n; ++c) {
      u[c] = std::clamp(u[c] - tau * (kt[c] + p.unary[c]), p.lo[c], p.hi[c]);
      ubar[c] = 2.0 * u[c] - uold[c];
    }
    ++it;
  }
  sol.iterations = it;
  sol.u = ScalarField(p.grid, u);
  return sol;
}

inline RelaxSolution minimize_levelset(const SetMask& prev, const BetaField& beta, double lambda, const Stencil& st,
                                       const RelaxOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("minimize_levelset: tol must be positive");
  const LinearTvProblem p =
      opt.isotropic ? isotropic_problem(prev, beta, lambda) : linear_tv_from_graph(build_graph(prev, beta, lambda, st));
  return solve_linear_tv(p, ScalarField::indicator(prev), opt);
}

/// Superlevel set {u > t}.
inline SetMask threshold(const ScalarField& u, double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("threshold: level must lie in (0, 1)");
  SetMask m(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) m.set(i, u[i] > t);
  return m;
}

inline void write_trace_csv(std::ostream& os, const RelaxSolution& s) {
  os << "iter,primal,gap\n";
  os.precision(17);
  for (const auto& t : s.trace) os << t.iteration << "," << t.primal << "," << t.gap << "\n";
}

}  // namespace capflow
