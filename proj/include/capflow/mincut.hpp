#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "capflow/distance.hpp"
#include "capflow/energy.hpp"
#include "capflow/grid.hpp"
#include "capflow/maxflow.hpp"
#include "capflow/stencil.hpp"

namespace capflow {

enum class Selection { minimal, maximal };

inline const char* to_string(Selection s) { return s == Selection::minimal ? "minimal" : "maximal"; }

inline Selection parse_selection(const std::string& s) {
  if (s == "minimal") return Selection::minimal;
  if (s == "maximal") return Selection::maximal;
  throw std::invalid_argument("unknown selection '" + s + "'");
}

/// Binary energy  E(x) = sum_c unary[c] x_c + sum_pairs w |x_u - x_v| + constant,
/// where x_c = 1 means the cell belongs to the set (source side of the cut).
struct EnergyGraph {
  HalfSpaceGrid grid;
  std::vector<double> unary;
  struct Pair {
    std::size_t u, v;
    double w;
  };
  std::vector<Pair> pairs;
  std::vector<char> must_include;
  std::vector<char> must_exclude;
  double constant = 0.0;
  double hard_capacity = 1.0;

  std::size_t cells() const { return unary.size(); }
  int source() const { return static_cast<int>(cells()); }
  int sink() const { return static_cast<int>(cells()) + 1; }

  /// Value of the encoded energy for a mask; hard constraints violated give +inf.
  double evaluate(const SetMask& m) const {
    TermSum sum;
    sum.add(constant);
    for (std::size_t c = 0; c < cells(); ++c) {
      if ((must_include[c] && !m[c]) || (must_exclude[c] && m[c])) return std::numeric_limits<double>::infinity();
      if (m[c]) sum.add(unary[c]);
    }
    for (const Pair& p : pairs) {
      if (m[p.u] != m[p.v]) sum.add(p.w);
    }
    return sum.total();
  }
};

struct BuildOptions {
  const SetMask* must_include = nullptr;
  // Precomputed signed_distance(prev); computed on demand when null.
  const ScalarField* dist = nullptr;
  // Negative control for the oracle comparison: flips the sign of the
  // fidelity contribution.
  bool corrupt_unary_sign = false;
};

/// Graph for  mask -> atw(mask, prev, beta, lambda)  (all cells free), or for the
/// capillary energy when lambda == 0. Cells with infinite fidelity (prev empty)
/// are forced out of the set.
inline EnergyGraph build_graph(const SetMask& prev, const BetaField& beta, double lambda, const Stencil& st,
                               const BuildOptions& opt = {}) {
  const HalfSpaceGrid& g = prev.grid();
  require_same_grid(g, beta.grid(), "build_graph");
  for (double b : beta.samples()) {
    if (!(b >= -1.0 && b <= 1.0 - 2.0 * beta.kappa())) throw std::invalid_argument("build_graph: inadmissible beta");
  }
  if (opt.must_include) require_same_grid(g, opt.must_include->grid(), "build_graph");
  if (lambda < 0.0) throw std::invalid_argument("build_graph: negative lambda");

  EnergyGraph eg;
  eg.grid = g;
  eg.unary.assign(g.size(), 0.0);
  eg.must_include.assign(g.size(), 0);
  eg.must_exclude.assign(g.size(), 0);

  const int v = g.vertical_axis();
  const double vol = g.cell_volume();
  const double area = g.face_area();

  std::vector<TermSum> unary(g.size());
  TermSum constant;
  std::optional<ScalarField> dist;
  if (lambda > 0.0) {
    if (opt.dist) {
      require_same_grid(g, opt.dist->grid(), "build_graph");
      dist = *opt.dist;
    } else {
      dist = signed_distance(prev);
    }
  }

  for (std::size_t i = 0; i < g.size(); ++i) {
    const Cell c = g.cell(i);
    if (dist) {
      const double d = (*dist)[i];
      if (std::isinf(d)) {
        eg.must_exclude[i] = 1;
      } else {
        const double fid = lambda * d * vol;
        unary[i].add(opt.corrupt_unary_sign ? -fid : fid);
        if (prev[i]) constant.add(-fid);
      }
    }
    if (g.on_bottom_row(i)) unary[i].add(-beta[g.column_of(i)] * area);
    for (std::size_t k = 0; k < st.directions(); ++k) {
      const Cell& e = st.offsets[k];
      const Cell n{c[0] + e[0], c[1] + e[1], c[2] + e[2]};
      if (g.contains(n)) {
        eg.pairs.push_back({i, g.index(n), st.weights[k]});
      } else if (detail::pair_counts(c, e, 1, v)) {
        unary[i].add(st.weights[k]);
      }
      const Cell b{c[0] - e[0], c[1] - e[1], c[2] - e[2]};
      if (!g.contains(b) && detail::pair_counts(c, e, -1, v)) unary[i].add(st.weights[k]);
    }
    if (opt.must_include && (*opt.must_include)[i]) eg.must_include[i] = 1;
  }
  double mass = std::abs(constant.total());
  for (std::size_t i = 0; i < g.size(); ++i) {
    eg.unary[i] = unary[i].total();
    mass += std::abs(eg.unary[i]);
  }
  for (const auto& p : eg.pairs) mass += p.w;
  eg.constant = constant.total();
  eg.hard_capacity = 1.0 + mass;
  return eg;
}

struct CutResult {
  double cut_value = 0.0;
  double flow_value = 0.0;
  double offset = 0.0;
  SetMask mask;
  SetMask minimal;
  SetMask maximal;
  MaxFlow::Stats stats;

  double energy() const { return cut_value + offset; }
};

namespace detail {

inline MaxFlow make_flow_network(const EnergyGraph& g, double& offset) {
  MaxFlow mf(static_cast<int>(g.cells()) + 2);
  offset = g.constant;
  const int s = g.source(), t = g.sink();
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const int node = static_cast<int>(c);
    const double a = g.unary[c];
    // x_c a = a (x_c = 1, cut c->t)   or   a + (-a)(1 - x_c) (cut s->c).
    if (a > 0.0) {
      mf.add_edge(node, t, a);
    } else if (a < 0.0) {
      mf.add_edge(s, node, -a);
      offset += a;
    }
    if (g.must_include[c]) mf.add_edge(s, node, g.hard_capacity);
    if (g.must_exclude[c]) mf.add_edge(node, t, g.hard_capacity);
  }
  for (const auto& p : g.pairs) mf.add_edge(static_cast<int>(p.u), static_cast<int>(p.v), p.w, p.w);
  return mf;
}

inline double flow_tolerance(const EnergyGraph& g) { return 1e-13 * g.hard_capacity; }

}  // namespace detail

/// Exact minimization of the graph energy. `mask` is the requested canonical
/// minimizer; both lattice extremes are always returned.
inline CutResult solve_min_cut(const EnergyGraph& g, Selection sel = Selection::minimal) {
  CutResult r;
  MaxFlow mf = detail::make_flow_network(g, r.offset);
  r.flow_value = mf.solve(g.source(), g.sink(), detail::flow_tolerance(g));
  r.stats = mf.stats();
  const std::vector<char> from_s = mf.reachable_from(g.source());
  const std::vector<char> to_t = mf.reaching(g.sink());
  r.minimal = SetMask(g.grid);
  r.maximal = SetMask(g.grid);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    r.minimal.set(c, from_s[c] != 0);
    r.maximal.set(c, to_t[c] == 0);
  }
  r.mask = sel == Selection::minimal ? r.minimal : r.maximal;
  // Report the exact cut of the selected side rather than the accumulated flow.
  r.cut_value = g.evaluate(r.mask) - r.offset;
  return r;
}

inline SetMask minimal_minimizer(const EnergyGraph& g) { return solve_min_cut(g, Selection::minimal).minimal; }
inline SetMask maximal_minimizer(const EnergyGraph& g) { return solve_min_cut(g, Selection::maximal).maximal; }

/// DIMACS max-flow dump (1-based nodes; source = cells+1, sink = cells+2).
inline void write_dimacs(std::ostream& os, const EnergyGraph& g) {
  double offset = 0.0;
  const MaxFlow mf = detail::make_flow_network(g, offset);
  std::size_t arcs = 0;
  for (const auto& list : mf.arcs()) {
    for (const auto& a : list) arcs += a.cap > 0.0 ? 1 : 0;
  }
  os << "c capflow energy graph, constant offset " << offset << "\n";
  os << "p max " << mf.nodes() << " " << arcs << "\n";
  os << "n " << g.source() + 1 << " s\n";
  os << "n " << g.sink() + 1 << " t\n";
  os.precision(17);
  for (int u = 0; u < mf.nodes(); ++u) {
    for (const auto& a : mf.arcs()[u]) {
      if (a.cap > 0.0) os << "a " << u + 1 << " " << a.to + 1 << " " << a.cap << "\n";
    }
  }
}

}  // namespace capflow
