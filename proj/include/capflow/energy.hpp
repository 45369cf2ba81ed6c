#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capflow/grid.hpp"
#include "capflow/stencil.hpp"
#include "capflow/summation.hpp"

namespace capflow {

struct EnergyBreakdown {
  double perimeter_in_omega = 0.0;
  double trace_term = 0.0;
  double fidelity_term = 0.0;
  double capillary_total = 0.0;
  double atw_total = 0.0;

  StencilKind stencil = StencilKind::axis;
  double lambda = 0.0;
  double h = 1.0;
};

inline nlohmann::json to_json(const EnergyBreakdown& e) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  return {{"perimeter_in_omega", num(e.perimeter_in_omega)},
          {"trace_term", num(e.trace_term)},
          {"fidelity_term", num(e.fidelity_term)},
          {"capillary_total", num(e.capillary_total)},
          {"atw_total", num(e.atw_total)},
          {"stencil", to_string(e.stencil)},
          {"lambda", e.lambda},
          {"h", e.h}};
}

namespace detail {

inline bool pair_counts(const Cell& c, const Cell& e, int sign, int vertical) {
  // Midpoint height of the segment c -> c + sign*e is (2 j + sign*e_v + 1) h / 2.
  // Offsets spanning two rows could reach below the plane with a positive
  // midpoint; such a segment crosses the wall, not the interface, so both
  // endpoints must lie above the plane. Unit vertical offsets never trigger this.
  return 2 * c[vertical] + sign * e[vertical] + 1 > 0 && c[vertical] + sign * e[vertical] >= 0;
}

// Per-direction number of in/out pairs whose midpoint lies strictly above the
// plane; pairs reaching outside the box count as in/out.
inline std::vector<std::size_t> cut_pair_counts(const SetMask& mask, const Stencil& st) {
  const HalfSpaceGrid& g = mask.grid();
  const int v = g.vertical_axis();
  std::vector<std::size_t> counts(st.directions(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask[i]) continue;
    const Cell c = g.cell(i);
    for (std::size_t k = 0; k < st.directions(); ++k) {
      for (int s : {-1, 1}) {
        if (!pair_counts(c, st.offsets[k], s, v)) continue;
        Cell n{c[0] + s * st.offsets[k][0], c[1] + s * st.offsets[k][1], c[2] + s * st.offsets[k][2]};
        if (!mask.test(n)) ++counts[k];
      }
    }
  }
  return counts;
}

}  // namespace detail

/// Discrete perimeter inside the open half-space.
inline double perimeter(const SetMask& mask, const Stencil& st) {
  const auto counts = detail::cut_pair_counts(mask, st);
  TermSum sum;
  for (std::size_t k = 0; k < counts.size(); ++k) sum.add(st.weights[k] * static_cast<double>(counts[k]));
  return sum.total();
}

/// Perimeter in the whole space: interior perimeter plus the wetted footprint.
inline double full_perimeter(const SetMask& mask, const Stencil& st) {
  TermSum sum;
  sum.add(perimeter(mask, st));
  sum.add(static_cast<double>(mask.wetted_cells()) * mask.grid().face_area());
  return sum.total();
}

inline double trace_term(const SetMask& mask, const BetaField& beta) {
  require_same_grid(mask.grid(), beta.grid(), "trace_term");
  TermSum sum;
  const double area = mask.grid().face_area();
  for (std::size_t col = 0; col < mask.grid().columns(); ++col) {
    if (mask[col]) sum.add(beta[col] * area);
  }
  return sum.total();
}

inline EnergyBreakdown capillary(const SetMask& mask, const BetaField& beta, const Stencil& st) {
  EnergyBreakdown e;
  e.stencil = st.kind;
  e.h = mask.grid().spacing();
  e.perimeter_in_omega = perimeter(mask, st);
  e.trace_term = trace_term(mask, beta);
  e.capillary_total = e.perimeter_in_omega - e.trace_term;
  e.atw_total = e.capillary_total;
  return e;
}

/// Sum over the symmetric difference of |dist| * h^d (without the factor lambda).
/// +inf when prev is empty and the masks differ.
inline double distance_weighted_symdiff(const SetMask& mask, const SetMask& prev, const ScalarField& dist) {
  require_same_grid(mask.grid(), prev.grid(), "fidelity");
  require_same_grid(mask.grid(), dist.grid(), "fidelity");
  TermSum sum;
  const double vol = mask.grid().cell_volume();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == prev[i]) continue;
    const double d = dist[i];
    if (std::isnan(d)) throw std::invalid_argument("atw: NaN in distance field");
    if (std::isinf(d)) return std::numeric_limits<double>::infinity();
    sum.add(std::abs(d) * vol);
  }
  return sum.total();
}

/// Capillary Almgren-Taylor-Wang energy of `mask` relative to `prev` with
/// dist = signed_distance(prev).
inline EnergyBreakdown atw(const SetMask& mask, const SetMask& prev, const BetaField& beta, double lambda,
                           const Stencil& st, const ScalarField& dist) {
  EnergyBreakdown e = capillary(mask, beta, st);
  e.lambda = lambda;
  require_same_grid(mask.grid(), prev.grid(), "atw");
  require_same_grid(mask.grid(), dist.grid(), "atw");
  TermSum sum;
  const double vol = mask.grid().cell_volume();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == prev[i]) continue;
    const double d = dist[i];
    if (std::isnan(d)) throw std::invalid_argument("atw: NaN in distance field");
    if (std::isinf(d)) {
      e.fidelity_term = std::numeric_limits<double>::infinity();
      break;
    }
    sum.add(lambda * std::abs(d) * vol);
  }
  if (!std::isinf(e.fidelity_term)) e.fidelity_term = sum.total();
  e.atw_total = e.capillary_total + e.fidelity_term;
  return e;
}

/// Convex level-set energy: anisotropic discrete total variation of u, minus
/// the weighted trace, plus lambda * sum u * dist * h^d. Cells with infinite
/// distance are skipped when lambda == 0.
inline double level_set_energy(const ScalarField& u, const BetaField& beta, const Stencil& st, double lambda,
                               const ScalarField* dist) {
  const HalfSpaceGrid& g = u.grid();
  require_same_grid(g, beta.grid(), "level_set_energy");
  for (double x : u.values()) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("level_set_energy: u outside [0, 1]");
  }
  const int v = g.vertical_axis();
  TermSum sum;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Cell c = g.cell(i);
    for (std::size_t k = 0; k < st.directions(); ++k) {
      const Cell& e = st.offsets[k];
      // Forward neighbor inside the box: ordinary pair term.
      const Cell n{c[0] + e[0], c[1] + e[1], c[2] + e[2]};
      if (g.contains(n)) {
        sum.add(st.weights[k] * std::abs(u[i] - u[g.index(n)]));
      } else if (detail::pair_counts(c, e, 1, v)) {
        sum.add(st.weights[k] * u[i]);
      }
      // Backward neighbor only matters when it leaves the box.
      const Cell b{c[0] - e[0], c[1] - e[1], c[2] - e[2]};
      if (!g.contains(b) && detail::pair_counts(c, e, -1, v)) sum.add(st.weights[k] * u[i]);
    }
  }
  const double area = g.face_area();
  for (std::size_t col = 0; col < g.columns(); ++col) sum.add(-beta[col] * u[col] * area);
  if (lambda != 0.0 && dist != nullptr) {
    require_same_grid(g, dist->grid(), "level_set_energy");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (u[i] == 0.0) continue;
      sum.add(lambda * u[i] * (*dist)[i] * g.cell_volume());
    }
  }
  return sum.total();
}

}  // namespace capflow
