#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capflow/distance.hpp"
#include "capflow/energy.hpp"
#include "capflow/grid.hpp"
#include "capflow/stencil.hpp"

namespace capflow {

enum class Objective { atw, capillary, constrained_capillary };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::atw: return "atw";
    case Objective::capillary: return "capillary";
    case Objective::constrained_capillary: return "constrained-capillary";
  }
  return "?";
}

inline Objective parse_objective(const std::string& s) {
  if (s == "atw") return Objective::atw;
  if (s == "capillary") return Objective::capillary;
  if (s == "constrained-capillary" || s == "constrained") return Objective::constrained_capillary;
  throw std::invalid_argument("unknown objective '" + s + "'");
}

struct OracleReport {
  double minimum = 0.0;
  std::vector<SetMask> minimizers;
  SetMask lattice_min;
  SetMask lattice_max;
  std::uint64_t subsets_examined = 0;
  bool lattice_extremes_are_minimizers = false;
};

constexpr std::size_t kOracleMaxCells = 22;

/// Exact energy used by the oracle for a single mask.
inline double oracle_energy(const SetMask& m, const SetMask& prev, const BetaField& beta, double lambda,
                            const Stencil& st, const ScalarField& dist, Objective obj) {
  if (obj == Objective::atw) return atw(m, prev, beta, lambda, st, dist).atw_total;
  if (obj == Objective::constrained_capillary && !prev.subset_of(m)) return std::numeric_limits<double>::infinity();
  return capillary(m, beta, st).capillary_total;
}

/// Exhaustive minimization over every mask of a tiny grid (supersets of prev for
/// the constrained objective). Gray-code sweep with incremental energies picks
/// candidates; each candidate is then re-evaluated from scratch, and only masks
/// attaining the exact minimum are reported.
inline OracleReport enumerate(const SetMask& prev, const BetaField& beta, double lambda, const Stencil& st,
                              Objective obj) {
  const HalfSpaceGrid& g = prev.grid();
  require_same_grid(g, beta.grid(), "oracle");
  if (g.size() > kOracleMaxCells) {
    throw std::invalid_argument("oracle: " + std::to_string(g.size()) + " cells exceeds the cap of " +
                                std::to_string(kOracleMaxCells));
  }
  const ScalarField dist = signed_distance(prev);
  OracleReport rep;

  if (obj == Objective::atw && prev.empty()) {
    // Every nonempty set has infinite fidelity.
    SetMask e(g);
    rep.minimum = 0.0;
    rep.minimizers = {e};
    rep.lattice_min = rep.lattice_max = e;
    rep.subsets_examined = 1;
    rep.lattice_extremes_are_minimizers = true;
    return rep;
  }

  // Free cells and their per-flip bookkeeping.
  std::vector<std::size_t> free;
  SetMask start(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (obj == Objective::constrained_capillary && prev[i]) {
      start.set(i);
    } else {
      free.push_back(i);
    }
  }
  const std::size_t m = free.size();
  const int v = g.vertical_axis();
  const double vol = g.cell_volume();
  const double area = g.face_area();

  // Cost of membership that does not depend on neighbors, and neighbor lists.
  struct Nb {
    std::size_t cell;
    double w;
  };
  std::vector<double> self(g.size(), 0.0);
  std::vector<std::vector<Nb>> nbs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Cell c = g.cell(i);
    if (obj == Objective::atw) self[i] += (prev[i] ? -1.0 : 1.0) * lambda * std::abs(dist[i]) * vol;
    if (g.on_bottom_row(i)) self[i] -= beta[g.column_of(i)] * area;
    for (std::size_t k = 0; k < st.directions(); ++k) {
      for (int s : {-1, 1}) {
        if (!detail::pair_counts(c, st.offsets[k], s, v)) continue;
        const Cell n{c[0] + s * st.offsets[k][0], c[1] + s * st.offsets[k][1], c[2] + s * st.offsets[k][2]};
        if (g.contains(n)) {
          nbs[i].push_back({g.index(n), st.weights[k]});
        } else {
          self[i] += st.weights[k];
        }
      }
    }
  }

  std::vector<char> state(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) state[i] = start[i] ? 1 : 0;
  auto to_mask = [&](std::uint32_t bits) {
    SetMask r = start;
    for (std::size_t b = 0; b < m; ++b) {
      if (bits >> b & 1u) r.set(free[b]);
    }
    return r;
  };

  double e = oracle_energy(start, prev, beta, lambda, st, dist, obj);
  double best = e;
  auto tol = [](double x) { return 1e-9 * (1.0 + std::abs(x)); };
  std::vector<std::uint32_t> cand{0u};
  std::uint32_t gray = 0;
  const std::uint64_t total = std::uint64_t{1} << m;
  for (std::uint64_t step = 1; step < total; ++step) {
    const int b = std::countr_zero(step);
    const std::size_t c = free[b];
    const double sign = state[c] ? -1.0 : 1.0;
    double d = self[c];
    for (const Nb& nb : nbs[c]) d += state[nb.cell] ? -nb.w : nb.w;
    e += sign * d;
    state[c] ^= 1;
    gray ^= 1u << b;
    if (e < best - tol(best)) {
      best = e;
      cand.clear();
      cand.push_back(gray);
    } else if (e <= best + tol(best)) {
      cand.push_back(gray);
      best = std::min(best, e);
    }
  }
  rep.subsets_examined = total;

  // Exact re-evaluation of the candidates.
  std::vector<std::pair<double, std::uint32_t>> exact;
  double minimum = std::numeric_limits<double>::infinity();
  for (std::uint32_t bits : cand) {
    const double ex = oracle_energy(to_mask(bits), prev, beta, lambda, st, dist, obj);
    if (ex <= best + tol(best)) {
      exact.push_back({ex, bits});
      minimum = std::min(minimum, ex);
    }
  }
  rep.minimum = minimum;
  std::uint32_t meet = ~0u, join = 0u;
  for (const auto& [ex, bits] : exact) {
    if (ex != minimum) continue;
    rep.minimizers.push_back(to_mask(bits));
    meet &= bits;
    join |= bits;
  }
  rep.lattice_min = to_mask(meet);
  rep.lattice_max = to_mask(join);
  rep.lattice_extremes_are_minimizers =
      oracle_energy(rep.lattice_min, prev, beta, lambda, st, dist, obj) == minimum &&
      oracle_energy(rep.lattice_max, prev, beta, lambda, st, dist, obj) == minimum;
  return rep;
}

inline std::string mask_bits(const SetMask& m) {
  std::string s(m.size(), '0');
  for (std::size_t i = 0; i < m.size(); ++i) s[i] = m[i] ? '1' : '0';
  return s;
}

inline nlohmann::json to_json(const OracleReport& r) {
  nlohmann::json mins = nlohmann::json::array();
  for (const auto& m : r.minimizers) mins.push_back(mask_bits(m));
  return {{"minimum", r.minimum},
          {"minimizers", mins},
          {"lattice_min", mask_bits(r.lattice_min)},
          {"lattice_max", mask_bits(r.lattice_max)},
          {"subsets_examined", r.subsets_examined},
          {"lattice_extremes_are_minimizers", r.lattice_extremes_are_minimizers}};
}

}  // namespace capflow
