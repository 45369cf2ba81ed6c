#pragma once

#include <random>
#include <vector>

#include "capflow/capflow.hpp"

namespace capflow::test {

inline SetMask random_mask(const HalfSpaceGrid& g, std::mt19937& rng, double p = 0.5) {
  std::bernoulli_distribution coin(p);
  SetMask m(g);
  for (std::size_t i = 0; i < g.size(); ++i) m.set(i, coin(rng));
  return m;
}

// Union of a few random axis boxes; gives sets with long flat interfaces.
inline SetMask random_boxes(const HalfSpaceGrid& g, std::mt19937& rng, int boxes = 3, bool grounded = false) {
  SetMask m(g);
  for (int b = 0; b < boxes; ++b) {
    Cell lo{0, 0, 0}, hi{1, 1, 1};
    for (int a = 0; a < g.dim(); ++a) {
      std::uniform_int_distribution<int> pick(0, g.extent(a) - 1);
      int x = pick(rng), y = pick(rng);
      if (x > y) std::swap(x, y);
      lo[a] = x;
      hi[a] = y + 1;
    }
    if (grounded) lo[g.vertical_axis()] = 0;
    m = m | box_mask(g, lo, hi);
  }
  return m;
}

// Samples on the dyadic grid k/8 inside [-1, 1 - 2 kappa].
inline BetaField random_beta(const HalfSpaceGrid& g, std::mt19937& rng, double kappa = 0.25, double hi = 1.0) {
  const double top = std::min(hi, 1.0 - 2.0 * kappa);
  std::uniform_int_distribution<int> pick(-8, static_cast<int>(std::floor(8.0 * top)));
  std::vector<double> s(g.columns());
  for (double& b : s) b = pick(rng) / 8.0;
  return BetaField(g, s, kappa);
}

inline BetaField zero_beta(const HalfSpaceGrid& g, double kappa = 0.25) { return BetaField::constant(g, 0.0, kappa); }

}  // namespace capflow::test
