#include <gtest/gtest.h>

#include "support.hpp"

using namespace capflow;

TEST(Oracle, EmptySetMinimizesCapillary) {
  const HalfSpaceGrid g = make_grid(2, {2, 2}, 1.0);
  const OracleReport r =
      enumerate(SetMask(g), test::zero_beta(g), 0.0, make_stencil(StencilKind::axis, g), Objective::capillary);
  EXPECT_EQ(r.minimum, 0.0);
  ASSERT_EQ(r.minimizers.size(), 1u);
  EXPECT_TRUE(r.minimizers[0].empty());
  EXPECT_EQ(r.subsets_examined, 16u);
}

TEST(Oracle, OneCellSignConventions) {
  const HalfSpaceGrid g = make_grid(2, {1, 1}, 1.0);
  const Stencil st = make_stencil(StencilKind::axis, g);
  const SetMask cell(g, true);
  const BetaField b = test::zero_beta(g);
  const OracleReport keep = enumerate(cell, b, 8.0, st, Objective::atw);
  EXPECT_EQ(keep.minimum, 3.0);
  ASSERT_EQ(keep.minimizers.size(), 1u);
  EXPECT_EQ(keep.minimizers[0], cell);
  const OracleReport drop = enumerate(cell, b, 4.0, st, Objective::atw);
  EXPECT_EQ(drop.minimum, 2.0);
  ASSERT_EQ(drop.minimizers.size(), 1u);
  EXPECT_TRUE(drop.minimizers[0].empty());
}

TEST(Oracle, CellCap) {
  const HalfSpaceGrid ok = make_grid(2, {11, 2}, 1.0);
  EXPECT_NO_THROW(enumerate(SetMask(ok, true), test::zero_beta(ok), 1.0, make_stencil(StencilKind::axis, ok),
                            Objective::atw));
  const HalfSpaceGrid big = make_grid(2, {23, 1}, 1.0);
  EXPECT_THROW(enumerate(SetMask(big, true), test::zero_beta(big), 1.0, make_stencil(StencilKind::axis, big),
                         Objective::atw),
               std::invalid_argument);
}

TEST(Oracle, SelfConsistencyAndLatticeClosure) {
  std::mt19937 rng(404);
  std::uniform_int_distribution<int> ext(1, 4), lam(0, 5), obj(0, 2);
  for (int trial = 0; trial < 80; ++trial) {
    const HalfSpaceGrid g = make_grid(2, {ext(rng), ext(rng)}, 0.5);
    const SetMask prev = test::random_mask(g, rng);
    const BetaField b = test::random_beta(g, rng);
    const double lambda = std::ldexp(1.0, lam(rng));
    const Objective o = static_cast<Objective>(obj(rng));
    const Stencil st = make_stencil(trial % 2 ? StencilKind::diagonal : StencilKind::axis, g);
    const OracleReport r = enumerate(prev, b, lambda, st, o);
    ASSERT_FALSE(r.minimizers.empty());
    EXPECT_TRUE(r.lattice_extremes_are_minimizers);
    const ScalarField dist = signed_distance(prev);
    for (const SetMask& m : r.minimizers) {
      EXPECT_EQ(oracle_energy(m, prev, b, lambda, st, dist, o), r.minimum);
      if (o == Objective::constrained_capillary) {
        EXPECT_TRUE(prev.subset_of(m));
      }
      EXPECT_TRUE(r.lattice_min.subset_of(m));
      EXPECT_TRUE(m.subset_of(r.lattice_max));
      for (const SetMask& n : r.minimizers) {
        EXPECT_EQ(oracle_energy(m & n, prev, b, lambda, st, dist, o), r.minimum);
        EXPECT_EQ(oracle_energy(m | n, prev, b, lambda, st, dist, o), r.minimum);
      }
    }
    if (o == Objective::atw) {
      EXPECT_EQ(r.minimum, oracle_energy(r.minimizers[0], prev, b, lambda, st, dist, o));
      EXPECT_EQ(r.minimum, atw(r.minimizers[0], prev, b, lambda, st, dist).atw_total);
    }
  }
}

TEST(Oracle, ExhaustiveAgainstDirectLoop) {
  std::mt19937 rng(5);
  const HalfSpaceGrid g = make_grid(2, {3, 3}, 0.5);
  const Stencil st = make_stencil(StencilKind::diagonal, g);
  for (int trial = 0; trial < 10; ++trial) {
    const SetMask prev = test::random_mask(g, rng);
    if (prev.empty()) continue;
    const BetaField b = test::random_beta(g, rng);
    const ScalarField dist = signed_distance(prev);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t bits = 0; bits < (1u << 9); ++bits) {
      SetMask m(g);
      for (std::size_t i = 0; i < 9; ++i) m.set(i, (bits >> i) & 1u);
      best = std::min(best, atw(m, prev, b, 4.0, st, dist).atw_total);
    }
    EXPECT_EQ(enumerate(prev, b, 4.0, st, Objective::atw).minimum, best);
  }
}

TEST(Oracle, JsonReport) {
  const HalfSpaceGrid g = make_grid(2, {2, 1}, 1.0);
  const OracleReport r =
      enumerate(SetMask(g, true), test::zero_beta(g), 8.0, make_stencil(StencilKind::axis, g), Objective::atw);
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j["minimizers"].size(), r.minimizers.size());
  EXPECT_EQ(j["minimizers"][0].get<std::string>().size(), 2u);
  EXPECT_EQ(mask_bits(SetMask(g, true)), "11");
}
