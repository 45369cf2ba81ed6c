#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace capflow;

namespace {

SetMask single(const HalfSpaceGrid& g, Cell c) {
  SetMask m(g);
  m.set(c);
  return m;
}

// Cells whose centers satisfy y < (x - x0) * slope.
SetMask wedge(const HalfSpaceGrid& g, double x0, double slope) {
  SetMask m(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.center(i);
    m.set(i, p[0] > x0 && p[1] < (p[0] - x0) * slope);
  }
  return m;
}

}  // namespace

TEST(Constants, PlanarExamples) {
  const TheoryConstants k = default_constants(1, 0.25);
  EXPECT_DOUBLE_EQ(k.omega_n, 2.0);
  EXPECT_DOUBLE_EQ(k.omega_n1, std::numbers::pi);
  EXPECT_NEAR(k.R, std::sqrt(16.0 * (2.0 + 2.0 * std::numbers::pi) / (std::numbers::pi * 0.0625)), 1e-12);
  EXPECT_NEAR(k.R, 25.98, 0.005);
  EXPECT_NEAR(k.gamma, 0.00962, 0.000005);
  EXPECT_DOUBLE_EQ(k.theta - k.C_nk / k.kappa, 1.0);
  EXPECT_DOUBLE_EQ(k.mu, 36.0);
  EXPECT_EQ(k.b_n, 5.0);
  EXPECT_DOUBLE_EQ(default_besicovitch(2), 16.0);
}

TEST(Constants, MonotoneInKappa) {
  for (int n : {1, 2}) {
    double lastR = 0.0, lastc = std::numeric_limits<double>::infinity();
    for (double kappa : {0.5, 0.4, 0.25, 0.1, 0.01}) {
      const TheoryConstants k = default_constants(n, kappa);
      EXPECT_GT(k.R, lastR);
      EXPECT_LT(k.c, lastc);
      EXPECT_DOUBLE_EQ(k.theta - k.C_nk / k.kappa, 1.0);
      lastR = k.R;
      lastc = k.c;
    }
  }
  EXPECT_THROW(default_constants(3, 0.25), std::invalid_argument);
  EXPECT_THROW(default_constants(1, 0.0), std::invalid_argument);
  EXPECT_THROW(constants(1, 0.25, -1.0, 1.0), std::invalid_argument);
  const nlohmann::json j = to_json(default_constants(2, 0.25));
  for (const char* key : {"R", "gamma", "C", "c", "C_nk", "theta", "alpha", "mu", "b_n", "c_iso"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Constants, IsoperimetricDefault) {
  // Planar unit half-disk: diameter 2 over (pi / 2)^{1/2}.
  EXPECT_NEAR(default_isoperimetric(1), 2.0 / std::sqrt(std::numbers::pi / 2.0), 1e-12);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-12);
}

TEST(Holder, Examples) {
  const HalfSpaceGrid g = make_grid(2, {4, 4}, 1.0);
  const BetaField b = test::zero_beta(g);
  const SetMask cell = single(g, Cell{1, 2, 0});
  const Trajectory flat = rebuild_trajectory({cell, cell, cell}, b, 4.0, StencilKind::axis);
  EXPECT_EQ(holder_modulus(flat), 0.0);
  const Trajectory one = rebuild_trajectory({cell, SetMask(g)}, b, 4.0, StencilKind::axis);
  EXPECT_DOUBLE_EQ(one.full_perimeter0, 4.0);
  EXPECT_DOUBLE_EQ(holder_modulus(one), 0.5);
  EXPECT_THROW(holder_modulus(rebuild_trajectory({cell}, b, 4.0, StencilKind::axis)), std::invalid_argument);
}

TEST(Holder, InvariantUnderReindexing) {
  const HalfSpaceGrid g = make_grid(2, {24, 16}, 1.0 / 16);
  const BetaField b = test::zero_beta(g);
  FlowConfig cfg;
  cfg.initial = cap_mask(g, Point{0.75, 0.0, 0.0}, 0.6);
  cfg.beta = b;
  cfg.lambda = 32.0;
  cfg.steps = 6;
  cfg.stencil = StencilKind::diagonal;
  const Trajectory tr = evolve(cfg);
  std::vector<SetMask> masks;
  std::vector<int> doubled;
  for (const Frame& f : tr.frames) {
    masks.push_back(f.mask);
    doubled.push_back(2 * f.k);
  }
  const Trajectory re = rebuild_trajectory(masks, b, 64.0, StencilKind::diagonal, doubled);
  EXPECT_DOUBLE_EQ(holder_modulus(tr), holder_modulus(re));
  EXPECT_GT(holder_modulus(tr), 0.0);
}

TEST(Linfty, Examples) {
  const HalfSpaceGrid g = make_grid(2, {4, 4}, 1.0);
  const BetaField b = test::zero_beta(g);
  const SetMask cell = single(g, Cell{1, 2, 0});
  EXPECT_EQ(linfty_per_step(rebuild_trajectory({cell, cell}, b, 4.0, StencilKind::axis)),
            std::vector<double>{0.0});
  EXPECT_EQ(linfty_per_step(rebuild_trajectory({cell, SetMask(g)}, b, 4.0, StencilKind::axis)),
            std::vector<double>{0.5});
}

TEST(FitLogLog, RecoversPowerLaw) {
  std::vector<double> x, y;
  for (double l : {256.0, 512.0, 1024.0, 2048.0}) {
    x.push_back(l);
    y.push_back(3.0 / std::sqrt(l));
  }
  const SlopeFit f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(to_json(f)["points"], 4);
  EXPECT_THROW(fit_loglog({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(fit_loglog({1.0, 2.0, 3.0}, {1.0, 0.0, 2.0}), std::invalid_argument);
}

TEST(Density, SingleCellCounting) {
  const HalfSpaceGrid g = make_grid(2, {8, 8}, 1.0);
  const auto rows = density_report(single(g, Cell{3, 3, 0}), {2.0});
  ASSERT_EQ(rows.size(), 1u);
  // 12 cell centers lie within 2h of each face center.
  EXPECT_EQ(rows[0].centers, 4u);
  EXPECT_DOUBLE_EQ(rows[0].min_fraction, 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(rows[0].max_fraction, 1.0 / 12.0);
  EXPECT_THROW(density_report(single(g, Cell{3, 3, 0}), {1.5}), std::invalid_argument);
}

TEST(Density, FlatInterfaceIsHalfFull) {
  const HalfSpaceGrid g = make_grid(2, {64, 48}, 1.0);
  const SetMask slab = box_mask(g, Cell{0, 0, 0}, Cell{64, 24, 1});
  for (double r : {4.0, 8.0}) {
    const DensityRow row = density_report(slab, {r}).front();
    EXPECT_GE(row.min_fraction, 0.5 - 2.0 / r);
    EXPECT_LE(row.min_fraction, 0.5 + 2.0 / r);
  }
}

TEST(ContactAngle, VerticalWall) {
  const HalfSpaceGrid g = make_grid(2, {64, 40}, 1.0);
  const SetMask m = box_mask(g, Cell{16, 0, 0}, Cell{48, 30, 1});
  const ContactProfile p = contact_angle_profile(m, test::zero_beta(g), 6.0);
  ASSERT_EQ(p.samples.size(), 2u);
  for (const auto& s : p.samples) {
    ASSERT_TRUE(s.ok);
    EXPECT_NEAR(s.cosine, 0.0, 0.1);
  }
  EXPECT_THROW(contact_angle_profile(m, test::zero_beta(g), 2.0), std::invalid_argument);
}

TEST(ContactAngle, HalfDiskMeetsPlaneAtRightAngles) {
  const HalfSpaceGrid g = make_grid(2, {96, 48}, 1.0);
  const SetMask m = cap_mask(g, Point{48.0, 0.0, 0.0}, 32.0);
  const ContactProfile p = contact_angle_profile(m, test::zero_beta(g), 6.0);
  ASSERT_EQ(p.samples.size(), 2u);
  for (const auto& s : p.samples) {
    ASSERT_TRUE(s.ok);
    EXPECT_NEAR(s.cosine, 0.0, 0.15);
  }
  // Mirror symmetry of the profile.
  EXPECT_NEAR(p.samples[0].cosine, p.samples[1].cosine, 1e-9);
  EXPECT_NEAR(p.samples[0].location[0] + p.samples[1].location[0], 96.0, 1e-12);
}

TEST(ContactAngle, FortyFiveDegreeWedge) {
  const HalfSpaceGrid g = make_grid(2, {64, 48}, 1.0);
  const SetMask m = wedge(g, 20.0, 1.0);
  const ContactProfile p = contact_angle_profile(m, BetaField::constant(g, 0.5, 0.25), 6.0);
  ASSERT_EQ(p.samples.size(), 1u);
  ASSERT_TRUE(p.samples[0].ok);
  EXPECT_NEAR(p.samples[0].cosine, std::sqrt(0.5), 0.1);
  EXPECT_DOUBLE_EQ(p.samples[0].beta, 0.5);
  // The mirrored wedge has the mirrored profile.
  SetMask mirror(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Cell c = g.cell(i);
    c[0] = g.extent(0) - 1 - c[0];
    mirror.set(i, m.test(c));
  }
  const ContactProfile q = contact_angle_profile(mirror, BetaField::constant(g, 0.5, 0.25), 6.0);
  ASSERT_EQ(q.samples.size(), 1u);
  EXPECT_NEAR(q.samples[0].cosine, p.samples[0].cosine, 1e-9);
}

TEST(ContactAngle, SphericalCapIn3D) {
  const HalfSpaceGrid g = make_grid(3, {48, 48, 24}, 1.0);
  const SetMask m = cap_mask(g, Point{24.0, 24.0, 0.0}, 18.0);
  const ContactProfile p = contact_angle_profile(m, test::zero_beta(g), 6.0);
  ASSERT_GT(p.ok, 0u);
  EXPECT_NEAR(p.mean_cosine, 0.0, 0.15);
  std::ostringstream os;
  write_contact_csv(os, p);
  EXPECT_EQ(os.str().rfind("x,y,z,cosine,beta,points,ok\n", 0), 0u);
}

TEST(Velocity, FlatInterfaceHasNoCurvature) {
  const HalfSpaceGrid g = make_grid(2, {64, 40}, 1.0);
  const SetMask slab = box_mask(g, Cell{0, 0, 0}, Cell{64, 20, 1});
  const VelocityReport r = velocity_curvature_report(slab, slab, 16.0, 6.0);
  ASSERT_FALSE(r.samples.empty());
  std::size_t checked = 0;
  for (const auto& s : r.samples) {
    // Samples on the flat top, away from the walls.
    if (s.x[1] != 20.0 || s.x[0] < 8.0 || s.x[0] > 56.0) continue;
    ASSERT_TRUE(s.fit_ok);
    EXPECT_NEAR(s.curvature, 0.0, 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 40u);
  std::ostringstream os;
  write_velocity_csv(os, r);
  EXPECT_EQ(os.str().rfind("x,y,z,v,curvature,points,fit_ok\n", 0), 0u);
}

TEST(Velocity, CircleCurvatureIsInverseRadius) {
  const HalfSpaceGrid g = make_grid(2, {96, 48}, 1.0);
  const SetMask m = cap_mask(g, Point{48.0, 0.0, 0.0}, 32.0);
  const VelocityReport r = velocity_curvature_report(m, m, 1.0, 6.0);
  EXPECT_NEAR(r.median_abs_curvature * 32.0, 1.0, 0.3);
}

TEST(Velocity, DegenerateSingleCellIsReportOnly) {
  const HalfSpaceGrid g = make_grid(2, {8, 8}, 1.0);
  const SetMask two = box_mask(g, Cell{3, 3, 0}, Cell{5, 4, 1});
  const SetMask one = single(g, Cell{3, 3, 0});
  const VelocityReport r = velocity_curvature_report(two, one, 4.0, 3.0);
  EXPECT_EQ(r.samples.size(), 4u);
  EXPECT_THROW(velocity_curvature_report(two, SetMask(g), 4.0, 3.0), std::invalid_argument);
}

TEST(TracePerimeter, FootprintBoundary) {
  const HalfSpaceGrid g2 = make_grid(2, {16, 8}, 0.5);
  EXPECT_EQ(trace_perimeter(box_mask(g2, Cell{2, 0, 0}, Cell{9, 3, 1})), 2.0);
  EXPECT_EQ(trace_perimeter(box_mask(g2, Cell{2, 1, 0}, Cell{9, 3, 1})), 0.0);
  const HalfSpaceGrid g3 = make_grid(3, {8, 8, 4}, 0.5);
  EXPECT_DOUBLE_EQ(trace_perimeter(box_mask(g3, Cell{1, 1, 0}, Cell{4, 5, 2})), (3 + 4) * 2 * 0.5);
}

TEST(Report, AnalysisJsonHasAllSections) {
  const HalfSpaceGrid g = make_grid(2, {48, 32}, 1.0 / 32);
  FlowConfig cfg;
  cfg.initial = cap_mask(g, Point{0.75, 0.0, 0.0}, 0.5);
  cfg.beta = test::zero_beta(g);
  cfg.lambda = 256.0;
  cfg.steps = 5;
  cfg.stencil = StencilKind::diagonal;
  const Trajectory tr = evolve(cfg);
  AnalysisOptions opt;
  opt.kappa = 0.25;
  const nlohmann::json j = analysis_report(tr, cfg.beta, opt);
  for (const char* key : {"constants", "holder", "linfty", "dissipation", "velocity", "contact_angle", "density",
                          "trace_perimeter", "domain"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["dissipation"]["bounded"].get<bool>());
  EXPECT_TRUE(j["constants"]["defaults"]["b_n"].get<bool>());
  EXPECT_EQ(j["trace_perimeter"].size(), 6u);
  EXPECT_EQ(j["density"].size(), 2u);
}
