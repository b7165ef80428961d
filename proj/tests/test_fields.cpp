#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "eplab/error.hpp"
#include "eplab/fields.hpp"
#include "eplab/phase.hpp"
#include "eplab/simplewave.hpp"

using namespace eplab;
using namespace eplab::fields;

namespace {

Scenario gaussian_d3(double horizon = 100.0, std::size_t n = 129) {
  auto sc = gaussian_scenario(Dim(3), 0.3, 1.0, clustered_grid(6.0, n, 3.0), horizon);
  sc.snapshot_times = uniform_times(horizon, 41);
  return sc;
}

Scenario log_family_wave(int sign = 1) {
  const auto fam = simplewave::make_family(Dim(2), -2.0, sign);
  auto sc = simple_wave_scenario(fam, 0.25, 1.0, clustered_grid(4.0, 129, 3.0), 100.0);
  sc.snapshot_times = uniform_times(100.0, 41);
  return sc;
}

}  // namespace

TEST(Fields, ClusteredGrid) {
  const auto g = clustered_grid(6.0, 50, 3.0);
  ASSERT_EQ(g.size(), 50u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 6.0, 1e-14);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_LT(g[1] - g[0], g[49] - g[48]);
  const auto u = clustered_grid(4.0, 5, 0.0);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(u[i], i, 1e-14);
  EXPECT_THROW(clustered_grid(-1.0, 10, 1.0), InputError);
}

TEST(Fields, UniformTimes) {
  const auto t = uniform_times(10.0, 11);
  ASSERT_EQ(t.size(), 11u);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_EQ(t.back(), 10.0);
  EXPECT_NEAR(t[3], 3.0, 1e-14);
}

TEST(Fields, GridDerivativeIsExactOnPolynomials) {
  const auto x = clustered_grid(3.0, 20, 2.0);
  std::vector<double> y, c(x.size(), 4.2);
  for (double r : x) y.push_back(1 - 2 * r + 0.5 * std::pow(r, 6));
  const auto dy = grid_derivative(x, y, 7);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(dy[i], -2 + 3 * std::pow(x[i], 5), 1e-9 * (1 + std::pow(x[i], 5)));
  }
  for (double v : grid_derivative(x, c, 7)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(grid_derivative({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}, 5), InputError);
}

TEST(Fields, InitialGradientsOfTheGaussian) {
  auto sc = gaussian_d3(10.0, 257);
  const auto inits = derive_initial_uv(sc);
  const auto it = std::find_if(inits.begin(), inits.end(), [](const auto& c) { return c.r0 > 0.99; });
  ASSERT_NE(it, inits.end());
  const double r = it->r0;
  EXPECT_NEAR(it->v0, -2 * r * r * 0.3 * std::exp(-r * r), 1e-15);
  EXPECT_EQ(it->u0, 0.0);
  EXPECT_EQ(inits.front().v0, 0.0);
  // finite differences on the grid against the analytic derivative
  sc.dG0 = nullptr;
  const auto fd = derive_initial_uv(sc);
  for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_NEAR(fd[i].v0, inits[i].v0, 1e-6);

  auto unit = gaussian_scenario(Dim(3), 0.25, 1.0, {0.0, 0.5, 1.0, 1.5, 2.0}, 1.0);
  EXPECT_NEAR(derive_initial_uv(unit)[2].v0, -0.5 * std::exp(-1.0), 1e-15);
}

TEST(Fields, ScenarioValidation) {
  auto sc = gaussian_d3(10.0, 20);
  EXPECT_NO_THROW(sc.validate());
  auto bad = sc;
  bad.r0_grid.front() = 0.1;
  EXPECT_THROW(bad.validate(), InputError);
  bad = sc;
  std::swap(bad.r0_grid[3], bad.r0_grid[4]);
  EXPECT_THROW(bad.validate(), InputError);
  bad = sc;
  bad.r0_grid.resize(4);
  EXPECT_THROW(bad.validate(), InputError);
  bad = sc;
  bad.snapshot_times.push_back(11.0);
  EXPECT_THROW(bad.validate(), InputError);
  bad = sc;
  bad.horizon = 0.0;
  EXPECT_THROW(bad.validate(), InputError);
  // initial density 1 - v0 - d G0 must be positive everywhere
  auto dense = gaussian_scenario(Dim(3), 0.34, 1.0, clustered_grid(6.0, 20, 3.0), 10.0);
  EXPECT_THROW(derive_initial_uv(dense), InputError);
}

TEST(Fields, AffineDataStayAffine) {
  auto sc = affine_scenario(Dim(3), 0.2, 0.0, clustered_grid(6.0, 33, 3.0), 100.0);
  sc.snapshot_times = uniform_times(100.0, 21);
  const auto res = evolve_fan(sc);
  EXPECT_EQ(res.report.verdict, Verdict::smooth_to_horizon);
  ASSERT_EQ(res.snapshots.size(), 21u);
  for (const auto& s : res.snapshots) {
    EXPECT_EQ(s.affine_distance, 0.0);
    // both gradients are differenced integration noise here, so only an absolute
    // bound is meaningful
    for (double x : s.delta) EXPECT_LT(std::abs(x), 1e-7);
    EXPECT_TRUE(s.ordered);
    EXPECT_LT(s.radius_defect, 1e-8);
    for (std::size_t i = 0; i < s.r.size(); ++i) {
      EXPECT_EQ(s.u[i], 0.0);
      EXPECT_NEAR(s.G[i], s.G[0], 1e-8);  // tracks take different adaptive steps
      EXPECT_NEAR(s.n[i], 1 - 3 * s.G[i], 1e-15);
    }
  }
}

TEST(Fields, GaussianBlowsUp) {
  const auto res = evolve_fan(gaussian_d3());
  ASSERT_EQ(res.report.verdict, Verdict::blowup);
  const double t_star = *res.report.t_star_global;
  EXPECT_NEAR(t_star, 58.3536, 1e-3);
  EXPECT_GT(*res.report.argmin_r0, 0.0);
  EXPECT_FALSE(res.skipped_times.empty());
  for (const auto& s : res.snapshots) {
    EXPECT_LT(s.t, t_star);
    if (s.t < 0.95 * t_star) EXPECT_TRUE(s.ordered) << s.t;
    EXPECT_LT(s.radius_defect, 1e-7);
  }
  EXPECT_EQ(res.snapshots.size() + res.skipped_times.size(), 41u);
  EXPECT_GT(res.snapshots.front().delta_max, 1e-3);  // not a simple wave
  ASSERT_TRUE(res.axial.has_value());
  EXPECT_NEAR(axial_density_trace(res).n.front().value, 1 - 3 * 0.3, 1e-14);
}

TEST(Fields, BlowupTimeStableUnderRefinement) {
  auto a = gaussian_d3();
  auto b = gaussian_d3();
  b.config = b.config.with_tolerance(1e-12);
  const double ta = *evolve_fan(a).report.t_star_global;
  const double tb = *evolve_fan(b).report.t_star_global;
  EXPECT_NEAR(ta / tb, 1.0, 1e-6);
}

// A simple wave keeps (F, G) functionally dependent and on its own curve.
TEST(Fields, LogFamilyStaysASimpleWave) {
  const auto res = evolve_fan(log_family_wave());
  EXPECT_EQ(res.report.verdict, Verdict::smooth_to_horizon);
  ASSERT_EQ(res.snapshots.size(), 41u);
  for (const auto& s : res.snapshots) {
    EXPECT_LT(s.delta_max, 1e-6) << s.t;
    for (std::size_t i = 0; i < s.r.size(); ++i) {
      EXPECT_NEAR(phase::first_integral_constant(Dim(2), {s.G[i], s.F[i]}).constant, -2.0, 1e-6);
    }
  }
  const auto dep = functional_dependence_grid(res);
  EXPECT_EQ(dep.size(), res.snapshots.size());
}

TEST(Fields, TimeDifferenceAgreesWithPdeForm) {
  auto sc = gaussian_d3(40.0, 65);
  sc.snapshot_times = {5.0, 20.0};
  FanOptions diff;
  diff.time_derivative = TimeDerivative::time_difference;
  const auto a = evolve_fan(sc);
  const auto b = evolve_fan(sc, diff);
  ASSERT_EQ(a.snapshots.size(), 2u);
  ASSERT_EQ(b.snapshots.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& x = a.snapshots[k];
    const auto& y = b.snapshots[k];
    for (std::size_t i = 0; i < x.delta.size(); ++i) {
      EXPECT_NEAR(x.delta[i], y.delta[i], 1e-5 * x.delta_scale);
    }
  }
}

TEST(Fields, ThreadCountDoesNotChangeResults) {
  auto sc = gaussian_d3(30.0, 65);
  sc.snapshot_times = uniform_times(30.0, 7);
  FanOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = evolve_fan(sc, one);
  const auto b = evolve_fan(sc, many);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    EXPECT_EQ(a.snapshots[k].r, b.snapshots[k].r);
    EXPECT_EQ(a.snapshots[k].F, b.snapshots[k].F);
    EXPECT_EQ(a.snapshots[k].delta, b.snapshots[k].delta);
  }
}

TEST(Fields, TabulatedDataMatchAnalytic) {
  const auto grid = clustered_grid(3.0, 17, 1.0);
  std::vector<double> F(grid.size(), 0.1), G(grid.size(), 0.15);
  auto tab = tabulated_scenario(Dim(3), grid, F, G, 20.0);
  tab.snapshot_times = {0.0, 10.0, 20.0};
  auto ana = affine_scenario(Dim(3), 0.15, 0.1, grid, 20.0);
  ana.snapshot_times = tab.snapshot_times;
  const auto a = evolve_fan(tab);
  const auto b = evolve_fan(ana);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(a.snapshots[k].r[i], b.snapshots[k].r[i]);
  }
  EXPECT_THROW(tabulated_scenario(Dim(3), grid, {0.1}, G, 20.0), InputError);
}

TEST(Fields, AxialTraceNeedsTheAxis) {
  auto sc = gaussian_d3(10.0, 20);
  sc.snapshot_times = {0.0, 10.0};
  auto res = evolve_fan(sc);
  res.axial.reset();
  EXPECT_THROW(axial_density_trace(res), InputError);
  res.snapshots.resize(1);
  EXPECT_THROW(functional_dependence_grid(res), InputError);
}
