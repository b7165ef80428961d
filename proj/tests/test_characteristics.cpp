#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "eplab/characteristics.hpp"
#include "eplab/error.hpp"
#include "eplab/phase.hpp"
#include "oracles.hpp"

using namespace eplab;
using characteristics::CharacteristicInit;

namespace {

ode::IntegrationConfig tol(double t) { return ode::IntegrationConfig{}.with_tolerance(t); }

const CharacteristicInit blowup_d3{1.0, 0.2, 0.0, 0.0, 0.1};

}  // namespace

TEST(Characteristics, InitialDensityMustBePositive) {
  EXPECT_THROW(CharacteristicInit({1.0, 0.2, 0.0, 0.0, 0.4}).validate(Dim(3)), InputError);
  EXPECT_THROW(CharacteristicInit({-1.0, 0.0, 0.0, 0.0, 0.0}).validate(Dim(3)), InputError);
  EXPECT_NO_THROW(CharacteristicInit({1.0, 0.2, 0.0, 0.0, 0.39}).validate(Dim(3)));
  EXPECT_THROW(characteristics::track(blowup_d3, Dim(3), -1.0), InputError);
}

TEST(Characteristics, AffineDataStaySmooth) {
  const auto tr = characteristics::track({1.0, 0.2, 0.0, 0.0, 0.0}, Dim(3), 200.0);
  EXPECT_FALSE(tr.blowup.blown_up);
  EXPECT_EQ(tr.blowup.q_min, 1.0);
  for (const auto& s : tr.samples()) {
    EXPECT_EQ(s.q, 1.0);
    EXPECT_EQ(s.u, 0.0);
    EXPECT_EQ(s.v, 0.0);
    EXPECT_NEAR(s.n, 1.0 - 3 * s.G, 1e-15);
    EXPECT_GT(s.n, 0.0);
  }
  const auto uv = characteristics::riccati_direct({1.0, 0.2, 0.0, 0.0, 0.0}, Dim(3), 50.0);
  for (const auto& y : uv.states()) {
    EXPECT_EQ(y[2], 0.0);
    EXPECT_EQ(y[3], 0.0);
  }
}

// (u0, v0) = (u0, 0) at (G0, 0) is a multiple of the orbit's own tangent
// direction, so q(t) = 1 - (u0/G0) F(t) exactly.
TEST(Characteristics, TangentDatumFollowsTheOrbit) {
  const CharacteristicInit init{1.0, 0.2, 0.0, 0.1, 0.0};
  const auto tr = characteristics::track(init, Dim(3), 100.0);
  EXPECT_FALSE(tr.blowup.blown_up);
  for (const auto& s : tr.samples()) EXPECT_NEAR(s.q, 1.0 - 0.5 * s.F, 1e-8);
}

TEST(Characteristics, GenericDatumBlowsUp) {
  const auto tr = characteristics::track(blowup_d3, Dim(3), 3000.0);
  ASSERT_TRUE(tr.blowup.blown_up);
  EXPECT_NEAR(*tr.blowup.t_star, 145.49, 0.01);
  EXPECT_NEAR(tr.trajectory.back()[characteristics::Q], 0.0, 1e-10);
  EXPECT_DOUBLE_EQ(tr.t_end(), *tr.blowup.t_star);
  EXPECT_LE(tr.blowup.q_min, 1e-10);
}

TEST(Characteristics, BlowupTimeConvergesUnderRefinement) {
  for (int d : {2, 3, 5}) {
    const CharacteristicInit init{1.0, d == 5 ? 0.15 : 0.2, 0.0, 0.0, -0.3};
    const auto a = characteristics::track(init, Dim(d), 3000.0, tol(1e-10));
    const auto b = characteristics::track(init, Dim(d), 3000.0, tol(1e-12));
    ASSERT_TRUE(a.blowup.blown_up && b.blowup.blown_up) << d;
    EXPECT_NEAR(*a.blowup.t_star / *b.blowup.t_star, 1.0, 1e-6) << d;
  }
}

// Blow-up time against a fixed-step RK4 sign scan of q on a short-lived datum.
TEST(Characteristics, BlowupTimeMatchesSignScan) {
  const CharacteristicInit init{1.0, 0.2, 0.1, -1.5, -0.4};
  const auto tr = characteristics::track(init, Dim(3), 50.0);
  ASSERT_TRUE(tr.blowup.blown_up);
  const oracle::Field<6> f = [](double, const oracle::Vec<6>& s) {
    const double r = s[0], G = s[1], F = s[2], p1 = s[4], p2 = s[5];
    return oracle::Vec<6>{F * r, F * (1 - 3 * G), -F * F - G, p1, -2 * F * p1 - p2,
                          (1 - 3 * G) * p1 - 3 * F * p2};
  };
  const std::function<double(const oracle::Vec<6>&)> q = [](const oracle::Vec<6>& s) { return s[3]; };
  const auto t = oracle::first_falling_zero<6>(f, {1.0, 0.2, 0.1, 1.0, -1.5, -0.4}, q, 1e-6, 50.0);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*tr.blowup.t_star, *t, 1e-6);
}

TEST(Characteristics, NoBlowupForD4) {
  const auto tr = characteristics::track(blowup_d3, Dim(4), 50 * phase::two_pi);
  EXPECT_FALSE(tr.blowup.blown_up);
  EXPECT_GT(tr.blowup.q_min, 0.0);
  EXPECT_NEAR(characteristics::default_horizon(Dim(4), blowup_d3), 50 * phase::two_pi, 1e-6);
}

TEST(Characteristics, QuadratureOfP1ReproducesQ) {
  for (const CharacteristicInit& init :
       {blowup_d3, CharacteristicInit{0.5, 0.1, 0.2, 0.3, -0.2}, CharacteristicInit{1.0, 0.0, 0.0, 0.0, 0.0}}) {
    const auto tr = characteristics::track(init, Dim(3), 150.0);
    const auto chk = characteristics::q_of_t(tr);
    EXPECT_EQ(chk.q_quadrature.front(), 1.0);
    EXPECT_EQ(chk.q_integrated.front(), 1.0);
    EXPECT_LT(chk.max_abs_diff, 1e-8);
  }
}

// Equivalence of the two routes: the nonlinear (u, v) system integrated directly
// against p/q from the linear system, up to 0.95 t*. Both run at 1e-12: near
// 0.95 t* |v| reaches ~25 and the default tolerance leaves ~1e-5 of drift.
TEST(Characteristics, RadonEquivalence) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.5, 0.5), G(-0.1, 0.25);
  int checked = 0;
  for (int d : {2, 3, 5}) {
    for (int k = 0; k < 4; ++k) {
      CharacteristicInit init{1.0, G(rng) * 3.0 / (d + 1), U(rng) * 0.4, U(rng), U(rng)};
      if (!(init.v0 + d * init.G0 < 1.0)) continue;
      const auto tr = characteristics::track(init, Dim(d), 400.0, tol(1e-12));
      const double t_end = tr.blowup.blown_up ? 0.95 * *tr.blowup.t_star : tr.t_end();
      const auto uv = characteristics::riccati_direct(init, Dim(d), t_end, tol(1e-12));
      ASSERT_FALSE(uv.truncated());
      for (int j = 0; j <= 400; ++j) {
        const double t = std::min(t_end, t_end * j / 400.0);
        const auto s = tr.sample(t);
        const auto y = uv(t);
        EXPECT_NEAR(y[2], s.u, 1e-6);
        EXPECT_NEAR(y[3], s.v, 1e-6);
      }
      ++checked;
    }
  }
  EXPECT_GE(checked, 8);
}

TEST(Characteristics, RiccatiTimeReversal) {
  const double t_end = 0.9 * 145.49;
  const auto fwd = characteristics::riccati_direct(blowup_d3, Dim(3), t_end, tol(1e-12));
  ASSERT_FALSE(fwd.truncated());
  const auto end = fwd.back();
  auto back_rhs = [](double, const ode::State<4>& s) {
    const double g = s[0], f = s[1], u = s[2], v = s[3];
    return ode::State<4>{-f * (1 - 3 * g), f * f + g, u * u + 2 * f * u + v, u * v - (1 - 3 * g) * u + 3 * f * v};
  };
  const auto bwd = ode::integrate<4>(back_rhs, end, tol(1e-12).with_t_max(t_end));
  EXPECT_NEAR(bwd.back()[2], blowup_d3.u0, 1e-7);
  EXPECT_NEAR(bwd.back()[3], blowup_d3.v0, 1e-7);
}

TEST(Characteristics, DensityAtStartAndNearBlowup) {
  const auto tr = characteristics::track(blowup_d3, Dim(3), 3000.0);
  const auto rep = characteristics::density(tr);
  const CharacteristicInit zero_v{1.0, 0.2, 0.0, 0.0, 0.0};
  EXPECT_NEAR(characteristics::density(characteristics::track(zero_v, Dim(3), 10.0)).n.front().value, 0.4,
              1e-15);
  // q dips repeatedly towards zero before t*
  ASSERT_GE(rep.q_minima.size(), 2u);
  for (const auto& m : rep.q_minima) {
    EXPECT_GT(m.value, 0.0);
    EXPECT_LT(m.t, *tr.blowup.t_star);
  }
  EXPECT_GT(rep.n_at_q_minima.back().value, rep.n_at_q_minima.front().value);
  // n -> +inf approaching t*
  EXPECT_GT(tr.sample(*tr.blowup.t_star - 1e-4).n, 1e2);
  EXPECT_GT(rep.per_period.size(), 10u);
}

TEST(Characteristics, RadialInvariant) {
  const CharacteristicInit init{1.0, 0.2, 0.0, 0.0, 0.0};
  const double T = phase::period(Dim(3), 0.2, phase::PeriodMethod::quadrature);
  const auto tr = characteristics::track(init, Dim(3), 10 * T);
  for (const auto& p : characteristics::radial_invariant(tr)) EXPECT_NEAR(p.value, 0.4, 1e-8);
  for (const auto& s : tr.samples()) {
    EXPECT_NEAR(s.r, characteristics::algebraic_radius(Dim(3), 1.0, 0.2, s.G), 1e-8);
  }

  const auto axial = characteristics::track({0.0, 0.2, 0.0, 0.0, 0.0}, Dim(3), 50.0);
  for (const auto& s : axial.samples()) EXPECT_EQ(s.r, 0.0);

  const auto d2 = characteristics::track({2.0, 0.1, 0.0, 0.0, 0.0}, Dim(2), 50.0);
  for (const auto& p : characteristics::radial_invariant(d2)) EXPECT_NEAR(p.value, 0.8 * 4.0, 1e-8);
}

// d lambda/dt = D (1 - lambda) and the D equation, by central differences
// of the dense output.
TEST(Characteristics, LambdaAndDivergenceEquations) {
  const auto tr = characteristics::track(blowup_d3, Dim(3), 3000.0);
  const double dd = 3.0;
  const double h = 1e-4;
  for (int k = 1; k < 200; ++k) {
    const double t = 0.9 * *tr.blowup.t_star * k / 200.0;
    const auto a = tr.sample(t - h), b = tr.sample(t + h), s = tr.sample(t);
    const double lam_dot = (b.lambda - a.lambda) / (2 * h);
    const double D_dot = (b.D - a.D) / (2 * h);
    const double scale = 1 + std::abs(s.D) + std::abs(s.lambda);
    EXPECT_NEAR(lam_dot, s.D * (1 - s.lambda), 1e-6 * scale * scale);
    EXPECT_NEAR(D_dot,
                -s.D * s.D + 2 * (dd - 1) * s.F * s.D - s.lambda - (dd - 1) * dd * s.F * s.F,
                1e-6 * scale * scale);
    EXPECT_NEAR(s.J, (dd - 1) * s.D * s.F - 0.5 * (dd - 1) * dd * s.F * s.F, 1e-14);
    EXPECT_NEAR(s.n, 1 - s.v - dd * s.G, 1e-14);
  }
}

TEST(Characteristics, SamplesDropTheSingularNode) {
  const auto tr = characteristics::track(blowup_d3, Dim(3), 3000.0);
  const auto s = tr.samples();
  EXPECT_EQ(s.size() + 1, tr.trajectory.size());
  for (const auto& x : s) EXPECT_TRUE(std::isfinite(x.u) && std::isfinite(x.n));
}
