#pragma once

// Simple waves: solutions whose characteristics all share one first-integral
// constant C, so that F = F(G) = sign * sqrt(F^2(G; C)) across the whole fan.
// G then obeys the single transport equation
//     G_t + F(G) r G_r = F(G) (1 - dG),
// and s = G_r along a characteristic satisfies the Bernoulli equation
//     s' = -K2 s^2 + K1 s,   K1 = F'(G)(1 - dG) - (1 + d) F,   K2 = r F'(G).

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eplab/error.hpp"
#include "eplab/ode.hpp"
#include "eplab/phase.hpp"

namespace eplab::simplewave {

struct SimpleWaveFamily {
  phase::FirstIntegral integral;
  int sign = 1;  // branch of F = sign * sqrt(F^2(G))

  Dim dim() const { return integral.dim; }

  double f_squared(double G) const { return phase::f_squared_of_g(integral.dim, integral, G); }

  double velocity(double G) const {
    const double f2 = f_squared(G);
    if (f2 < 0.0) {
      throw InputError("G = " + std::to_string(G) + " is outside the family's admissible range");
    }
    return sign * std::sqrt(f2);
  }

  // dF/dG from the differentiated first integral: 2 F F' = d(F^2)/dG.
  double slope(double G) const {
    const Dim d = integral.dim;
    const double dd = d.real();
    double dphi;
    if (d.value() == 2) {
      dphi = std::log(std::abs(1.0 - 2.0 * G)) + 1.0 + integral.constant;
    } else {
      dphi = 2.0 / (dd - 2.0) -
             2.0 * integral.constant * std::pow(std::abs(1.0 - dd * G), 2.0 / dd - 1.0);
    }
    const double F = velocity(G);
    if (F == 0.0) throw NumericalError("F'(G) diverges at a turning point");
    return dphi / (2.0 * F);
  }
};

inline SimpleWaveFamily make_family(Dim d, double constant, int sign) {
  if (sign != 1 && sign != -1) throw InputError("branch sign must be +1 or -1");
  if (!std::isfinite(constant)) throw InputError("family constant must be finite");
  return {phase::FirstIntegral{d, constant, 1}, sign};
}

// The family through the affine state (G, F) = (0, |beta|); its constant is
// -1 - 2 beta^2 for d = 2 and 1/(d-2) + beta^2 otherwise.
inline SimpleWaveFamily affine_family(Dim d, double beta) {
  if (beta == 0.0) throw InputError("beta must be non-zero");
  const phase::FirstIntegral c = phase::first_integral_constant(d, {0.0, std::abs(beta)});
  return {c, 1};
}

// F0(r_i) = sign * sqrt(F^2(G0(r_i))) on the given radii.
inline std::vector<double> velocity_from_density_profile(
    const SimpleWaveFamily& family, const std::function<double(double)>& G0,
    const std::vector<double>& radii) {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    const double g = G0(r);
    const double f2 = family.f_squared(g);
    if (f2 < 0.0) {
      throw InputError("F^2 = " + std::to_string(f2) + " < 0 at r = " + std::to_string(r) +
                       ": datum is inadmissible for this family");
    }
    out.push_back(family.sign * std::sqrt(f2));
  }
  return out;
}

struct TransportData {
  double speed = 0.0;   // F(G) r
  double source = 0.0;  // F(G) (1 - dG)
};

inline TransportData simple_wave_pde_rhs(const SimpleWaveFamily& family, double G, double r) {
  const double F = family.velocity(G);
  return {F * r, F * (1.0 - family.dim().real() * G)};
}

struct BernoulliCoefficients {
  double K1 = 0.0;
  double K2 = 0.0;
};

inline BernoulliCoefficients bernoulli_coefficients(const SimpleWaveFamily& family, double G,
                                                    double r) {
  const double dd = family.dim().real();
  const double F = family.velocity(G);
  const double Fp = family.slope(G);
  return {Fp * (1.0 - dd * G) - (1.0 + dd) * F, r * Fp};
}

// Time-parameterized form of K1 with F'(G) replaced by F'/G' along the orbit;
// only F = 0 remains singular.
inline double k1_along_orbit(Dim d, PhasePoint p) {
  return (-p.velocity * p.velocity - p.field) / p.velocity - (1.0 + d.real()) * p.velocity;
}

// Gradient s = G_r along the characteristic starting at (r0, G0) of the
// family. Internally the Bernoulli equation is replaced by its linearization:
// with v = r s and u = r F_r = F'(G) v, the pair (u, v) = (p1, p2)/q follows
// the regular linear system of the characteristics module. Radii and p are
// carried relative to r0, so r0 = 0 is allowed.
struct GradientEvolution {
  Dim d{1};
  double r0 = 0.0;
  double s0 = 0.0;
  // (G, F, rho = r/r0, q, p1/r0, p2/r0)
  ode::DenseTrajectory<6> trajectory;
  // 1 - dG0 - r0 s0; the Bernoulli dynamics are evolved even when this is not
  // positive, but such data are not physical.
  double initial_density = 1.0;
  bool blown_up = false;
  std::optional<double> t_star;

  double s(double t) const {
    const auto y = trajectory(t);
    return y[5] / (y[3] * y[2]);
  }
  PhasePoint orbit(double t) const {
    const auto y = trajectory(t);
    return {y[0], y[1]};
  }
  double radius(double t) const { return r0 * trajectory(t)[2]; }
  double t_end() const { return trajectory.t_end(); }
};

inline GradientEvolution evolve_gradient(const SimpleWaveFamily& family, double G0, double r0,
                                         double s0, double t_end,
                                         const ode::IntegrationConfig& config = {}) {
  const Dim d = family.dim();
  const double dd = d.real();
  if (!std::isfinite(s0)) throw InputError("s0 must be finite");
  if (!(r0 >= 0.0)) throw InputError("r0 must be >= 0");
  if (!(t_end > 0.0)) throw InputError("t_end must be positive");
  const double F0 = family.velocity(G0);
  const double Fp0 = s0 == 0.0 ? 0.0 : family.slope(G0);

  using S = ode::State<6>;
  auto rhs = [dd, r0](double, const S& y) {
    const double g = y[0], f = y[1];
    return S{f * (1.0 - dd * g), -f * f - g, f * y[2], r0 * y[4],
             -2.0 * f * y[4] - y[5], (1.0 - dd * g) * y[4] - dd * f * y[5]};
  };
  const std::function<double(double, const S&)> q_event = [](double, const S& y) { return y[3]; };

  GradientEvolution out;
  out.d = d;
  out.r0 = r0;
  out.s0 = s0;
  out.initial_density = 1.0 - dd * G0 - r0 * s0;
  out.trajectory = ode::integrate_until<6>(rhs, S{G0, F0, 1.0, 1.0, Fp0 * s0, s0},
                                           config.with_t_max(t_end), q_event,
                                           ode::Direction::falling);
  if (out.trajectory.status() == ode::Status::stopped) {
    const auto hit = ode::find_event(out.trajectory, q_event, ode::Direction::falling);
    if (!hit) throw NumericalError("gradient blow-up flagged but not located");
    out.trajectory.truncate(hit->t);
    out.blown_up = true;
    out.t_star = hit->t;
  } else if (out.trajectory.truncated()) {
    throw NumericalError(std::string("gradient integration failed: ") +
                         ode::to_string(out.trajectory.status()));
  }
  return out;
}

// Frozen-coefficient solution of the Bernoulli equation with K1 = -(d+2)|beta|
// and K2 = -r0 |beta|.
inline double asymptotic_gradient(Dim d, double beta, double r0, double s0, double t) {
  const double k = (d.real() + 2.0) * std::abs(beta);
  const double growth = std::exp(k * t);
  const double denom = (d.real() + 2.0) * growth + (1.0 - growth) * r0 * s0;
  if (!(denom > 0.0)) {
    throw InputError("denominator vanishes: the frozen-coefficient gradient has blown up by t = " +
                     std::to_string(t));
  }
  return (d.real() + 2.0) * s0 / denom;
}

// Zero of the denominator above, present only when r0 s0 > d + 2.
inline std::optional<double> asymptotic_blowup_time(Dim d, double beta, double r0, double s0) {
  const double m = d.real() + 2.0;
  const double x = r0 * s0;
  if (!(x > m)) return std::nullopt;
  return std::log(x / (x - m)) / (m * std::abs(beta));
}

}  // namespace eplab::simplewave
