#pragma once

// Phase-plane analysis of the characteristic system
//
//     field'    = velocity * (1 - d * field)
//     velocity' = -velocity^2 - field
//
// where `field` and `velocity` are the radial amplitudes of E = field * r and
// V = velocity * r along one characteristic. Orbits on the admissible side
// field < 1/d are closed curves around the origin; this header computes their
// first integrals, turning points and periods.
//
// Turning-point search and the period quadrature work in the compressed
// coordinate w = ln(1 - d * field). In that coordinate the orbit equation reads
// d(F^2)/dw = 2 (F^2 + field) / d, and the scaled squared velocity
// h(w) = F^2 * exp(-2w/d) stays representable even when the lower turning point
// lies far below the double range (d = 2 close to field = 1/2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "eplab/error.hpp"
#include "eplab/ode.hpp"

namespace eplab {

// Spatial dimension of the radially symmetric problem.
class Dim {
 public:
  explicit Dim(int value) : value_(value) {
    if (value < 1) throw InputError("dimension must be >= 1, got " + std::to_string(value));
  }
  int value() const { return value_; }
  double real() const { return static_cast<double>(value_); }
  friend bool operator==(Dim, Dim) = default;

 private:
  int value_;
};

struct PhasePoint {
  double field = 0.0;     // G: E = G r
  double velocity = 0.0;  // F: V = F r
};

}  // namespace eplab

namespace eplab::phase {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline PhasePoint gf_rhs(Dim d, PhasePoint p) {
  return {p.velocity * (1.0 - d.real() * p.field), -p.velocity * p.velocity - p.field};
}

// Upper end of the amplitude range with closed orbits through (amplitude, 0).
// For d >= 2 this is the positive-density bound 1/d; for d = 1 orbits close
// only while C1 < 0, i.e. amplitude < 1/2.
inline double amplitude_bound(Dim d) { return d.value() == 1 ? 0.5 : 1.0 / d.real(); }

struct FirstIntegral {
  Dim dim{1};
  double constant = 0.0;
  int branch = 1;  // sign of 1 - d * field; +1 on the admissible side
};

inline FirstIntegral first_integral_constant(Dim d, PhasePoint p0) {
  const double dd = d.real();
  const double G = p0.field;
  const double F = p0.velocity;
  const double gap = 1.0 - dd * G;
  if (gap == 0.0 || !std::isfinite(gap)) {
    throw InputError("first integral is degenerate at field = 1/d");
  }
  FirstIntegral c{d, 0.0, gap > 0.0 ? 1 : -1};
  if (d.value() == 2) {
    c.constant = (1.0 + 2.0 * F * F) / (2.0 * G - 1.0) - std::log(std::abs(1.0 - 2.0 * G));
  } else {
    c.constant = (1.0 - 2.0 * G + (dd - 2.0) * F * F) /
                 ((dd - 2.0) * std::pow(std::abs(gap), 2.0 / dd));
  }
  return c;
}

// F^2 on the level set of `c` at the given field value. Negative values mean
// the level set does not reach this field value.
inline double f_squared_of_g(Dim d, const FirstIntegral& c, double G) {
  const double dd = d.real();
  if (d.value() == 2) {
    return 0.5 * ((2.0 * G - 1.0) * std::log(std::abs(1.0 - 2.0 * G)) +
                  c.constant * (2.0 * G - 1.0) - 1.0);
  }
  return (2.0 * G - 1.0) / (dd - 2.0) + c.constant * std::pow(std::abs(1.0 - dd * G), 2.0 / dd);
}

// Bounded-orbit test for data on the admissible side.
inline bool is_bounded(Dim d, PhasePoint p) {
  if (!(1.0 - d.real() * p.field > 0.0)) return false;
  if (d.value() >= 2) return true;
  const double gap = 1.0 - p.field;
  return (p.velocity * p.velocity + 2.0 * p.field - 1.0) / (gap * gap) < 0.0;
}

inline double to_log_gap(Dim d, double field) { return std::log1p(-d.real() * field); }
inline double from_log_gap(Dim d, double w) { return -std::expm1(w) / d.real(); }

namespace detail {

// h(w) = F^2 exp(-2w/d) on the level set `constant`, with w = ln(1 - d G),
// plus its first three w-derivatives.
class ScaledLevelSet {
 public:
  ScaledLevelSet(Dim d, double constant) : d_(d.real()), two_(d.value() == 2), c_(constant) {}

  double value(double w) const {
    if (two_) return 0.5 * (-(w + c_) - std::exp(-w));
    return -a(w) / d_ - 2.0 * b(w) / (d_ * (d_ - 2.0)) + c_;
  }
  double d1(double w) const { return 2.0 / (d_ * d_) * (a(w) - b(w)); }
  double d2(double w) const {
    return -2.0 / (d_ * d_) * (b(w) + 2.0 / d_ * (a(w) - b(w)));
  }
  double d3(double w) const {
    const double k = 1.0 - 2.0 / d_;
    return -2.0 / (d_ * d_) * (b(w) * k * k - 4.0 / (d_ * d_) * a(w));
  }
  // exp(-w/d): the factor turning 1/sqrt(h) into 1/F.
  double weight(double w) const { return std::exp(-w / d_); }

 private:
  double a(double w) const { return std::exp(-2.0 * w / d_); }
  double b(double w) const { return two_ ? 1.0 : std::exp(w * (1.0 - 2.0 / d_)); }

  double d_;
  bool two_;
  double c_;
};

template <class Fn>
double polish_root(Fn&& fn, double lo, double hi) {
  const double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  auto tol = [](double x, double y) {
    return std::abs(x - y) <=
           4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(x), std::abs(y));
  };
  std::uintmax_t iters = 300;
  const auto [a, b] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tol, iters);
  return std::abs(fn(a)) <= std::abs(fn(b)) ? a : b;
}

}  // namespace detail

struct TurningPoints {
  double lower = 0.0;      // G-, may be -inf when below the double range
  double upper = 0.0;      // G+
  double log_lower = 0.0;  // ln(1 - d G-), always finite
  double log_upper = 0.0;  // ln(1 - d G+)
};

inline TurningPoints turning_points(Dim d, const FirstIntegral& c) {
  if (c.branch != 1) {
    throw InputError("no closed orbit on the branch field > 1/d");
  }
  const detail::ScaledLevelSet level(d, c.constant);
  auto h = [&](double w) { return level.value(w); };
  const double at_axis = h(0.0);
  if (!(at_axis > 1e-15 * (1.0 + std::abs(c.constant)))) {
    throw InputError("degenerate orbit: the level set collapses to the origin");
  }

  double lo = -1.0;
  while (h(lo) > 0.0) {
    lo *= 2.0;
    if (lo < -4096.0) throw NumericalError("upper turning point not bracketed");
  }
  double hi = 1.0;
  while (h(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12) {
      throw NumericalError("lower turning point not bracketed: orbit is unbounded");
    }
  }
  TurningPoints tp;
  tp.log_upper = detail::polish_root(h, lo, lo == -1.0 ? 0.0 : lo / 2.0);
  tp.log_lower = detail::polish_root(h, hi == 1.0 ? 0.0 : hi / 2.0, hi);
  tp.upper = from_log_gap(d, tp.log_upper);
  tp.lower = from_log_gap(d, tp.log_lower);
  return tp;
}

// Closed-orbit period from the level-set integral
//     T = 2 * int_{G-}^{G+} dG / ((1 - dG) F(G)) = (2/d) * int_{w+}^{w-} e^{-w/d} / sqrt(h(w)) dw,
// evaluated with tanh-sinh on pieces split at the axis crossing w = 0. Within
// 1e-3 (relative to the orbit width, if smaller) of a turning point h is replaced by its cubic Taylor polynomial about
// the root so that the inverse-square-root endpoint is resolved without
// cancellation.
inline double period_by_quadrature(Dim d, const FirstIntegral& c, const TurningPoints& tp) {
  const detail::ScaledLevelSet level(d, c.constant);
  const double wu = tp.log_upper;
  const double wl = tp.log_lower;
  const double taylor_radius = 1e-3 * std::min(1.0, wl - wu);

  auto near_root = [&](double root, double delta) {
    return delta * (level.d1(root) + delta * (level.d2(root) / 2.0 + delta * level.d3(root) / 6.0));
  };
  auto integrand = [&](double w, double a, double b, bool a_root, bool b_root, double wc) {
    // wc is a - w (< 0) near the left end, b - w (> 0) near the right end
    double hv;
    if (wc < 0.0 && a_root && -wc < taylor_radius) {
      hv = near_root(a, -wc);
    } else if (wc > 0.0 && b_root && wc < taylor_radius) {
      hv = near_root(b, -wc);
    } else {
      hv = level.value(w);
    }
    if (!(hv > 0.0)) return 0.0;
    return level.weight(w) / std::sqrt(hv);
  };

  std::vector<double> breaks{wu, 0.0};
  if (wl > 64.0 * d.real()) breaks.push_back(32.0 * d.real());
  breaks.push_back(wl);

  boost::math::quadrature::tanh_sinh<double> rule(18);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    const bool a_root = i == 0;
    const bool b_root = i + 2 == breaks.size();
    auto f = [&](double w, double wc) { return integrand(w, a, b, a_root, b_root, wc); };
    double err = 0.0;
    total += rule.integrate(f, a, b, 1e-13, &err);
  }
  return 2.0 * total / d.real();
}

enum class PeriodMethod { event, quadrature };

inline void require_amplitude(Dim d, double amplitude) {
  if (!(amplitude > 0.0) || !(amplitude < amplitude_bound(d))) {
    throw InputError("amplitude G+ = " + std::to_string(amplitude) + " outside (0, " +
                     std::to_string(amplitude_bound(d)) + ") for d = " +
                     std::to_string(d.value()));
  }
}

// Half-period event: starting from (G+, 0) the velocity first turns negative and
// returns to zero (rising) at G-; the orbit is symmetric about velocity = 0.
// The absolute tolerance is tightened to rel_tol * G+ so that small orbits are
// resolved to the same relative accuracy as large ones.
inline double period_by_event(Dim d, double amplitude, const ode::IntegrationConfig& config) {
  const TurningPoints tp = turning_points(d, first_integral_constant(d, {amplitude, 0.0}));
  if (!(tp.log_lower < 600.0)) {
    throw NumericalError("orbit leaves the double range (G- = -exp(" +
                         std::to_string(tp.log_lower) + ")); use the quadrature method");
  }
  ode::IntegrationConfig cfg = config;
  cfg.abs_tol = std::min(config.abs_tol, config.rel_tol * amplitude);
  const double horizon = std::max(two_pi, std::numbers::pi * std::sqrt(d.real()));
  auto rhs = [d](double, const ode::State<2>& y) {
    const PhasePoint r = gf_rhs(d, {y[0], y[1]});
    return ode::State<2>{r.field, r.velocity};
  };
  const std::function<double(double, const ode::State<2>&)> velocity =
      [](double, const ode::State<2>& y) { return y[1]; };
  const auto traj = ode::integrate_until<2>(rhs, {amplitude, 0.0}, cfg.with_t_max(horizon),
                                            velocity, ode::Direction::rising);
  const auto hit = ode::find_event(traj, velocity, ode::Direction::rising);
  if (!hit) {
    throw NumericalError(std::string("half-period event not found (integration ") +
                         ode::to_string(traj.status()) + ")");
  }
  return 2.0 * hit->t;
}

inline double period(Dim d, double amplitude, PeriodMethod method,
                     const ode::IntegrationConfig& config = {}) {
  require_amplitude(d, amplitude);
  if (method == PeriodMethod::event) return period_by_event(d, amplitude, config);
  const FirstIntegral c = first_integral_constant(d, {amplitude, 0.0});
  return period_by_quadrature(d, c, turning_points(d, c));
}

// Small-amplitude period law T = 2 pi (1 + (d-1)(d-4) eps^2 / 24).
inline double period_asymptotic(Dim d, double eps) {
  if (eps < 0.0) throw InputError("deviation must be non-negative");
  const double dd = d.real();
  return two_pi * (1.0 + (dd - 1.0) * (dd - 4.0) * eps * eps / 24.0);
}

struct OrbitDescriptor {
  Dim dim{1};
  FirstIntegral integral;
  TurningPoints turning;
  double period = 0.0;
};

inline OrbitDescriptor describe_orbit(Dim d, double amplitude) {
  require_amplitude(d, amplitude);
  OrbitDescriptor orbit;
  orbit.dim = d;
  orbit.integral = first_integral_constant(d, {amplitude, 0.0});
  orbit.turning = turning_points(d, orbit.integral);
  orbit.period = period_by_quadrature(d, orbit.integral, orbit.turning);
  return orbit;
}

// Period of the closed orbit through an arbitrary admissible point; the
// origin itself is assigned the linear period 2 pi.
inline double period_through(Dim d, PhasePoint p) {
  if (p.field == 0.0 && p.velocity == 0.0) return two_pi;
  const FirstIntegral c = first_integral_constant(d, p);
  const TurningPoints tp = turning_points(d, c);
  return period_by_quadrature(d, c, tp);
}

struct OrbitSample {
  double t = 0.0;
  PhasePoint point;
};

// One period of the orbit through (amplitude, 0), sampled uniformly in time.
inline std::vector<OrbitSample> sample_orbit(Dim d, double amplitude, std::size_t samples,
                                             const ode::IntegrationConfig& config = {}) {
  if (samples < 2) throw InputError("need at least two orbit samples");
  if (amplitude == 0.0) return {OrbitSample{0.0, {0.0, 0.0}}};
  const double T = period(d, amplitude, PeriodMethod::quadrature, config);
  auto rhs = [d](double, const ode::State<2>& y) {
    const PhasePoint r = gf_rhs(d, {y[0], y[1]});
    return ode::State<2>{r.field, r.velocity};
  };
  const auto traj = ode::integrate<2>(rhs, {amplitude, 0.0}, config.with_t_max(T));
  if (traj.truncated()) throw NumericalError("orbit integration failed");
  std::vector<OrbitSample> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(samples - 1);
    const auto y = traj(t);
    out.push_back({t, {y[0], y[1]}});
  }
  return out;
}

}  // namespace eplab::phase
