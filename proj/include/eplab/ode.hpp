#pragma once

// Explicit Runge-Kutta-Fehlberg 4(5) integration with Hermite dense output and
// sign-change event location.
//
// States are fixed-size std::array values; right-hand sides are callables
// `State<N>(double t, const State<N>& y)`. Integration always starts at t = 0
// and runs forward to IntegrationConfig::t_max unless a guard fires or a stop
// event is crossed. Guards never throw: the returned trajectory carries a
// Status describing why it ended.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "eplab/error.hpp"

namespace eplab::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct IntegrationConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double t_max = 1.0;
  std::size_t max_steps = 20'000'000;
  // 0 selects the starting step automatically.
  double initial_step = 0.0;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
      throw InputError("integration tolerances must be positive");
    }
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
      throw InputError("t_max must be positive and finite");
    }
    if (!(max_step > 0.0)) throw InputError("max_step must be positive");
    if (max_steps == 0) throw InputError("max_steps must be positive");
    if (initial_step < 0.0) throw InputError("initial_step must be >= 0");
  }

  IntegrationConfig with_t_max(double t) const {
    IntegrationConfig copy = *this;
    copy.t_max = t;
    return copy;
  }

  IntegrationConfig with_tolerance(double tol) const {
    IntegrationConfig copy = *this;
    copy.abs_tol = tol;
    copy.rel_tol = tol;
    return copy;
  }
};

enum class Status {
  completed,           // reached t_max
  stopped,             // a stop event was crossed in the last step
  singular,            // step size fell below 1e-14 * t_max
  non_finite,          // state or derivative became NaN/inf
  max_steps_exceeded,
};

inline const char* to_string(Status s) {
  switch (s) {
    case Status::completed: return "completed";
    case Status::stopped: return "stopped";
    case Status::singular: return "singular";
    case Status::non_finite: return "non_finite";
    case Status::max_steps_exceeded: return "max_steps_exceeded";
  }
  return "unknown";
}

enum class Direction { rising, falling, any };

// True when the event value moves from `before` to `after` through zero in
// the requested direction. A start exactly at zero is not a crossing.
inline bool crosses(double before, double after, Direction dir) {
  const bool rising = before < 0.0 && after >= 0.0;
  const bool falling = before > 0.0 && after <= 0.0;
  switch (dir) {
    case Direction::rising: return rising;
    case Direction::falling: return falling;
    case Direction::any: return rising || falling;
  }
  return false;
}

template <std::size_t N>
struct EventRecord {
  double t = 0.0;
  State<N> state{};
  Direction direction = Direction::any;  // the direction actually observed
};

// Accepted integration nodes plus a piecewise Hermite interpolant. Each
// segment normally also stores the state and derivative at its midpoint
// (from an extra half step), giving a quintic through six conditions; a
// segment without a midpoint falls back to the cubic through the ends.
template <std::size_t N>
class DenseTrajectory {
 public:
  void push(double t, const State<N>& y, const State<N>& dydt) {
    push_node(t, y, dydt, false, State<N>{}, State<N>{});
  }
  // `mid_y`, `mid_dydt` belong to the segment that ends at t.
  void push(double t, const State<N>& y, const State<N>& dydt, const State<N>& mid_y,
            const State<N>& mid_dydt) {
    push_node(t, y, dydt, true, mid_y, mid_dydt);
  }

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<State<N>>& states() const { return states_; }
  const std::vector<State<N>>& derivatives() const { return derivatives_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const State<N>& back() const { return states_.back(); }

  Status status() const { return status_; }
  void set_status(Status s) { status_ = s; }
  // Ended early for a reason other than reaching t_max or a stop event.
  bool truncated() const {
    return status_ != Status::completed && status_ != Status::stopped;
  }

  State<N> operator()(double t) const {
    State<N> y{}, dy{};
    evaluate(t, y, dy);
    return y;
  }

  State<N> derivative(double t) const {
    State<N> y{}, dy{};
    evaluate(t, y, dy);
    return dy;
  }

  // Drops everything after t and closes the trajectory with the interpolated
  // node at t; the new last segment gets an interpolated midpoint.
  void truncate(double t) {
    if (empty() || t >= t_end()) return;
    if (t <= t_begin()) throw NumericalError("cannot truncate before the first node");
    State<N> y{}, dy{}, ym{}, dym{};
    evaluate(t, y, dy);
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const auto keep = static_cast<std::size_t>(it - times_.begin());
    evaluate(0.5 * (times_[keep - 1] + t), ym, dym);
    times_.resize(keep);
    states_.resize(keep);
    derivatives_.resize(keep);
    mid_states_.resize(keep);
    mid_derivatives_.resize(keep);
    has_mid_.resize(keep);
    push(t, y, dy, ym, dym);
  }

 private:
  void push_node(double t, const State<N>& y, const State<N>& dydt, bool mid,
                 const State<N>& ym, const State<N>& dym) {
    if (!times_.empty() && !(t > times_.back())) {
      throw NumericalError("trajectory times must be strictly increasing");
    }
    times_.push_back(t);
    states_.push_back(y);
    derivatives_.push_back(dydt);
    mid_states_.push_back(ym);
    mid_derivatives_.push_back(dym);
    has_mid_.push_back(mid);
  }

  std::size_t segment(double t) const {
    if (times_.empty()) throw NumericalError("empty trajectory");
    if (t < times_.front() || t > times_.back()) {
      throw InputError("time " + std::to_string(t) + " outside trajectory span");
    }
    if (times_.size() == 1) return 0;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return times_.size() - 2;
    return static_cast<std::size_t>(it - times_.begin()) - 1;
  }

  // Confluent Newton form on nodes {0,0,1/2,1/2,1,1} (or {0,0,1,1}) in the
  // scaled variable s = (t - t_i) / h.
  void evaluate(double t, State<N>& y, State<N>& dy) const {
    const std::size_t i = segment(t);
    if (i + 1 == times_.size()) {
      y = states_[i];
      dy = derivatives_[i];
      return;
    }
    const double h = times_[i + 1] - times_[i];
    const double s = (t - times_[i]) / h;
    const bool mid = has_mid_[i + 1];
    const int m = mid ? 6 : 4;
    const double z6[6] = {0.0, 0.0, 0.5, 0.5, 1.0, 1.0};
    const double z4[4] = {0.0, 0.0, 1.0, 1.0};
    const double* z = mid ? z6 : z4;
    for (std::size_t k = 0; k < N; ++k) {
      double q[6][6] = {};
      const double vals[3] = {states_[i][k], mid ? mid_states_[i + 1][k] : 0.0,
                              states_[i + 1][k]};
      const double ders[3] = {h * derivatives_[i][k], mid ? h * mid_derivatives_[i + 1][k] : 0.0,
                              h * derivatives_[i + 1][k]};
      const int node_idx[3] = {0, 1, 2};
      int row = 0;
      for (int n : node_idx) {
        if (!mid && n == 1) continue;
        q[row][0] = q[row + 1][0] = vals[n];
        q[row + 1][1] = ders[n];
        if (row > 0) q[row][1] = (q[row][0] - q[row - 1][0]) / (z[row] - z[row - 1]);
        row += 2;
      }
      for (int j = 2; j < m; ++j) {
        for (int r = j; r < m; ++r) {
          q[r][j] = (q[r][j - 1] - q[r - 1][j - 1]) / (z[r] - z[r - j]);
        }
      }
      double p = q[m - 1][m - 1];
      double dp = 0.0;
      for (int r = m - 2; r >= 0; --r) {
        dp = dp * (s - z[r]) + p;
        p = p * (s - z[r]) + q[r][r];
      }
      y[k] = p;
      dy[k] = dp / h;
    }
  }

  std::vector<double> times_;
  std::vector<State<N>> states_;
  std::vector<State<N>> derivatives_;
  std::vector<State<N>> mid_states_;
  std::vector<State<N>> mid_derivatives_;
  std::vector<bool> has_mid_;
  Status status_ = Status::completed;
};

namespace detail {

// Fehlberg coefficients; the fifth-order solution is propagated.
struct Fehlberg45 {
  static constexpr double c2 = 1.0 / 4.0, c3 = 3.0 / 8.0, c4 = 12.0 / 13.0, c6 = 1.0 / 2.0;
  static constexpr double a21 = 1.0 / 4.0;
  static constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
  static constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0, a43 = 7296.0 / 2197.0;
  static constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0,
                          a54 = -845.0 / 4104.0;
  static constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0,
                          a64 = 1859.0 / 4104.0, a65 = -11.0 / 40.0;
  static constexpr double b1 = 16.0 / 135.0, b3 = 6656.0 / 12825.0, b4 = 28561.0 / 56430.0,
                          b5 = -9.0 / 50.0, b6 = 2.0 / 55.0;
  // fifth minus fourth order weights
  static constexpr double e1 = 1.0 / 360.0, e3 = -128.0 / 4275.0, e4 = -2197.0 / 75240.0,
                          e5 = 1.0 / 50.0, e6 = 2.0 / 55.0;
};

template <std::size_t N>
bool all_finite(const State<N>& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

template <std::size_t N>
double scaled_rms(const State<N>& v, const State<N>& y, const IntegrationConfig& cfg) {
  double acc = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[k]);
    acc += (v[k] / sc) * (v[k] / sc);
  }
  return std::sqrt(acc / static_cast<double>(N));
}

template <std::size_t N, class Rhs>
double starting_step(Rhs& rhs, const State<N>& y0, const State<N>& f0,
                     const IntegrationConfig& cfg) {
  const double d0 = scaled_rms(y0, y0, cfg);
  const double d1 = scaled_rms(f0, y0, cfg);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, cfg.t_max);
  State<N> y1{};
  for (std::size_t k = 0; k < N; ++k) y1[k] = y0[k] + h0 * f0[k];
  const State<N> f1 = rhs(h0, y1);
  State<N> df{};
  for (std::size_t k = 0; k < N; ++k) df[k] = f1[k] - f0[k];
  const double d2 = all_finite(f1) ? scaled_rms(df, y0, cfg) / h0 : 1.0 / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, cfg.t_max, cfg.max_step});
}

// One Fehlberg step of size h from (t, y) with f = rhs(t, y): fifth-order
// solution and the difference to the embedded fourth-order one.
template <std::size_t N, class Rhs>
void fehlberg_step(Rhs& rhs, double t, const State<N>& y, const State<N>& f, double h,
                   State<N>& y5, State<N>& err) {
  using C = Fehlberg45;
  State<N> tmp{}, k2{}, k3{}, k4{}, k5{}, k6{};
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * C::a21 * f[i];
  k2 = rhs(t + C::c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (C::a31 * f[i] + C::a32 * k2[i]);
  k3 = rhs(t + C::c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) {
    tmp[i] = y[i] + h * (C::a41 * f[i] + C::a42 * k2[i] + C::a43 * k3[i]);
  }
  k4 = rhs(t + C::c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) {
    tmp[i] = y[i] + h * (C::a51 * f[i] + C::a52 * k2[i] + C::a53 * k3[i] + C::a54 * k4[i]);
  }
  k5 = rhs(t + h, tmp);
  for (std::size_t i = 0; i < N; ++i) {
    tmp[i] = y[i] + h * (C::a61 * f[i] + C::a62 * k2[i] + C::a63 * k3[i] + C::a64 * k4[i] +
                         C::a65 * k5[i]);
  }
  k6 = rhs(t + C::c6 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) {
    y5[i] = y[i] + h * (C::b1 * f[i] + C::b3 * k3[i] + C::b4 * k4[i] + C::b5 * k5[i] +
                        C::b6 * k6[i]);
    err[i] = h * (C::e1 * f[i] + C::e3 * k3[i] + C::e4 * k4[i] + C::e5 * k5[i] + C::e6 * k6[i]);
  }
}

template <std::size_t N, class Rhs>
DenseTrajectory<N> integrate_impl(Rhs& rhs, const State<N>& y0, const IntegrationConfig& cfg,
                                  const std::function<double(double, const State<N>&)>* stop,
                                  Direction stop_direction) {
  cfg.validate();
  if (!all_finite(y0)) throw InputError("initial state is not finite");

  DenseTrajectory<N> traj;
  double t = 0.0;
  State<N> y = y0;
  State<N> f = rhs(t, y);
  if (!all_finite(f)) {
    traj.push(t, y, f);
    traj.set_status(Status::non_finite);
    return traj;
  }
  traj.push(t, y, f);

  double stop_prev = stop ? (*stop)(t, y) : 0.0;
  const double min_step = 1e-14 * cfg.t_max;
  double h = cfg.initial_step > 0.0 ? cfg.initial_step : starting_step(rhs, y, f, cfg);
  bool rejected_last = false;
  std::size_t attempts = 0;

  while (t < cfg.t_max) {
    if (++attempts > cfg.max_steps) {
      traj.set_status(Status::max_steps_exceeded);
      return traj;
    }
    h = std::min(h, cfg.max_step);
    const double remaining = cfg.t_max - t;
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    if (!last && !(t + h > t)) {
      traj.set_status(Status::singular);
      return traj;
    }

    State<N> y5{}, err{};
    fehlberg_step(rhs, t, y, f, h, y5, err);

    double err_norm = std::numeric_limits<double>::infinity();
    if (all_finite(y5) && all_finite(err)) {
      err_norm = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err_norm = std::max(err_norm, std::abs(err[i]) / sc);
      }
    }

    if (err_norm > 1.0) {
      const double factor =
          std::isfinite(err_norm) ? std::max(0.2, 0.9 * std::pow(err_norm, -0.25)) : 0.25;
      h *= factor;
      rejected_last = true;
      if (h < min_step) {
        traj.set_status(Status::singular);
        return traj;
      }
      continue;
    }

    const double t_new = last ? cfg.t_max : t + h;
    const State<N> f_new = rhs(t_new, y5);
    if (!all_finite(f_new)) {
      traj.set_status(Status::non_finite);
      return traj;
    }
    State<N> ym{}, em{};
    fehlberg_step(rhs, t, y, f, 0.5 * (t_new - t), ym, em);
    const State<N> fm = rhs(0.5 * (t + t_new), ym);
    if (all_finite(ym) && all_finite(fm)) {
      traj.push(t_new, y5, f_new, ym, fm);
    } else {
      traj.push(t_new, y5, f_new);
    }
    t = t_new;
    y = y5;
    f = f_new;

    if (stop) {
      const double value = (*stop)(t, y);
      if (crosses(stop_prev, value, stop_direction)) {
        traj.set_status(Status::stopped);
        return traj;
      }
      stop_prev = value;
    }

    double grow = err_norm == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err_norm, -0.2)));
    if (rejected_last) grow = std::min(grow, 1.0);
    rejected_last = false;
    h *= grow;
  }
  traj.set_status(Status::completed);
  return traj;
}

}  // namespace detail

template <std::size_t N, class Rhs>
DenseTrajectory<N> integrate(Rhs&& rhs, const State<N>& y0, const IntegrationConfig& config) {
  return detail::integrate_impl<N>(rhs, y0, config, nullptr, Direction::any);
}

// Integrates until t_max or until `stop(t, y)` changes sign in `direction`
// between two accepted nodes. The crossing step is kept so that find_event
// can polish the root on the interpolant.
template <std::size_t N, class Rhs>
DenseTrajectory<N> integrate_until(Rhs&& rhs, const State<N>& y0,
                                   const IntegrationConfig& config,
                                   const std::function<double(double, const State<N>&)>& stop,
                                   Direction direction) {
  return detail::integrate_impl<N>(rhs, y0, config, &stop, direction);
}

namespace detail {

template <std::size_t N, class Event>
EventRecord<N> polish(const DenseTrajectory<N>& traj, Event& event, std::size_t i, double before,
                      double after) {
  const auto& ts = traj.times();
  EventRecord<N> rec;
  rec.direction = before < 0.0 ? Direction::rising : Direction::falling;
  if (after == 0.0) {
    rec.t = ts[i + 1];
  } else {
    auto g = [&](double t) { return event(t, traj(t)); };
    const double span = traj.t_end() - traj.t_begin();
    auto tol = [span](double a, double b) {
      return std::abs(b - a) <= std::max(1e-16 * span,
                                         4.0 * std::numeric_limits<double>::epsilon() *
                                             std::max(std::abs(a), std::abs(b)));
    };
    std::uintmax_t iters = 200;
    const auto [lo, hi] =
        boost::math::tools::toms748_solve(g, ts[i], ts[i + 1], before, after, tol, iters);
    rec.t = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
  }
  rec.state = traj(rec.t);
  return rec;
}

}  // namespace detail

// Earliest sign change of `event(t, y(t))` with the requested direction,
// root-polished on the dense interpolant.
template <std::size_t N, class Event>
std::optional<EventRecord<N>> find_event(const DenseTrajectory<N>& traj, Event&& event,
                                         Direction direction) {
  if (traj.size() < 2) return std::nullopt;
  const auto& ts = traj.times();
  const auto& ys = traj.states();
  double before = event(ts[0], ys[0]);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double after = event(ts[i + 1], ys[i + 1]);
    if (crosses(before, after, direction)) return detail::polish(traj, event, i, before, after);
    before = after;
  }
  return std::nullopt;
}

// Every sign change in node order. Crossings that start and end inside one
// step are missed, as with find_event.
template <std::size_t N, class Event>
std::vector<EventRecord<N>> find_events(const DenseTrajectory<N>& traj, Event&& event,
                                        Direction direction) {
  std::vector<EventRecord<N>> out;
  if (traj.size() < 2) return out;
  const auto& ts = traj.times();
  const auto& ys = traj.states();
  double before = event(ts[0], ys[0]);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double after = event(ts[i + 1], ys[i + 1]);
    if (crosses(before, after, direction)) out.push_back(detail::polish(traj, event, i, before, after));
    before = after;
  }
  return out;
}

}  // namespace eplab::ode
