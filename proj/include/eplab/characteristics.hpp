#pragma once

// Derivative dynamics along one characteristic.
//
// With u = r dF/dr and v = r dG/dr, the Riccati pair
//     u' = -u^2 - 2Fu - v,     v' = -uv + (1 - dG)u - dFv
// is linearized by u = p1/q, v = p2/q into
//     q' = p1,   p1' = -2F p1 - p2,   p2' = (1 - dG) p1 - dF p2,
// with (q, p1, p2)(0) = (1, u0, v0). Derivatives blow up exactly when q reaches
// zero. The position obeys r' = F r, and (1 - dG) r^d is conserved.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eplab/error.hpp"
#include "eplab/ode.hpp"
#include "eplab/phase.hpp"

namespace eplab::characteristics {

struct CharacteristicInit {
  double r0 = 0.0;
  double G0 = 0.0;
  double F0 = 0.0;
  double u0 = 0.0;  // r0 dF/dr at t = 0
  double v0 = 0.0;  // r0 dG/dr at t = 0

  void validate(Dim d) const {
    if (!(r0 >= 0.0) || !std::isfinite(r0)) throw InputError("r0 must be finite and >= 0");
    if (!std::isfinite(G0) || !std::isfinite(F0) || !std::isfinite(u0) || !std::isfinite(v0)) {
      throw InputError("characteristic data must be finite");
    }
    const double lambda0 = v0 + d.real() * G0;
    if (!(lambda0 < 1.0)) {
      throw InputError("initial density 1 - lambda0 = " + std::to_string(1.0 - lambda0) +
                       " is not positive at r0 = " + std::to_string(r0));
    }
  }
};

// State layout of the co-integrated system.
enum Slot : std::size_t { R = 0, G = 1, F = 2, Q = 3, P1 = 4, P2 = 5 };
using State = ode::State<6>;

inline State track_rhs(Dim d, const State& s) {
  const double dd = d.real();
  return State{s[F] * s[R],
               s[F] * (1.0 - dd * s[G]),
               -s[F] * s[F] - s[G],
               s[P1],
               -2.0 * s[F] * s[P1] - s[P2],
               (1.0 - dd * s[G]) * s[P1] - dd * s[F] * s[P2]};
}

struct BlowupReport {
  bool blown_up = false;
  std::optional<double> t_star;
  double q_min = 1.0;
  double t_q_min = 0.0;
  double horizon = 0.0;
};

struct TrackSample {
  double t = 0.0;
  double r = 0.0;
  double G = 0.0;
  double F = 0.0;
  double q = 1.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double u = 0.0;
  double v = 0.0;
  double D = 0.0;       // divergence-type quantity u + dF
  double lambda = 0.0;  // v + dG
  double n = 1.0;       // density 1 - lambda
  double J = 0.0;
};

inline TrackSample derive_sample(Dim d, double t, const State& s) {
  const double dd = d.real();
  TrackSample out;
  out.t = t;
  out.r = s[R];
  out.G = s[G];
  out.F = s[F];
  out.q = s[Q];
  out.p1 = s[P1];
  out.p2 = s[P2];
  out.u = s[P1] / s[Q];
  out.v = s[P2] / s[Q];
  out.D = out.u + dd * out.F;
  out.lambda = out.v + dd * out.G;
  out.n = 1.0 - out.lambda;
  out.J = (dd - 1.0) * out.D * out.F - 0.5 * (dd - 1.0) * dd * out.F * out.F;
  return out;
}

struct CharacteristicTrack {
  Dim d{1};
  CharacteristicInit init;
  ode::DenseTrajectory<6> trajectory;
  BlowupReport blowup;

  TrackSample sample(double t) const { return derive_sample(d, t, trajectory(t)); }

  // Derived quantities at the integration nodes; the final node of a blow-up
  // track has q = 0 and is left out.
  std::vector<TrackSample> samples() const {
    std::vector<TrackSample> out;
    const auto& ts = trajectory.times();
    const auto& ys = trajectory.states();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (blowup.blown_up && i + 1 == ts.size()) break;
      out.push_back(derive_sample(d, ts[i], ys[i]));
    }
    return out;
  }

  double t_end() const { return trajectory.t_end(); }
};

// 50 periods of the orbit through (G0, F0); the origin uses 2 pi.
inline double default_horizon(Dim d, const CharacteristicInit& init) {
  return 50.0 * phase::period_through(d, {init.G0, init.F0});
}

inline CharacteristicTrack track(const CharacteristicInit& init, Dim d, double horizon,
                                 const ode::IntegrationConfig& config = {}) {
  init.validate(d);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InputError("horizon must be positive and finite");
  }
  auto rhs = [d](double, const State& s) { return track_rhs(d, s); };
  const std::function<double(double, const State&)> q_event = [](double, const State& s) {
    return s[Q];
  };
  CharacteristicTrack out;
  out.d = d;
  out.init = init;
  out.blowup.horizon = horizon;
  out.trajectory = ode::integrate_until<6>(
      rhs, State{init.r0, init.G0, init.F0, 1.0, init.u0, init.v0}, config.with_t_max(horizon),
      q_event, ode::Direction::falling);

  auto& traj = out.trajectory;
  if (traj.status() == ode::Status::stopped) {
    const auto hit = ode::find_event(traj, q_event, ode::Direction::falling);
    if (!hit) throw NumericalError("q crossing flagged but not located");
    traj.truncate(hit->t);
    out.blowup.blown_up = true;
    out.blowup.t_star = hit->t;
  } else if (traj.truncated()) {
    // The linear system has bounded coefficients, so a stalled step size means
    // q is collapsing faster than the tolerance can follow.
    const double q_last = traj.back()[Q];
    const double q_prev = traj.size() > 1 ? traj.states()[traj.size() - 2][Q] : 1.0;
    if (std::abs(q_last) < 1e-6 && q_last <= q_prev) {
      out.blowup.blown_up = true;
      out.blowup.t_star = traj.t_end();
    } else {
      throw NumericalError(std::string("characteristic integration failed (") +
                           ode::to_string(traj.status()) + ") at t = " +
                           std::to_string(traj.t_end()));
    }
  }

  const auto& ys = traj.states();
  const auto& ts = traj.times();
  out.blowup.q_min = ys[0][Q];
  out.blowup.t_q_min = ts[0];
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i][Q] < out.blowup.q_min) {
      out.blowup.q_min = ys[i][Q];
      out.blowup.t_q_min = ts[i];
    }
  }
  return out;
}

struct QCheck {
  std::vector<double> t;
  std::vector<double> q_quadrature;  // 1 + int_0^t p1
  std::vector<double> q_integrated;
  double max_abs_diff = 0.0;
};

// q rebuilt from the stored p1 alone, by 3-point Gauss-Legendre on each
// interpolant segment.
inline QCheck q_of_t(const CharacteristicTrack& tr) {
  static constexpr double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto& ts = tr.trajectory.times();
  const auto& ys = tr.trajectory.states();
  QCheck out;
  double acc = 1.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i > 0) {
      const double a = ts[i - 1];
      const double b = ts[i];
      double seg = 0.0;
      for (int k = 0; k < 3; ++k) {
        seg += gw[k] * tr.trajectory(0.5 * (a + b) + 0.5 * (b - a) * gx[k])[P1];
      }
      acc += 0.5 * (b - a) * seg;
    }
    out.t.push_back(ts[i]);
    out.q_quadrature.push_back(acc);
    out.q_integrated.push_back(ys[i][Q]);
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(acc - ys[i][Q]));
  }
  return out;
}

// Integrates the nonlinear (G, F, u, v) system directly.
inline ode::DenseTrajectory<4> riccati_direct(const CharacteristicInit& init, Dim d, double t_end,
                                              const ode::IntegrationConfig& config = {}) {
  init.validate(d);
  const double dd = d.real();
  auto rhs = [dd](double, const ode::State<4>& s) {
    const double g = s[0], f = s[1], u = s[2], v = s[3];
    return ode::State<4>{f * (1.0 - dd * g), -f * f - g, -u * u - 2.0 * f * u - v,
                         -u * v + (1.0 - dd * g) * u - dd * f * v};
  };
  return ode::integrate<4>(rhs, {init.G0, init.F0, init.u0, init.v0}, config.with_t_max(t_end));
}

// r(t) from the conservation of (1 - dG) r^d, anchored at (r0, G0).
inline double algebraic_radius(Dim d, double r0, double G0, double G) {
  const double dd = d.real();
  return r0 * std::pow((1.0 - dd * G0) / (1.0 - dd * G), 1.0 / dd);
}

struct SeriesPoint {
  double t = 0.0;
  double value = 0.0;
};

// (1 - dG) r^d at every node.
inline std::vector<SeriesPoint> radial_invariant(const CharacteristicTrack& tr) {
  std::vector<SeriesPoint> out;
  const double dd = tr.d.real();
  const auto& ts = tr.trajectory.times();
  const auto& ys = tr.trajectory.states();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out.push_back({ts[i], (1.0 - dd * ys[i][G]) * std::pow(ys[i][R], dd)});
  }
  return out;
}

struct PeriodExtrema {
  double t_begin = 0.0;
  double t_end = 0.0;
  double n_min = 0.0;
  double n_max = 0.0;
};

struct DensityReport {
  std::vector<SeriesPoint> n;             // at nodes, excluding a final q = 0 node
  std::vector<PeriodExtrema> per_period;  // windows of one orbit period
  std::vector<SeriesPoint> q_minima;      // strict local minima of q (p1 rising through 0)
  std::vector<SeriesPoint> n_at_q_minima;  // density at those minima
};

inline DensityReport density(const CharacteristicTrack& tr) {
  DensityReport rep;
  for (const TrackSample& s : tr.samples()) rep.n.push_back({s.t, s.n});
  if (rep.n.empty()) return rep;

  const double T = phase::period_through(tr.d, {tr.init.G0, tr.init.F0});
  for (double t0 = 0.0; t0 < rep.n.back().t; t0 += T) {
    PeriodExtrema w{t0, std::min(t0 + T, rep.n.back().t), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
    for (const SeriesPoint& p : rep.n) {
      if (p.t < w.t_begin || p.t > w.t_end) continue;
      w.n_min = std::min(w.n_min, p.value);
      w.n_max = std::max(w.n_max, p.value);
    }
    if (std::isfinite(w.n_min)) rep.per_period.push_back(w);
  }

  const auto minima = ode::find_events(
      tr.trajectory, [](double, const State& s) { return s[P1]; }, ode::Direction::rising);
  for (const auto& m : minima) {
    if (!(m.state[Q] > 0.0)) continue;
    rep.q_minima.push_back({m.t, m.state[Q]});
    rep.n_at_q_minima.push_back({m.t, derive_sample(tr.d, m.t, m.state).n});
  }
  return rep;
}

}  // namespace eplab::characteristics
