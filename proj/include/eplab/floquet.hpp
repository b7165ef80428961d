#pragma once

// Hill-equation stability of the linearized derivative dynamics,
//
//     P'' + Q(G(t), F(t)) P = 0,
//     Q = 1 - (d+2)/2 G - (d-2)(d-4)/4 F^2,
//
// along the closed orbit through (G+, 0). The even solution z (z(0)=1,
// z'(0)=0) and the odd solution y (y(0)=0, y'(0)=1) are co-integrated with the
// orbit over one period T.

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "eplab/error.hpp"
#include "eplab/ode.hpp"
#include "eplab/parallel.hpp"
#include "eplab/phase.hpp"

namespace eplab::floquet {

inline double hill_q(Dim d, PhasePoint p) {
  const double dd = d.real();
  return 1.0 - 0.5 * (dd + 2.0) * p.field - 0.25 * (dd - 2.0) * (dd - 4.0) * p.velocity * p.velocity;
}

enum class Stability {
  unstable,     // z(T) > 1 + tol
  neutral,      // |z(T) - 1| <= tol
  elliptic,     // |z(T)| < 1
  alternating,  // z(T) <= -1: multipliers on the negative axis
};

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::unstable: return "unstable";
    case Stability::neutral: return "neutral";
    case Stability::elliptic: return "stable-elliptic";
    case Stability::alternating: return "alternating";
  }
  return "unknown";
}

inline Stability classify(double zT, double tol) {
  if (zT > 1.0 + tol) return Stability::unstable;
  if (std::abs(zT - 1.0) <= tol) return Stability::neutral;
  if (std::abs(zT) < 1.0) return Stability::elliptic;
  return Stability::alternating;
}

struct MonodromyOptions {
  ode::IntegrationConfig config{};
  double neutral_tol = 1e-6;
  phase::PeriodMethod period_method = phase::PeriodMethod::quadrature;
};

struct MonodromyResult {
  Dim d{1};
  double G_plus = 0.0;
  double T = 0.0;
  double zT = 0.0;    // even solution at T
  double dzT = 0.0;   // its derivative at T
  double yT = 0.0;    // odd solution at T (secular drift of the monodromy)
  double dyT = 0.0;
  double wronskian = 0.0;  // z y' - z' y at T
  double z_2pi = 0.0;      // even solution at t = 2 pi, a diagnostic
  double mu = 0.0;         // acosh(zT) / T when zT >= 1, else 0
  double e_muT = 1.0;      // zT + sqrt(zT^2 - 1) when zT >= 1, else 1
  Stability classification = Stability::neutral;
};

inline MonodromyResult monodromy(Dim d, double G_plus, const MonodromyOptions& opt = {}) {
  phase::require_amplitude(d, G_plus);
  const double T = phase::period(d, G_plus, opt.period_method, opt.config);

  using S = ode::State<6>;
  auto rhs = [d](double, const S& s) {
    const PhasePoint p{s[0], s[1]};
    const PhasePoint g = phase::gf_rhs(d, p);
    const double q = hill_q(d, p);
    return S{g.field, g.velocity, s[3], -q * s[2], s[5], -q * s[4]};
  };
  ode::IntegrationConfig cfg = opt.config;
  cfg.abs_tol = std::min(cfg.abs_tol, cfg.rel_tol * G_plus);
  const double t_end = std::max(T, phase::two_pi);
  const auto traj = ode::integrate<6>(rhs, S{G_plus, 0.0, 1.0, 0.0, 0.0, 1.0}, cfg.with_t_max(t_end));
  if (traj.truncated()) {
    throw NumericalError(std::string("Hill integration failed: ") + ode::to_string(traj.status()));
  }
  const S end = traj(T);

  MonodromyResult r;
  r.d = d;
  r.G_plus = G_plus;
  r.T = T;
  r.zT = end[2];
  r.dzT = end[3];
  r.yT = end[4];
  r.dyT = end[5];
  r.wronskian = end[2] * end[5] - end[3] * end[4];
  r.z_2pi = traj(phase::two_pi)[2];
  if (r.zT >= 1.0) {
    r.mu = std::acosh(r.zT) / T;
    r.e_muT = r.zT + std::sqrt(r.zT * r.zT - 1.0);
  }
  r.classification = classify(r.zT, opt.neutral_tol);
  return r;
}

// Instability measure z(T) - 1.
inline double instability_measure(Dim d, double G_plus, const MonodromyOptions& opt = {}) {
  return monodromy(d, G_plus, opt).zT - 1.0;
}

// G+ = step, 2 step, ... strictly inside (0, amplitude_bound(d)).
inline std::vector<double> scan_grid(Dim d, double step) {
  if (!(step > 0.0)) throw InputError("grid step must be positive");
  const double bound = phase::amplitude_bound(d);
  std::vector<double> grid;
  for (int k = 1;; ++k) {
    const double g = k * step;
    if (!(g < bound - 1e-12)) break;
    grid.push_back(g);
  }
  if (grid.empty()) throw InputError("empty G+ grid");
  return grid;
}

struct ScanRow {
  double G_plus = 0.0;
  std::optional<MonodromyResult> result;
  std::string error;  // set when result is empty
};

// One row per grid value, in grid order, whatever the worker count.
inline std::vector<ScanRow> floquet_scan(Dim d, const std::vector<double>& grid,
                                         const MonodromyOptions& opt = {},
                                         std::size_t threads = 0) {
  if (grid.empty()) throw InputError("empty G+ grid");
  for (double g : grid) phase::require_amplitude(d, g);
  return parallel::map(
      grid.size(),
      [&](std::size_t i) {
        ScanRow row;
        row.G_plus = grid[i];
        try {
          row.result = monodromy(d, grid[i], opt);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        return row;
      },
      threads);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

struct SmallAmplitudeFit {
  std::vector<double> eps;
  std::vector<double> delta;   // z(T) - 1 per eps
  std::vector<double> period;  // T per eps
  bool fittable = false;
  std::string reason;          // why the slope fit was refused
  double slope = std::numeric_limits<double>::quiet_NaN();  // of log delta vs log eps
  double log_c2 = std::numeric_limits<double>::quiet_NaN();
  double period_coefficient = 0.0;  // eps^2 coefficient of T/2pi - 1
  double period_coefficient_expected = 0.0;  // (d-1)(d-4)/24
};

inline constexpr double delta_noise_floor = 1e-12;

// Fits log(z(T) - 1) = slope * log(eps) + log c^2, and the eps^2 coefficient of
// T/2pi - 1 by least squares on the basis {eps^2, eps^3}.
inline SmallAmplitudeFit small_amplitude_fit(Dim d, const std::vector<double>& eps_list,
                                             const MonodromyOptions& opt = {}) {
  if (eps_list.size() < 3) throw InputError("need at least three eps values");
  SmallAmplitudeFit fit;
  fit.eps = eps_list;
  fit.period_coefficient_expected = (d.real() - 1.0) * (d.real() - 4.0) / 24.0;
  for (double e : eps_list) {
    const MonodromyResult m = monodromy(d, e, opt);
    fit.delta.push_back(m.zT - 1.0);
    fit.period.push_back(m.T);
  }

  double s22 = 0.0, s23 = 0.0, s33 = 0.0, b2 = 0.0, b3 = 0.0;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double e2 = eps_list[i] * eps_list[i];
    const double e3 = e2 * eps_list[i];
    const double rhs = fit.period[i] / phase::two_pi - 1.0;
    s22 += e2 * e2;
    s23 += e2 * e3;
    s33 += e3 * e3;
    b2 += e2 * rhs;
    b3 += e3 * rhs;
  }
  fit.period_coefficient = (b2 * s33 - b3 * s23) / (s22 * s33 - s23 * s23);

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(fit.delta[i] > delta_noise_floor)) {
      fit.reason = "z(T) - 1 = " + std::to_string(fit.delta[i]) + " at eps = " +
                   std::to_string(eps_list[i]) + " is below the noise floor";
      return fit;
    }
    lx.push_back(std::log(eps_list[i]));
    ly.push_back(std::log(fit.delta[i]));
  }
  const LineFit line = least_squares_line(lx, ly);
  fit.fittable = true;
  fit.slope = line.slope;
  fit.log_c2 = line.intercept;
  return fit;
}

}  // namespace eplab::floquet
