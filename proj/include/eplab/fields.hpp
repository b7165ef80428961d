#pragma once

// Radially symmetric Cauchy problem solved on a fan of characteristics.
//
// Each r0 of the grid carries an independent characteristic (the ODEs close
// along characteristics), so the fan is evolved in parallel and profiles at a
// given time are read off the moved positions r(t; r0).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eplab/characteristics.hpp"
#include "eplab/error.hpp"
#include "eplab/ode.hpp"
#include "eplab/parallel.hpp"
#include "eplab/phase.hpp"
#include "eplab/simplewave.hpp"

namespace eplab::fields {

using Profile = std::function<double(double)>;

struct Scenario {
  std::string name;
  Dim d{1};
  std::vector<double> r0_grid;  // strictly increasing, starts at 0
  Profile F0;
  Profile G0;
  Profile dF0;  // optional analytic r-derivatives; finite differences otherwise
  Profile dG0;
  double horizon = 0.0;
  ode::IntegrationConfig config{};
  std::vector<double> snapshot_times;

  void validate() const {
    if (r0_grid.size() < 5) throw InputError("grid needs at least 5 characteristics");
    if (r0_grid.front() != 0.0) throw InputError("grid must start at r0 = 0");
    for (std::size_t i = 1; i < r0_grid.size(); ++i) {
      if (!(r0_grid[i] > r0_grid[i - 1])) throw InputError("grid must be strictly increasing");
    }
    if (!F0 || !G0) throw InputError("scenario needs F0 and G0 profiles");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("horizon must be positive");
    config.validate();
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
      const double t = snapshot_times[i];
      if (!(t >= 0.0) || t > horizon) throw InputError("snapshot time outside [0, horizon]");
      if (i > 0 && !(t > snapshot_times[i - 1])) {
        throw InputError("snapshot times must be strictly increasing");
      }
    }
  }
};

// r_i = r_max (e^{k i/(n-1)} - 1) / (e^k - 1): dense near the axis for k > 0.
inline std::vector<double> clustered_grid(double r_max, std::size_t n, double clustering) {
  if (!(r_max > 0.0)) throw InputError("r_max must be positive");
  if (n < 5) throw InputError("need at least 5 grid points");
  if (clustering < 0.0) throw InputError("clustering must be >= 0");
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    r[i] = clustering == 0.0 ? r_max * x
                             : r_max * std::expm1(clustering * x) / std::expm1(clustering);
  }
  r.front() = 0.0;
  r.back() = r_max;
  return r;
}

inline std::vector<double> uniform_times(double horizon, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) {
    t[i] = count == 1 ? 0.0 : horizon * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return t;
}

namespace detail {

// Fornberg weights for the first derivative at x0 on nodes x.
inline std::vector<double> derivative_weights(double x0, const double* x, std::size_t n) {
  std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

}  // namespace detail

// d y / d x at every node from Lagrange stencils of `points` nodes (order
// points - 1), centred in the interior and one-sided at the ends. Weights are
// applied to y - y_i, so constant data give exactly zero.
inline std::vector<double> grid_derivative(const std::vector<double>& x,
                                           const std::vector<double>& y, std::size_t points = 5) {
  const std::size_t n = x.size();
  if (points < 2 || n < points || y.size() != n) {
    throw InputError("grid derivative needs at least " + std::to_string(points) + " matching points");
  }
  const std::size_t half = points / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = std::min(i < half ? 0 : i - half, n - points);
    const auto w = detail::derivative_weights(x[i], &x[lo], points);
    double acc = 0.0;
    for (std::size_t k = 0; k < points; ++k) acc += w[k] * (y[lo + k] - y[i]);
    out[i] = acc;
  }
  return out;
}

inline std::vector<characteristics::CharacteristicInit> derive_initial_uv(const Scenario& sc) {
  sc.validate();
  const auto& r = sc.r0_grid;
  std::vector<double> F(r.size()), G(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    F[i] = sc.F0(r[i]);
    G[i] = sc.G0(r[i]);
    if (!std::isfinite(F[i]) || !std::isfinite(G[i])) {
      throw InputError("initial data not finite at r = " + std::to_string(r[i]));
    }
  }
  std::vector<double> dF, dG;
  if (sc.dF0) {
    for (double x : r) dF.push_back(sc.dF0(x));
  } else {
    dF = grid_derivative(r, F);
  }
  if (sc.dG0) {
    for (double x : r) dG.push_back(sc.dG0(x));
  } else {
    dG = grid_derivative(r, G);
  }
  std::vector<characteristics::CharacteristicInit> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    characteristics::CharacteristicInit init{r[i], G[i], F[i], r[i] * dF[i], r[i] * dG[i]};
    init.validate(sc.d);
    out.push_back(init);
  }
  return out;
}

struct FieldSnapshot {
  double t = 0.0;
  std::vector<double> r0;
  std::vector<double> r;
  std::vector<double> F;
  std::vector<double> G;
  std::vector<double> n;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> delta;  // F_r G_t - F_t G_r, PDE form
  double delta_scale = 0.0;   // max of |F_r G_t| + |F_t G_r|
  double delta_max = 0.0;     // max |delta| / delta_scale (0 when the scale vanishes)
  double affine_distance = 0.0;  // max of |u| + |v|
  double radius_defect = 0.0;    // max |r / algebraic radius - 1| over r0 > 0
  bool ordered = true;           // positions strictly increasing
};

enum class Verdict { blowup, smooth_to_horizon };

inline const char* to_string(Verdict v) {
  return v == Verdict::blowup ? "blowup" : "smooth-to-horizon";
}

struct TrackSummary {
  double r0 = 0.0;
  characteristics::BlowupReport blowup;
};

struct GlobalReport {
  Verdict verdict = Verdict::smooth_to_horizon;
  std::optional<double> t_star_global;
  std::optional<double> argmin_r0;
  std::vector<TrackSummary> tracks;
  // Set when moved positions cross in a snapshot before t_star_global.
  std::optional<double> ordering_violation_t;
};

enum class TimeDerivative { pde, time_difference };

struct FanOptions {
  std::size_t threads = 0;
  bool keep_tracks = false;  // retain every full track (memory heavy)
  TimeDerivative time_derivative = TimeDerivative::pde;
  double time_step = 1e-4;   // half-width of the Lagrangian central difference
};

struct FanResult {
  Dim d{1};
  std::vector<FieldSnapshot> snapshots;  // only times before t_star_global
  std::vector<double> skipped_times;     // snapshot times at or after blow-up
  GlobalReport report;
  std::optional<characteristics::CharacteristicTrack> axial;  // the r0 = 0 track
  std::vector<characteristics::CharacteristicTrack> tracks;   // when keep_tracks
};

namespace detail {

struct TrackOutput {
  characteristics::BlowupReport blowup;
  std::vector<std::optional<characteristics::TrackSample>> at;
  std::vector<std::optional<characteristics::TrackSample>> before;  // t - dt
  std::vector<std::optional<characteristics::TrackSample>> after;   // t + dt
  std::optional<characteristics::CharacteristicTrack> full;
};

inline std::optional<characteristics::TrackSample> sample_if_alive(
    const characteristics::CharacteristicTrack& tr, double t) {
  if (t < 0.0 || t > tr.t_end()) return std::nullopt;
  if (tr.blowup.blown_up && t >= *tr.blowup.t_star) return std::nullopt;
  return tr.sample(t);
}

}  // namespace detail

// Stencil width for the radial derivatives entering the determinant.
inline constexpr std::size_t delta_stencil = 7;

// Assembles a snapshot from per-characteristic samples (all present).
inline FieldSnapshot assemble_snapshot(Dim d, double t,
                                       const std::vector<characteristics::CharacteristicInit>& inits,
                                       const std::vector<characteristics::TrackSample>& s,
                                       const std::vector<characteristics::TrackSample>* before,
                                       const std::vector<characteristics::TrackSample>* after) {
  const double dd = d.real();
  FieldSnapshot snap;
  snap.t = t;
  const std::size_t m = s.size();
  for (std::size_t i = 0; i < m; ++i) {
    snap.r0.push_back(inits[i].r0);
    snap.r.push_back(s[i].r);
    snap.F.push_back(s[i].F);
    snap.G.push_back(s[i].G);
    snap.n.push_back(s[i].n);
    snap.u.push_back(s[i].u);
    snap.v.push_back(s[i].v);
    snap.affine_distance = std::max(snap.affine_distance, std::abs(s[i].u) + std::abs(s[i].v));
    const double r_alg = characteristics::algebraic_radius(d, inits[i].r0, inits[i].G0, s[i].G);
    if (inits[i].r0 > 0.0) {
      snap.radius_defect = std::max(snap.radius_defect, std::abs(s[i].r / r_alg - 1.0));
    }
    if (i > 0 && !(snap.r[i] > snap.r[i - 1])) snap.ordered = false;
  }
  snap.delta.assign(m, 0.0);
  if (!snap.ordered) return snap;

  const std::vector<double> Fr = grid_derivative(snap.r, snap.F, delta_stencil);
  const std::vector<double> Gr = grid_derivative(snap.r, snap.G, delta_stencil);
  for (std::size_t i = 0; i < m; ++i) {
    const double F = snap.F[i], G = snap.G[i], r = snap.r[i];
    double Gt, Ft;
    if (before && after) {
      // Lagrangian central difference minus the transport term
      const double h = (*after)[i].t - (*before)[i].t;
      Gt = ((*after)[i].G - (*before)[i].G) / h - F * r * Gr[i];
      Ft = ((*after)[i].F - (*before)[i].F) / h - F * r * Fr[i];
    } else {
      Gt = F * (1.0 - dd * G) - F * r * Gr[i];
      Ft = -F * F - G - F * r * Fr[i];
    }
    snap.delta[i] = Fr[i] * Gt - Ft * Gr[i];
    snap.delta_scale = std::max(snap.delta_scale, std::abs(Fr[i] * Gt) + std::abs(Ft * Gr[i]));
  }
  if (snap.delta_scale > 0.0) {
    for (double x : snap.delta) snap.delta_max = std::max(snap.delta_max, std::abs(x) / snap.delta_scale);
  }
  return snap;
}

inline FanResult evolve_fan(const Scenario& sc, const FanOptions& opt = {}) {
  const auto inits = derive_initial_uv(sc);
  const Dim d = sc.d;
  const bool diff = opt.time_derivative == TimeDerivative::time_difference;

  auto outputs = parallel::map(
      inits.size(),
      [&](std::size_t i) {
        detail::TrackOutput out;
        auto tr = characteristics::track(inits[i], d, sc.horizon, sc.config);
        out.blowup = tr.blowup;
        for (double t : sc.snapshot_times) {
          out.at.push_back(detail::sample_if_alive(tr, t));
          if (diff) {
            out.before.push_back(detail::sample_if_alive(tr, std::max(0.0, t - opt.time_step)));
            out.after.push_back(detail::sample_if_alive(tr, t + opt.time_step));
          }
        }
        if (opt.keep_tracks || inits[i].r0 == 0.0) out.full = std::move(tr);
        return out;
      },
      opt.threads);

  FanResult res;
  res.d = d;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    res.report.tracks.push_back({inits[i].r0, outputs[i].blowup});
    const auto& b = outputs[i].blowup;
    if (b.blown_up && (!res.report.t_star_global || *b.t_star < *res.report.t_star_global)) {
      res.report.t_star_global = b.t_star;
      res.report.argmin_r0 = inits[i].r0;
    }
  }
  res.report.verdict = res.report.t_star_global ? Verdict::blowup : Verdict::smooth_to_horizon;

  for (std::size_t k = 0; k < sc.snapshot_times.size(); ++k) {
    const double t = sc.snapshot_times[k];
    std::vector<characteristics::TrackSample> s, sb, sa;
    bool complete = true;
    for (const auto& o : outputs) {
      if (!o.at[k] || (diff && (!o.before[k] || !o.after[k]))) {
        complete = false;
        break;
      }
      s.push_back(*o.at[k]);
      if (diff) {
        sb.push_back(*o.before[k]);
        sa.push_back(*o.after[k]);
      }
    }
    if (!complete || (res.report.t_star_global && t >= *res.report.t_star_global)) {
      res.skipped_times.push_back(t);
      continue;
    }
    FieldSnapshot snap = assemble_snapshot(d, t, inits, s, diff ? &sb : nullptr, diff ? &sa : nullptr);
    if (!snap.ordered && !res.report.ordering_violation_t) res.report.ordering_violation_t = t;
    res.snapshots.push_back(std::move(snap));
  }

  for (std::size_t i = 0; i < inits.size(); ++i) {
    if (!outputs[i].full) continue;
    if (inits[i].r0 == 0.0) res.axial = *outputs[i].full;
    if (opt.keep_tracks) res.tracks.push_back(std::move(*outputs[i].full));
  }
  return res;
}

struct DeltaField {
  double t = 0.0;
  std::vector<double> r;
  std::vector<double> delta;
  double scale = 0.0;
  double normalized_max = 0.0;
};

// Functional-dependence determinant on every snapshot of a fan run.
inline std::vector<DeltaField> functional_dependence_grid(const FanResult& fan) {
  if (fan.snapshots.size() < 2) throw InputError("need at least two snapshots");
  std::vector<DeltaField> out;
  for (const auto& s : fan.snapshots) {
    if (s.r.size() < 3) throw InputError("need at least three characteristics");
    out.push_back({s.t, s.r, s.delta, s.delta_scale, s.delta_max});
  }
  return out;
}

inline characteristics::DensityReport axial_density_trace(const FanResult& fan) {
  if (!fan.axial) throw InputError("scenario grid does not contain r0 = 0");
  return characteristics::density(*fan.axial);
}

// Largest affine distance among snapshots with t in [t_lo, t_hi].
inline double max_affine_distance(const FanResult& fan, double t_lo, double t_hi) {
  double m = 0.0;
  for (const auto& s : fan.snapshots) {
    if (s.t >= t_lo && s.t <= t_hi) m = std::max(m, s.affine_distance);
  }
  return m;
}

// Scenario builders for the data kinds accepted by the scenario file.

// G0 = alpha, F0 = beta: the affine solution E = alpha r, V = beta r.
inline Scenario affine_scenario(Dim d, double alpha, double beta, std::vector<double> grid,
                                double horizon) {
  Scenario sc;
  sc.name = "affine";
  sc.d = d;
  sc.r0_grid = std::move(grid);
  sc.G0 = [alpha](double) { return alpha; };
  sc.F0 = [beta](double) { return beta; };
  sc.dG0 = [](double) { return 0.0; };
  sc.dF0 = [](double) { return 0.0; };
  sc.horizon = horizon;
  return sc;
}

// G0 = A exp(-a^2 r^2), F0 = 0.
inline Scenario gaussian_scenario(Dim d, double amplitude, double a, std::vector<double> grid,
                                  double horizon) {
  Scenario sc;
  sc.name = "gaussian";
  sc.d = d;
  sc.r0_grid = std::move(grid);
  sc.G0 = [amplitude, a](double r) { return amplitude * std::exp(-a * a * r * r); };
  sc.dG0 = [amplitude, a](double r) { return -2.0 * a * a * r * amplitude * std::exp(-a * a * r * r); };
  sc.F0 = [](double) { return 0.0; };
  sc.dF0 = [](double) { return 0.0; };
  sc.horizon = horizon;
  return sc;
}

// G0 = A exp(-a^2 r^2) and F0 = F(G0) on the given family.
inline Scenario simple_wave_scenario(const simplewave::SimpleWaveFamily& family, double amplitude,
                                     double a, std::vector<double> grid, double horizon) {
  Scenario sc;
  sc.name = "simple_wave";
  sc.d = family.dim();
  sc.r0_grid = std::move(grid);
  auto G0 = [amplitude, a](double r) { return amplitude * std::exp(-a * a * r * r); };
  auto dG0 = [amplitude, a](double r) {
    return -2.0 * a * a * r * amplitude * std::exp(-a * a * r * r);
  };
  sc.G0 = G0;
  sc.dG0 = dG0;
  // the datum is validated pointwise on the grid
  (void)simplewave::velocity_from_density_profile(family, G0, sc.r0_grid);
  sc.F0 = [family, G0](double r) { return family.velocity(G0(r)); };
  sc.dF0 = [family, G0, dG0](double r) {
    const double g = G0(r);
    const double dg = dG0(r);
    return dg == 0.0 ? 0.0 : family.slope(g) * dg;
  };
  sc.horizon = horizon;
  return sc;
}

// Piecewise-linear lookups through (r, F0, G0) rows; derivatives come from the
// grid finite differences, so the grid is the table's radii.
inline Scenario tabulated_scenario(Dim d, std::vector<double> r, std::vector<double> F,
                                   std::vector<double> G, double horizon) {
  if (r.size() != F.size() || r.size() != G.size()) throw InputError("table columns differ in length");
  Scenario sc;
  sc.name = "tabulated";
  sc.d = d;
  sc.r0_grid = r;
  auto lookup = [r](std::vector<double> y) {
    return [r, y](double x) {
      auto it = std::lower_bound(r.begin(), r.end(), x);
      if (it == r.end()) return y.back();
      const auto j = static_cast<std::size_t>(it - r.begin());
      if (*it == x || j == 0) return y[j];
      const double w = (x - r[j - 1]) / (r[j] - r[j - 1]);
      return (1.0 - w) * y[j - 1] + w * y[j];
    };
  };
  sc.F0 = lookup(std::move(F));
  sc.G0 = lookup(std::move(G));
  sc.horizon = horizon;
  return sc;
}

}  // namespace eplab::fields
