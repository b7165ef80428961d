#pragma once

// The analyses behind each `eplab` subcommand. Every command writes its CSV
// tables (and SVG charts on request) into an output directory, followed by a
// manifest.json listing them. Invalid input raises InputError, numerical
// failures without a verdict raise NumericalError.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eplab/characteristics.hpp"
#include "eplab/cli/manifest.hpp"
#include "eplab/cli/scenario.hpp"
#include "eplab/cli/svg.hpp"
#include "eplab/csv.hpp"
#include "eplab/error.hpp"
#include "eplab/fields.hpp"
#include "eplab/floquet.hpp"
#include "eplab/parallel.hpp"
#include "eplab/phase.hpp"
#include "eplab/simplewave.hpp"

namespace eplab::cli {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string out = ".";
  bool svg = false;
  double tol = 1e-10;
  std::size_t threads = 0;  // 0: EPLAB_THREADS or hardware concurrency

  ode::IntegrationConfig config() const {
    if (!(tol > 0.0)) throw InputError("--tol must be positive");
    return ode::IntegrationConfig{}.with_tolerance(tol);
  }
};

namespace detail {

class Run {
 public:
  Run(std::string command, const CommonOptions& common)
      : start_(std::chrono::steady_clock::now()), dir_(common.out) {
    manifest_.command = std::move(command);
    manifest_.parameters["tol"] = common.tol;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  nlohmann::json& parameters() { return manifest_.parameters; }
  void warn(const std::string& w) { manifest_.warnings.push_back(w); }

  void write(const csv::Table& table, const std::string& name) {
    table.save((dir_ / name).string());
    manifest_.outputs.push_back(name);
  }
  void write(const svg::Chart& chart, const std::string& name) {
    svg::save(chart, (dir_ / name).string());
    manifest_.outputs.push_back(name);
  }
  void write(const nlohmann::json& doc, const std::string& name) {
    std::ofstream f(dir_ / name);
    if (!f) throw InputError("cannot write " + (dir_ / name).string());
    f << doc.dump(2) << '\n';
    manifest_.outputs.push_back(name);
  }

  RunManifest finish() {
    manifest_.outputs.push_back("manifest.json");
    manifest_.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.save((dir_ / "manifest.json").string());
    return manifest_;
  }

 private:
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
  RunManifest manifest_;
};

inline nlohmann::json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

}  // namespace detail

// ---------------------------------------------------------------- phase

struct PhaseOptions {
  std::vector<int> dims{1, 2, 3, 4, 5};
  double g_plus = 0.1;
  std::size_t samples = 401;
  CommonOptions common;
};

inline RunManifest cmd_phase(const PhaseOptions& o) {
  if (o.dims.empty()) throw InputError("--d needs at least one dimension");
  if (o.samples < 2) throw InputError("--samples must be >= 2");
  std::vector<Dim> dims;
  for (int d : o.dims) {
    const Dim dim(d);
    if (o.g_plus != 0.0) phase::require_amplitude(dim, o.g_plus);
    dims.push_back(dim);
  }
  detail::Run run("phase", o.common);
  run.parameters()["d"] = o.dims;
  run.parameters()["g_plus"] = o.g_plus;
  run.parameters()["samples"] = o.samples;
  if (o.g_plus == 0.0) run.warn("g_plus = 0 is the rest state: every orbit is the single point (0, 0)");

  const auto cfg = o.common.config();
  const auto orbits = parallel::map(
      dims.size(), [&](std::size_t i) { return phase::sample_orbit(dims[i], o.g_plus, o.samples, cfg); },
      o.common.threads);

  csv::Table table({"d", "t", "g", "f"});
  svg::Chart chart{"Phase portraits, G+ = " + csv::format(o.g_plus), "G", "F", {}};
  for (std::size_t i = 0; i < dims.size(); ++i) {
    svg::Series s{"d = " + std::to_string(dims[i].value()), {}, {}, orbits[i].size() == 1};
    for (const auto& p : orbits[i]) {
      table.add(csv::Table::Row() << dims[i].value() << p.t << p.point.field << p.point.velocity);
      s.x.push_back(p.point.field);
      s.y.push_back(p.point.velocity);
    }
    chart.series.push_back(std::move(s));
  }
  run.write(table, "phase.csv");
  if (o.common.svg) run.write(chart, "phase.svg");
  return run.finish();
}

// ---------------------------------------------------------------- period

struct PeriodOptions {
  int d = 3;
  double step = 0.005;
  std::optional<double> g_min;  // default: step
  std::optional<double> g_max;  // default: last grid point below the bound
  CommonOptions common;
};

inline std::vector<double> sweep_grid(Dim d, double step, std::optional<double> g_min,
                                      std::optional<double> g_max) {
  if (!(step > 0.0)) throw InputError("--step must be positive");
  if (!g_min && !g_max) return floquet::scan_grid(d, step);
  const double lo = g_min.value_or(step);
  const double hi = g_max.value_or(phase::amplitude_bound(d) - 1e-12);
  phase::require_amplitude(d, lo);
  phase::require_amplitude(d, hi);
  if (hi < lo) throw InputError("--g-max must be >= --g-min");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double g = lo + k * step;
    if (g > hi * (1.0 + 1e-12)) break;
    grid.push_back(std::min(g, hi));
  }
  return grid;
}

inline RunManifest cmd_period(const PeriodOptions& o) {
  const Dim d(o.d);
  const auto grid = sweep_grid(d, o.step, o.g_min, o.g_max);
  detail::Run run("period", o.common);
  run.parameters()["d"] = o.d;
  run.parameters()["grid"] = grid;

  const auto cfg = o.common.config();
  struct Row {
    std::optional<double> event;
    double quadrature = 0.0;
    std::string event_error;
  };
  const auto rows = parallel::map(
      grid.size(),
      [&](std::size_t i) {
        Row r;
        r.quadrature = phase::period(d, grid[i], phase::PeriodMethod::quadrature, cfg);
        try {
          r.event = phase::period(d, grid[i], phase::PeriodMethod::event, cfg);
        } catch (const NumericalError& e) {
          r.event_error = e.what();
        }
        return r;
      },
      o.common.threads);

  csv::Table table({"g_plus", "t_event", "t_quadrature", "t_asymptotic"});
  svg::Series sq{"quadrature", {}, {}, false}, se{"event", {}, {}, true}, sa{"asymptotic", {}, {}, false};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ta = phase::period_asymptotic(d, grid[i]);
    table.add(csv::Table::Row() << grid[i] << rows[i].event << rows[i].quadrature << ta);
    if (!rows[i].event_error.empty()) {
      run.warn("g_plus = " + csv::format(grid[i]) + ": event period unavailable: " + rows[i].event_error);
    }
    sq.x.push_back(grid[i]);
    sq.y.push_back(rows[i].quadrature);
    if (rows[i].event) {
      se.x.push_back(grid[i]);
      se.y.push_back(*rows[i].event);
    }
    sa.x.push_back(grid[i]);
    sa.y.push_back(ta);
  }
  run.write(table, "period.csv");
  if (o.common.svg) {
    run.write(svg::Chart{"Period, d = " + std::to_string(o.d), "G+", "T", {sq, se, sa}}, "period.svg");
  }
  return run.finish();
}

// ---------------------------------------------------------------- floquet

struct FloquetOptions {
  std::vector<int> dims{1, 2, 3, 4, 5};
  double step = 0.005;
  double neutral_tol = 1e-6;
  CommonOptions common;
};

inline RunManifest cmd_floquet(const FloquetOptions& o) {
  if (o.dims.empty()) throw InputError("--d needs at least one dimension");
  if (!(o.neutral_tol > 0.0)) throw InputError("--neutral-tol must be positive");
  std::vector<std::vector<double>> grids;
  for (int d : o.dims) grids.push_back(floquet::scan_grid(Dim(d), o.step));

  detail::Run run("floquet", o.common);
  run.parameters()["d"] = o.dims;
  run.parameters()["step"] = o.step;
  run.parameters()["neutral_tol"] = o.neutral_tol;

  floquet::MonodromyOptions mo;
  mo.config = o.common.config();
  mo.neutral_tol = o.neutral_tol;
  svg::Chart chart{"Floquet multiplier e^{mu T}", "G+", "e^{mu T}", {}};
  for (std::size_t k = 0; k < o.dims.size(); ++k) {
    const Dim d(o.dims[k]);
    const auto rows = floquet::floquet_scan(d, grids[k], mo, o.common.threads);
    csv::Table table({"d", "g_plus", "t", "zt", "e_mut", "classification"});
    svg::Series s{"d = " + std::to_string(d.value()), {}, {}, true};
    for (const auto& row : rows) {
      if (!row.result) {
        run.warn("d = " + std::to_string(d.value()) + ", g_plus = " + csv::format(row.G_plus) + ": " +
                 row.error);
        continue;
      }
      const auto& m = *row.result;
      table.add(csv::Table::Row() << d.value() << m.G_plus << m.T << m.zT << m.e_muT
                                  << floquet::to_string(m.classification));
      s.x.push_back(m.G_plus);
      s.y.push_back(m.e_muT);
    }
    run.write(table, "floquet_d" + std::to_string(d.value()) + ".csv");
    chart.series.push_back(std::move(s));
  }
  if (o.common.svg) run.write(chart, "floquet.svg");
  return run.finish();
}

// ---------------------------------------------------------------- evolve

struct EvolveOptions {
  std::string scenario_path;
  std::optional<double> horizon;  // overrides the file
  bool tol_override = false;      // use common.tol instead of the file's tolerances
  CommonOptions common;
};

struct EvolveOutcome {
  RunManifest manifest;
  fields::Verdict verdict = fields::Verdict::smooth_to_horizon;
  std::optional<double> t_star;
};

inline EvolveOutcome cmd_evolve(const EvolveOptions& o) {
  ScenarioFile file = load_scenario(o.scenario_path);
  fields::Scenario& sc = file.scenario;
  if (o.horizon) {
    if (!(*o.horizon > 0.0)) throw InputError("--horizon must be positive");
    const double scale = *o.horizon / sc.horizon;
    for (double& t : sc.snapshot_times) t = std::min(t * scale, *o.horizon);
    sc.horizon = *o.horizon;
    file.resolved["horizon"] = sc.horizon;
  }
  if (o.tol_override) {
    sc.config = o.common.config();
    file.resolved["tolerances"] = {{"abs", o.common.tol}, {"rel", o.common.tol}};
  }
  sc.validate();

  detail::Run run("evolve", o.common);
  run.parameters() = file.resolved;

  fields::FanOptions fo;
  fo.threads = o.common.threads;
  const fields::FanResult fan = fields::evolve_fan(sc, fo);

  csv::Table snaps({"t", "r", "f", "g", "n", "u", "v"});
  for (const auto& s : fan.snapshots) {
    for (std::size_t i = 0; i < s.r.size(); ++i) {
      snaps.add(csv::Table::Row() << s.t << s.r[i] << s.F[i] << s.G[i] << s.n[i] << s.u[i] << s.v[i]);
    }
  }
  run.write(snaps, "snapshots.csv");

  csv::Table diag({"t", "affine_distance", "delta_max", "radius_defect", "ordered"});
  for (const auto& s : fan.snapshots) {
    diag.add(csv::Table::Row() << s.t << s.affine_distance << s.delta_max << s.radius_defect
                               << (s.ordered ? "true" : "false"));
  }
  run.write(diag, "diagnostics.csv");

  const auto& rep = fan.report;
  nlohmann::json report = {{"verdict", fields::to_string(rep.verdict)},
                           {"t_star_global", detail::optional_json(rep.t_star_global)},
                           {"argmin_r0", detail::optional_json(rep.argmin_r0)},
                           {"ordering_violation_t", detail::optional_json(rep.ordering_violation_t)},
                           {"skipped_snapshot_times", fan.skipped_times},
                           {"tracks", nlohmann::json::array()}};
  for (const auto& t : rep.tracks) {
    report["tracks"].push_back({{"r0", t.r0},
                                {"blown_up", t.blowup.blown_up},
                                {"t_star", detail::optional_json(t.blowup.t_star)},
                                {"q_min", t.blowup.q_min},
                                {"t_q_min", t.blowup.t_q_min}});
  }
  run.write(report, "report.json");

  if (fan.axial) {
    const auto dens = characteristics::density(*fan.axial);
    csv::Table axial({"t", "n", "q"});
    svg::Series s{"n(t, 0)", {}, {}, false};
    for (const auto& sm : fan.axial->samples()) {
      axial.add(csv::Table::Row() << sm.t << sm.n << sm.q);
      s.x.push_back(sm.t);
      s.y.push_back(sm.n);
    }
    run.write(axial, "axial_density.csv");
    if (o.common.svg) run.write(svg::Chart{"Axial density", "t", "n", {s}}, "axial_density.svg");
  }
  if (o.common.svg) {
    svg::Series s{"max |u| + |v|", {}, {}, true};
    for (const auto& sn : fan.snapshots) {
      s.x.push_back(sn.t);
      s.y.push_back(sn.affine_distance);
    }
    run.write(svg::Chart{"Distance to the affine solution", "t", "affine distance", {s}},
              "affine_distance.svg");
  }
  return {run.finish(), rep.verdict, rep.t_star_global};
}

// ---------------------------------------------------------------- simplewave

struct SimpleWaveOptions {
  int d = 2;
  std::optional<double> constant;  // first-integral constant
  std::optional<double> beta;      // or: the family through (0, |beta|)
  int sign = 1;
  double amplitude = 0.25;
  double width = 1.0;
  double r_max = 6.0;
  std::size_t n_points = 121;
  CommonOptions common;
};

inline RunManifest cmd_simplewave(const SimpleWaveOptions& o) {
  const Dim d(o.d);
  if (o.constant.has_value() == o.beta.has_value()) {
    throw InputError("give exactly one of --c and --beta");
  }
  if (!(o.r_max > 0.0) || o.n_points < 2) throw InputError("need r_max > 0 and at least 2 points");
  simplewave::SimpleWaveFamily family = o.constant ? simplewave::make_family(d, *o.constant, o.sign)
                                                   : simplewave::affine_family(d, *o.beta);
  if (o.beta) family.sign = o.sign;
  if (family.sign != 1 && family.sign != -1) throw InputError("--sign must be +1 or -1");

  detail::Run run("simplewave", o.common);
  run.parameters() = {{"d", o.d},
                      {"constant", family.integral.constant},
                      {"sign", family.sign},
                      {"amplitude", o.amplitude},
                      {"width", o.width},
                      {"r_max", o.r_max},
                      {"n_points", o.n_points}};

  csv::Table table({"r", "g0", "f0", "f_squared"});
  svg::Series s{"F0(r)", {}, {}, false};
  double min_f2 = std::numeric_limits<double>::infinity();
  std::optional<double> first_bad;
  for (std::size_t i = 0; i < o.n_points; ++i) {
    const double r = o.r_max * static_cast<double>(i) / static_cast<double>(o.n_points - 1);
    const double g = o.amplitude * std::exp(-o.width * o.width * r * r);
    const double f2 = family.f_squared(g);
    min_f2 = std::min(min_f2, f2);
    std::optional<double> f0;
    if (f2 >= 0.0) {
      f0 = family.sign * std::sqrt(f2);
      s.x.push_back(r);
      s.y.push_back(*f0);
    } else if (!first_bad) {
      first_bad = r;
    }
    table.add(csv::Table::Row() << r << g << f0 << f2);
  }
  const double f2_far = family.f_squared(0.0);
  nlohmann::json report = {
      {"admissible", !first_bad.has_value()},
      {"min_f_squared", min_f2},
      {"first_inadmissible_r", detail::optional_json(first_bad)},
      {"f0_limit_r_to_infinity",
       f2_far >= 0.0 ? nlohmann::json(family.sign * std::sqrt(f2_far)) : nlohmann::json(nullptr)}};
  run.write(table, "family.csv");
  run.write(report, "admissibility.json");
  if (o.common.svg) run.write(svg::Chart{"Simple-wave velocity datum", "r", "F0", {s}}, "family.svg");
  RunManifest m = run.finish();
  if (first_bad) {
    throw InputError("datum is inadmissible for this family: F^2 < 0 from r = " + csv::format(*first_bad));
  }
  return m;
}

// ---------------------------------------------------------------- track

struct TrackOptions {
  int d = 3;
  characteristics::CharacteristicInit init{1.0, 0.2, 0.0, 0.0, 0.1};
  std::optional<double> horizon;  // default: 50 orbit periods
  CommonOptions common;
};

inline RunManifest cmd_track(const TrackOptions& o) {
  const Dim d(o.d);
  o.init.validate(d);
  const double horizon = o.horizon ? *o.horizon : characteristics::default_horizon(d, o.init);
  if (!(horizon > 0.0)) throw InputError("--horizon must be positive");

  detail::Run run("track", o.common);
  run.parameters() = {{"d", o.d},     {"r0", o.init.r0}, {"g0", o.init.G0}, {"f0", o.init.F0},
                      {"u0", o.init.u0}, {"v0", o.init.v0}, {"horizon", horizon}, {"tol", o.common.tol}};

  const auto tr = characteristics::track(o.init, d, horizon, o.common.config());
  csv::Table table({"t", "r", "g", "f", "q", "p1", "p2", "u", "v", "div_v", "lambda", "n"});
  svg::Series sq{"q", {}, {}, false};
  for (const auto& s : tr.samples()) {
    table.add(csv::Table::Row() << s.t << s.r << s.G << s.F << s.q << s.p1 << s.p2 << s.u << s.v << s.D
                                << s.lambda << s.n);
    sq.x.push_back(s.t);
    sq.y.push_back(s.q);
  }
  run.write(table, "track.csv");
  run.write(nlohmann::json{{"blown_up", tr.blowup.blown_up},
                           {"t_star", detail::optional_json(tr.blowup.t_star)},
                           {"q_min", tr.blowup.q_min},
                           {"t_q_min", tr.blowup.t_q_min},
                           {"horizon", tr.blowup.horizon}},
            "blowup.json");
  if (o.common.svg) run.write(svg::Chart{"Blow-up functional q(t)", "t", "q", {sq}}, "track.svg");
  return run.finish();
}

}  // namespace eplab::cli
