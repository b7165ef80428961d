#pragma once

// Scenario files for `eplab evolve`:
//
//   {
//     "name": "gaussian_d3",
//     "d": 3,
//     "horizon": 100,
//     "tolerances": {"abs": 1e-10, "rel": 1e-10},
//     "grid": {"r_max": 6, "n_points": 129, "clustering": 3},
//     "snapshots": {"count": 41},            or a list of times
//     "data": {"kind": "gaussian", "parameters": {"amplitude": 0.3, "width": 1}}
//   }
//
// Data kinds and their parameters:
//   affine       alpha, beta
//   gaussian     amplitude, width
//   simple_wave  constant, sign, amplitude, width
//   tabulated    rows: [[r, F0, G0], ...] (replaces the grid)

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eplab/error.hpp"
#include "eplab/fields.hpp"
#include "eplab/simplewave.hpp"

namespace eplab::cli {

using nlohmann::json;

struct ScenarioFile {
  fields::Scenario scenario;
  json resolved;  // the document with defaults filled in
};

namespace detail {

inline InputError field_error(const std::string& path, const std::string& msg) {
  return InputError("scenario." + path + ": " + msg);
}

inline const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) throw field_error(path, "must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw field_error(path.empty() ? key : path + "." + key, "is required");
  return *it;
}

inline double number(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  const std::string full = path.empty() ? key : path + "." + key;
  if (!v.is_number()) throw field_error(full, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw field_error(full, "must be finite");
  return x;
}

inline double number_or(const json& obj, const std::string& path, const char* key, double dflt) {
  if (!obj.is_object() || !obj.contains(key)) return dflt;
  return number(obj, path, key);
}

inline long integer(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  const std::string full = path.empty() ? key : path + "." + key;
  if (!v.is_number_integer()) throw field_error(full, "must be an integer");
  return v.get<long>();
}

}  // namespace detail

inline constexpr std::size_t default_snapshot_count = 41;

inline ScenarioFile parse_scenario(const json& doc) {
  using detail::field_error;
  using detail::number;
  if (!doc.is_object()) throw InputError("scenario: top level must be a JSON object");
  ScenarioFile out;
  json& res = out.resolved;

  const long dv = detail::integer(doc, "", "d");
  if (dv < 1) throw field_error("d", "must be >= 1");
  const Dim d(static_cast<int>(dv));
  res["d"] = dv;

  const double horizon = number(doc, "", "horizon");
  if (!(horizon > 0.0)) throw field_error("horizon", "must be positive");
  res["horizon"] = horizon;
  res["name"] = doc.value("name", std::string("scenario"));

  ode::IntegrationConfig cfg;
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    cfg.abs_tol = detail::number_or(t, "tolerances", "abs", cfg.abs_tol);
    cfg.rel_tol = detail::number_or(t, "tolerances", "rel", cfg.rel_tol);
    if (!(cfg.abs_tol > 0.0)) throw field_error("tolerances.abs", "must be positive");
    if (!(cfg.rel_tol > 0.0)) throw field_error("tolerances.rel", "must be positive");
  }
  res["tolerances"] = {{"abs", cfg.abs_tol}, {"rel", cfg.rel_tol}};

  const json& data = detail::member(doc, "", "data");
  const json& kind_v = detail::member(data, "data", "kind");
  if (!kind_v.is_string()) throw field_error("data.kind", "must be a string");
  const std::string kind = kind_v.get<std::string>();
  const json params = data.contains("parameters") ? data["parameters"] : json::object();
  if (!params.is_object()) throw field_error("data.parameters", "must be an object");

  std::vector<double> grid;
  if (kind != "tabulated") {
    const json& g = detail::member(doc, "", "grid");
    const double r_max = number(g, "grid", "r_max");
    if (!(r_max > 0.0)) throw field_error("grid.r_max", "must be positive");
    const long n = detail::integer(g, "grid", "n_points");
    if (n < 5) throw field_error("grid.n_points", "must be >= 5");
    const double k = detail::number_or(g, "grid", "clustering", 0.0);
    if (k < 0.0) throw field_error("grid.clustering", "must be >= 0");
    grid = fields::clustered_grid(r_max, static_cast<std::size_t>(n), k);
    res["grid"] = {{"r_max", r_max}, {"n_points", n}, {"clustering", k}};
  }

  const std::string pp = "data.parameters";
  fields::Scenario& sc = out.scenario;
  try {
    if (kind == "affine") {
      const double alpha = number(params, pp, "alpha");
      const double beta = number(params, pp, "beta");
      sc = fields::affine_scenario(d, alpha, beta, grid, horizon);
      res["data"] = {{"kind", kind}, {"parameters", {{"alpha", alpha}, {"beta", beta}}}};
    } else if (kind == "gaussian") {
      const double amp = number(params, pp, "amplitude");
      const double width = number(params, pp, "width");
      sc = fields::gaussian_scenario(d, amp, width, grid, horizon);
      res["data"] = {{"kind", kind}, {"parameters", {{"amplitude", amp}, {"width", width}}}};
    } else if (kind == "simple_wave") {
      const double c = number(params, pp, "constant");
      const long sign = detail::integer(params, pp, "sign");
      const double amp = number(params, pp, "amplitude");
      const double width = number(params, pp, "width");
      const auto family = simplewave::make_family(d, c, static_cast<int>(sign));
      sc = fields::simple_wave_scenario(family, amp, width, grid, horizon);
      res["data"] = {{"kind", kind},
                     {"parameters",
                      {{"constant", c}, {"sign", sign}, {"amplitude", amp}, {"width", width}}}};
    } else if (kind == "tabulated") {
      const json& rows = detail::member(params, pp, "rows");
      if (!rows.is_array() || rows.size() < 5) throw field_error(pp + ".rows", "needs at least 5 rows");
      std::vector<double> r, F, G;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const json& row = rows[i];
        const std::string where = pp + ".rows[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != 3) throw field_error(where, "must be [r, F0, G0]");
        for (const auto& x : row) {
          if (!x.is_number()) throw field_error(where, "entries must be numbers");
        }
        r.push_back(row[0].get<double>());
        F.push_back(row[1].get<double>());
        G.push_back(row[2].get<double>());
      }
      sc = fields::tabulated_scenario(d, r, F, G, horizon);
      res["data"] = {{"kind", kind}, {"parameters", {{"rows", rows}}}};
    } else {
      throw field_error("data.kind", "unknown kind '" + kind +
                                         "' (expected affine, gaussian, simple_wave or tabulated)");
    }
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind("scenario.", 0) == 0) throw;
    throw field_error("data", msg);
  }
  sc.name = res["name"].get<std::string>();
  sc.config = cfg;

  if (doc.contains("snapshots") && doc["snapshots"].is_array()) {
    for (const auto& t : doc["snapshots"]) {
      if (!t.is_number()) throw field_error("snapshots", "times must be numbers");
      sc.snapshot_times.push_back(t.get<double>());
    }
    res["snapshots"] = sc.snapshot_times;
  } else {
    long count = static_cast<long>(default_snapshot_count);
    if (doc.contains("snapshots")) count = detail::integer(doc["snapshots"], "snapshots", "count");
    if (count < 2) throw field_error("snapshots.count", "must be >= 2");
    sc.snapshot_times = fields::uniform_times(horizon, static_cast<std::size_t>(count));
    res["snapshots"] = {{"count", count}};
  }

  try {
    sc.validate();
    (void)fields::derive_initial_uv(sc);
  } catch (const InputError& e) {
    throw field_error("data", e.what());
  }
  return out;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open scenario file " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InputError("scenario file " + path + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace eplab::cli
