// eplab: command-line front end for the Euler-Poisson characteristic analyses.
//
// Exit codes: 0 analysis completed (blow-up verdicts included), 2 invalid
// input, 3 numerical failure without a verdict.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "eplab/cli/commands.hpp"
#include "eplab/error.hpp"

namespace {

void add_common(CLI::App* sub, eplab::cli::CommonOptions& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_flag("--svg", c.svg, "Also write SVG charts");
  sub->add_option("--tol", c.tol, "Absolute and relative integration tolerance")->capture_default_str();
}

void report(const eplab::cli::RunManifest& m) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << m.command << ": wrote";
  for (const auto& f : m.outputs) std::cout << ' ' << f;
  std::cout << " (config " << m.config_hash() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace eplab::cli;
  CLI::App app{"Radially symmetric Euler-Poisson laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(artifact_version));

  PhaseOptions phase;
  auto* c_phase = app.add_subcommand("phase", "Orbit samples of the characteristic system");
  c_phase->add_option("--d", phase.dims, "Dimensions, comma separated")->delimiter(',')->capture_default_str();
  c_phase->add_option("--g-plus", phase.g_plus, "Upper turning point G+")->capture_default_str();
  c_phase->add_option("--samples", phase.samples, "Samples per orbit")->capture_default_str();
  add_common(c_phase, phase.common);

  PeriodOptions period;
  auto* c_period = app.add_subcommand("period", "Period against G+ by event, quadrature and asymptotics");
  c_period->add_option("--d", period.d, "Dimension")->capture_default_str();
  c_period->add_option("--step", period.step, "G+ step")->capture_default_str();
  c_period->add_option("--g-min", period.g_min, "First G+ (default: step)");
  c_period->add_option("--g-max", period.g_max, "Last G+ (default: below 1/d)");
  add_common(c_period, period.common);

  FloquetOptions floq;
  auto* c_floq = app.add_subcommand("floquet", "Hill-equation monodromy scan over G+");
  c_floq->add_option("--d", floq.dims, "Dimensions, comma separated")->delimiter(',')->capture_default_str();
  c_floq->add_option("--step", floq.step, "G+ step")->capture_default_str();
  c_floq->add_option("--neutral-tol", floq.neutral_tol, "Band |z(T) - 1| classed neutral")
      ->capture_default_str();
  add_common(c_floq, floq.common);

  EvolveOptions evolve;
  std::optional<double> evolve_tol;
  auto* c_evolve = app.add_subcommand("evolve", "Evolve a scenario file on a fan of characteristics");
  c_evolve->add_option("scenario", evolve.scenario_path, "Scenario JSON file")->required();
  c_evolve->add_option("--horizon", evolve.horizon, "Override the scenario horizon");
  c_evolve->add_option("--out", evolve.common.out, "Output directory")->capture_default_str();
  c_evolve->add_flag("--svg", evolve.common.svg, "Also write SVG charts");
  c_evolve->add_option("--tol", evolve_tol, "Override the scenario tolerances");

  SimpleWaveOptions sw;
  auto* c_sw = app.add_subcommand("simplewave", "Simple-wave velocity datum for a Gaussian field profile");
  c_sw->add_option("--d", sw.d, "Dimension")->capture_default_str();
  auto* opt_c = c_sw->add_option("--c", sw.constant, "First-integral constant of the family");
  c_sw->add_option("--beta", sw.beta, "Use the family through (G, F) = (0, |beta|)")->excludes(opt_c);
  c_sw->add_option("--sign", sw.sign, "Branch of F = sign * sqrt(F^2)")->capture_default_str();
  c_sw->add_option("--amplitude", sw.amplitude, "G0(r) = amplitude * exp(-width^2 r^2)")
      ->capture_default_str();
  c_sw->add_option("--width", sw.width, "Gaussian width parameter")->capture_default_str();
  c_sw->add_option("--r-max", sw.r_max, "Largest sampled radius")->capture_default_str();
  c_sw->add_option("--n-points", sw.n_points, "Number of sampled radii")->capture_default_str();
  add_common(c_sw, sw.common);

  TrackOptions tr;
  auto* c_tr = app.add_subcommand("track", "One characteristic with its blow-up functional q(t)");
  c_tr->add_option("--d", tr.d, "Dimension")->capture_default_str();
  c_tr->add_option("--r0", tr.init.r0, "Starting radius")->capture_default_str();
  c_tr->add_option("--g0", tr.init.G0, "Initial G")->capture_default_str();
  c_tr->add_option("--f0", tr.init.F0, "Initial F")->capture_default_str();
  c_tr->add_option("--u0", tr.init.u0, "Initial r dF/dr")->capture_default_str();
  c_tr->add_option("--v0", tr.init.v0, "Initial r dG/dr")->capture_default_str();
  c_tr->add_option("--horizon", tr.horizon, "Final time (default: 50 orbit periods)");
  add_common(c_tr, tr.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*c_phase) {
      report(cmd_phase(phase));
    } else if (*c_period) {
      report(cmd_period(period));
    } else if (*c_floq) {
      report(cmd_floquet(floq));
    } else if (*c_evolve) {
      if (evolve_tol) {
        evolve.common.tol = *evolve_tol;
        evolve.tol_override = true;
      }
      const EvolveOutcome res = cmd_evolve(evolve);
      report(res.manifest);
      std::cout << "verdict: " << eplab::fields::to_string(res.verdict);
      if (res.t_star) std::cout << ", t* = " << eplab::csv::format(*res.t_star);
      std::cout << '\n';
    } else if (*c_sw) {
      report(cmd_simplewave(sw));
    } else if (*c_tr) {
      report(cmd_track(tr));
    }
  } catch (const eplab::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const eplab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
