#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "supdtl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Drop-the-loser trial designer with early stopping for superiority"};
  app.require_subcommand(1);

  supdtl::cli::RunConfig run;
  std::string out, design;
  double alpha = 0, power = 0, omega = 0, tol = 0;
  std::uint64_t seed = 0;
  std::int64_t reps = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"design", "Calibrate boundaries and find the per-stage sample size"},
      {"evaluate", "Analytic operating characteristics for each effect scenario"},
      {"simulate", "Monte Carlo check of the analytic characteristics"},
      {"compare", "Sample sizes of the design against comparator designs"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", run.config_path, "Design configuration file")->required();
    sub->add_option("--out", out, "Write the JSON report here");
    sub->add_option("--seed", seed, "Seed for integration and simulation");
    sub->add_option("--reps", reps, "Simulation replicates");
    sub->add_option("--tol", tol, "Integration error for reported probabilities");
    sub->add_option("--alpha", alpha, "Target PWER");
    sub->add_option("--power", power, "Target power under the LFC");
    sub->add_option("--omega", omega, "Calibration window below alpha");
    if (std::string(name) == "evaluate" || std::string(name) == "simulate")
      sub->add_option("--design", design, "Design record written by `design`");
  }
  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  run.command = sub->get_name();
  if (sub->count("--out")) run.out_path = out;
  if (sub->get_option_no_throw("--design") && sub->count("--design")) run.design_path = design;
  if (sub->count("--seed")) run.seed = seed;
  if (sub->count("--reps")) run.reps = reps;
  if (sub->count("--tol")) run.tol = tol;
  if (sub->count("--alpha")) run.alpha = alpha;
  if (sub->count("--power")) run.power = power;
  if (sub->count("--omega")) run.omega = omega;
  return supdtl::cli::run(run, std::cout, std::cerr);
}
