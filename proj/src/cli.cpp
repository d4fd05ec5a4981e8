#include "supdtl/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "supdtl/calibrate.hpp"
#include "supdtl/characteristics.hpp"
#include "supdtl/error.hpp"
#include "supdtl/normal.hpp"
#include "supdtl/simulate.hpp"

namespace supdtl::cli {

using nlohmann::json;

namespace {

// JSON has no infinity; a disabled look is stored as null.
json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string shape_name(const BoundaryShape& s) {
  switch (s.kind) {
    case BoundaryShape::Kind::obrien_fleming:
      return "obf";
    case BoundaryShape::Kind::pocock:
      return "pocock";
    case BoundaryShape::Kind::custom:
      break;
  }
  return "custom";
}

EvalOptions eval_options(const ParsedConfig& cfg) { return {cfg.tol, cfg.seed}; }

std::string fmt_bound(double u) { return std::isfinite(u) ? fmt::format("{:.2f}", u) : "inf"; }

std::string fmt_bounds(const std::vector<double>& u) {
  std::string s;
  for (std::size_t i = 0; i < u.size(); ++i) s += (i ? ", " : "") + fmt_bound(u[i]);
  return "(" + s + ")";
}

struct Designed {
  TrialDesign design;
  json calibration;
};

Designed build_design(const ParsedConfig& cfg, const BoundaryShape& shape) {
  const NormalEffectSpec eff = cfg.normal_effects();
  auto cal = calibrate_scale(cfg.design_template(), shape, cfg.calibration);
  json info{{"shape", shape_name(shape)},
            {"scale", cal.scale},
            {"pwer", cal.pwer},
            {"bisection_steps", cal.iterations},
            {"alpha", cfg.calibration.alpha},
            {"omega", cfg.calibration.omega},
            {"power_target", cfg.calibration.power_target}};
  if (cfg.n_per_stage) {
    info["n_search"] = "fixed";
    return {cal.design, info};
  }
  auto search = search_sample_size(cal.design, eff.theta_prime, eff.theta_zero, cfg.calibration);
  info["n_search"] = "searched";
  info["power_at_search"] = search.power;
  info["power_evaluations"] = search.evaluations;
  return {search.design, info};
}

TrialDesign resolve_design(const RunConfig& run, const ParsedConfig& cfg) {
  if (!run.design_path) return build_design(cfg, cfg.shape).design;
  std::ifstream in(*run.design_path);
  if (!in) throw InputError("cannot open design record '" + run.design_path->string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("design record is not valid JSON: " + std::string(e.what()));
  }
  TrialDesign d = design_from_json(j.contains("design") ? j.at("design") : j);
  if (d.arms != cfg.arms) throw InputError("design record arms do not match the config");
  return d;
}

json endpoint_json(const NormalEffectSpec& e) {
  return {{"theta_prime", e.theta_prime}, {"theta_zero", e.theta_zero}, {"sigma_sq", e.sigma_sq}};
}

json run_design(const ParsedConfig& cfg, std::ostream& table) {
  const NormalEffectSpec eff = cfg.normal_effects();
  const auto opts = eval_options(cfg);
  auto made = build_design(cfg, cfg.shape);
  const TrialDesign& d = made.design;
  const double pw = pwer(d, opts);
  const double power = power_lfc(d, eff.theta_prime, eff.theta_zero, opts);
  const auto max_n = max_sample_size(d);

  fmt::print(table, "boundaries    {}\n", fmt_bounds(d.boundaries));
  fmt::print(table, "n per stage   {}\n", d.n_per_stage);
  fmt::print(table, "max N         {}\n", max_n);
  fmt::print(table, "PWER          {:.3f}\n", pw);
  fmt::print(table, "power (LFC)   {:.3f}\n", power);

  return {{"command", "design"},
          {"design", design_to_json(d)},
          {"endpoint", endpoint_json(eff)},
          {"calibration", made.calibration},
          {"pwer", pw},
          {"power_lfc", power},
          {"max_n", max_n}};
}

json scenario_report(const TrialDesign& d, const EffectConfig& eff, const EvalOptions& opts) {
  auto stops = stop_probabilities(d, eff, opts);
  const double early = 1.0 - stops.by_stage.back();
  return {{"deltas", eff.deltas},
          {"stop_probs", stops.by_stage},
          {"early_stop", early},
          {"ess", ess_from_stop_probs(d, stops.by_stage)},
          {"power", recommend_probability(d, eff, 1, opts)},
          {"type_i_error", type_i_error(d, eff, 1, opts)},
          {"boundary_crossing", boundary_crossing_probability(d, eff, 1, opts)}};
}

json run_evaluate(const RunConfig& run, const ParsedConfig& cfg, std::ostream& table) {
  const NormalEffectSpec eff = cfg.normal_effects();
  const auto opts = eval_options(cfg);
  const TrialDesign d = resolve_design(run, cfg);
  const auto named = cfg.effects_or_default();
  const auto oc = full_report(d, eff, named, opts);

  json scenarios = json::object();
  for (const auto& [name, e] : named) scenarios[name] = scenario_report(d, e, opts);

  fmt::print(table, "boundaries {}  n per stage {}  max N {}\n", fmt_bounds(d.boundaries),
             d.n_per_stage, oc.max_n);
  fmt::print(table, "power {:.3f}  type I error {:.3f}  PWER {:.3f}\n", oc.power_lfc,
             oc.type_i_global_null, oc.pwer);
  fmt::print(table, "{:<16} {:>10} {:>10}", "scenario", "E(N)", "early");
  for (int j = 1; j <= d.stages; ++j) fmt::print(table, " {:>8}", fmt::format("stop {}", j));
  fmt::print(table, "\n");
  for (const auto& [name, e] : named) {
    const auto& s = scenarios[name];
    fmt::print(table, "{:<16} {:>10.1f} {:>10.3f}", name, s["ess"].get<double>(),
               s["early_stop"].get<double>());
    for (double p : s["stop_probs"]) fmt::print(table, " {:>8.3f}", p);
    fmt::print(table, "\n");
  }

  return {{"command", "evaluate"},
          {"design", design_to_json(d)},
          {"endpoint", endpoint_json(eff)},
          {"tol", cfg.tol},
          {"pwer", oc.pwer},
          {"power_lfc", oc.power_lfc},
          {"type_i_global_null", oc.type_i_global_null},
          {"max_n", oc.max_n},
          {"scenarios", scenarios}};
}

json run_simulate(const RunConfig& run, const ParsedConfig& cfg, std::ostream& table) {
  const auto opts = eval_options(cfg);
  const TrialDesign d = resolve_design(run, cfg);
  const auto named = cfg.effects_or_default();

  fmt::print(table, "{} replicates, seed {}\n", cfg.reps, cfg.seed);
  fmt::print(table, "{:<16} {:<14} {:>10} {:>10} {:>9} {:>7}\n", "scenario", "metric", "analytic",
             "simulated", "SE", "z");
  json scenarios = json::object();
  std::uint64_t index = 0;
  for (const auto& [name, e] : named) {
    // Each scenario gets its own stream so adding one does not shift the rest.
    const std::uint64_t seed = cfg.seed + 0x9E3779B97F4A7C15ULL * ++index;
    const auto sim = estimate_characteristics(d, e, cfg.reps, seed);
    const json analytic = scenario_report(d, e, opts);

    std::vector<std::pair<std::string, double>> pairs{
        {"power", analytic["power"]},
        {"type_i_error", analytic["type_i_error"]},
        {"pwer", analytic["boundary_crossing"]},
        {"early_stop", analytic["early_stop"]},
        {"ess", analytic["ess"]}};
    for (int j = 1; j <= d.stages; ++j)
      pairs.emplace_back("stop_stage_" + std::to_string(j), analytic["stop_probs"][j - 1]);

    json metrics = json::object();
    for (const auto& [metric, value] : pairs) {
      const auto& est = sim.estimates.at(metric);
      const double diff = est.value - value;
      const double z = est.standard_error > 0.0 ? diff / est.standard_error : 0.0;
      metrics[metric] = {{"analytic", value},
                         {"simulated", est.value},
                         {"standard_error", est.standard_error},
                         {"difference", diff},
                         {"z", z}};
      const bool big = metric == "ess";
      fmt::print(table, "{:<16} {:<14} {:>10} {:>10} {:>9} {:>7.2f}\n", name, metric,
                 big ? fmt::format("{:.1f}", value) : fmt::format("{:.3f}", value),
                 big ? fmt::format("{:.1f}", est.value) : fmt::format("{:.3f}", est.value),
                 big ? fmt::format("{:.2f}", est.standard_error)
                     : fmt::format("{:.4f}", est.standard_error),
                 z);
    }
    scenarios[name] = {{"deltas", e.deltas},
                       {"seed", seed},
                       {"stop_histogram", sim.stop_histogram},
                       {"metrics", metrics}};
  }
  return {{"command", "simulate"},
          {"design", design_to_json(d)},
          {"replicates", cfg.reps},
          {"seed", cfg.seed},
          {"tol", cfg.tol},
          {"scenarios", scenarios}};
}

json run_compare(const ParsedConfig& cfg, std::ostream& table) {
  const NormalEffectSpec eff = cfg.normal_effects();
  const auto opts = eval_options(cfg);
  const auto named = default_effects(cfg.arms, eff);
  const double alpha = cfg.calibration.alpha;
  const double sigma = std::sqrt(eff.sigma_sq);
  json rows = json::array();

  auto staged_row = [&](const std::string& label, const BoundaryShape& shape) {
    const TrialDesign d = build_design(cfg, shape).design;
    const auto oc = full_report(d, eff, named, opts);
    json ess = json::object();
    for (const auto& [name, e] : named) ess[name] = oc.ess.at(name);
    rows.push_back({{"design", label},
                    {"status", "computed"},
                    {"boundaries", json::array()},
                    {"n", d.n_per_stage},
                    {"power", oc.power_lfc},
                    {"type_i_error", oc.type_i_global_null},
                    {"pwer", oc.pwer},
                    {"max_n", oc.max_n},
                    {"ess", ess}});
    for (double u : d.boundaries) rows.back()["boundaries"].push_back(real_or_null(u));
  };
  auto fixed_row = [&](const std::string& label, const ComparatorResult& r) {
    json ess = json::object();
    for (const auto& [name, e] : named) ess[name] = static_cast<double>(r.max_n);
    rows.push_back({{"design", label},
                    {"status", "computed"},
                    {"n", r.n},
                    {"power", r.power},
                    {"type_i_error", alpha},
                    {"pwer", alpha},
                    {"max_n", r.max_n},
                    {"ess", ess}});
  };
  auto out_of_scope = [&](const std::string& label) {
    rows.push_back({{"design", label}, {"status", "out_of_scope"}});
  };

  staged_row("multi-stage superiority drop-the-loser", cfg.shape);
  std::vector<double> dtl(cfg.arms, kInf);
  dtl.back() = 1.0;
  staged_row("multi-stage drop-the-loser", BoundaryShape::from_multipliers(dtl));
  fixed_row("multi-arm", comparator_multiarm(cfg.arms, alpha, cfg.calibration.power_target,
                                             eff.theta_prime, eff.theta_zero, sigma, opts));
  out_of_scope("MAMS symmetric futility");
  out_of_scope("MAMS zero futility");
  fixed_row("separate trials", comparator_separate_trials(cfg.arms, alpha,
                                                          cfg.calibration.power_target,
                                                          eff.theta_prime, sigma));
  out_of_scope("multi-stage separate trials symmetric futility");
  out_of_scope("multi-stage separate trials zero futility");

  fmt::print(table, "{:<48} {:>6} {:>8} {:>6} {:>7} {:>9} {:>9} {:>9}\n", "design", "power",
             "type I*", "PWER", "max N", "E(N|D0)", "E(N|D1)", "E(N|D2)");
  for (const auto& r : rows) {
    const std::string label = r["design"];
    if (r["status"] == "out_of_scope") {
      fmt::print(table, "{:<48} {}\n", label, "(not reproduced: out of scope)");
      continue;
    }
    fmt::print(table, "{:<48} {:>6.3f} {:>8.3f} {:>6.3f} {:>7}", label, r["power"].get<double>(),
               r["type_i_error"].get<double>(), r["pwer"].get<double>(),
               r["max_n"].get<std::int64_t>());
    for (const auto& [name, e] : named) fmt::print(table, " {:>9.1f}", r["ess"][name].get<double>());
    fmt::print(table, "\n");
  }
  fmt::print(table, "* type I error of a given arm under the global null\n");

  return {{"command", "compare"},
          {"endpoint", endpoint_json(eff)},
          {"alpha", alpha},
          {"power_target", cfg.calibration.power_target},
          {"tol", cfg.tol},
          {"rows", rows}};
}

json diagnostic(const std::exception& e) {
  json d{{"message", e.what()}};
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    d["kind"] = "parse";
    d["line"] = p->line();
  } else if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    d["kind"] = "validation";
    d["field"] = v->field();
  } else if (dynamic_cast<const CapacityError*>(&e)) {
    d["kind"] = "capacity";
  } else if (dynamic_cast<const BracketError*>(&e)) {
    d["kind"] = "bracket";
  } else if (dynamic_cast<const NotPositiveSemidefinite*>(&e)) {
    d["kind"] = "not_psd";
  } else if (dynamic_cast<const InputError*>(&e)) {
    d["kind"] = "input";
  } else {
    d["kind"] = "error";
  }
  return {{"error", d}};
}

}  // namespace

json design_to_json(const TrialDesign& d) {
  json b = json::array();
  for (double u : d.boundaries) b.push_back(real_or_null(u));
  return {{"arms", d.arms},     {"stages", d.stages}, {"n_per_stage", d.n_per_stage},
          {"boundaries", b},    {"alpha", d.alpha},   {"sigma", d.sigma}};
}

TrialDesign design_from_json(const json& j) {
  try {
    TrialDesign d;
    d.arms = j.at("arms").get<int>();
    d.stages = j.at("stages").get<int>();
    d.n_per_stage = j.at("n_per_stage").get<int>();
    d.alpha = j.at("alpha").get<double>();
    d.sigma = j.at("sigma").get<double>();
    d.boundaries.clear();
    for (const auto& u : j.at("boundaries")) d.boundaries.push_back(u.is_null() ? kInf : u.get<double>());
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw InputError("malformed design record: " + std::string(e.what()));
  }
}

void apply_overrides(const RunConfig& run, ParsedConfig& cfg) {
  if (run.alpha) cfg.calibration.alpha = *run.alpha;
  if (run.power) cfg.calibration.power_target = *run.power;
  if (run.omega) cfg.calibration.omega = *run.omega;
  cfg.calibration.validate();
  if (run.seed) cfg.seed = *run.seed;
  if (run.reps) {
    if (*run.reps < 2) throw ValidationError("reps", "must be at least 2");
    cfg.reps = *run.reps;
  }
  if (run.tol) {
    if (!(*run.tol > 0.0 && *run.tol < 0.1)) throw ValidationError("tol", "must lie in (0, 0.1)");
    cfg.tol = *run.tol;
  }
}

json execute(const RunConfig& run, const ParsedConfig& cfg, std::ostream& table) {
  if (run.command == "design") return run_design(cfg, table);
  if (run.command == "evaluate") return run_evaluate(run, cfg, table);
  if (run.command == "simulate") return run_simulate(run, cfg, table);
  if (run.command == "compare") return run_compare(cfg, table);
  throw InputError("unknown command '" + run.command + "'");
}

int run(const RunConfig& run, std::ostream& out, std::ostream& err) {
  try {
    ParsedConfig cfg = load_config(run.config_path);
    apply_overrides(run, cfg);
    std::ostringstream table;
    const json report = execute(run, cfg, table);
    if (run.out_path) {
      std::ofstream f(*run.out_path);
      if (!f) throw InputError("cannot write '" + run.out_path->string() + "'");
      f << report.dump(2) << '\n';
      if (!f) throw InputError("failed writing '" + run.out_path->string() + "'");
    }
    out << table.str();
    return 0;
  } catch (const std::exception& e) {
    err << diagnostic(e).dump() << '\n';
    return 1;
  }
}

}  // namespace supdtl::cli
