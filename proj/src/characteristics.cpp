#include "supdtl/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "supdtl/error.hpp"
#include "supdtl/normal.hpp"

namespace supdtl {

namespace {

// Distinct integration streams per quantity so results do not share noise.
constexpr std::uint64_t kPwerStream = 0x1001;
constexpr std::uint64_t kRecommendStream = 0x2002;
constexpr std::uint64_t kRejectStream = 0x3003;
constexpr std::uint64_t kStopStream = 0x4004;
constexpr std::uint64_t kMultiarmStream = 0x5005;

void check_effects(const TrialDesign& design, const EffectConfig& effects) {
  if (static_cast<int>(effects.deltas.size()) != design.arms)
    throw InputError("effect configuration has " + std::to_string(effects.deltas.size()) +
                     " entries for " + std::to_string(design.arms) + " arms");
  for (double d : effects.deltas)
    if (!std::isfinite(d)) throw InputError("effects must be finite");
}

void check_focal(const TrialDesign& design, int focal) {
  if (focal < 1 || focal > design.arms)
    throw InputError("focal arm " + std::to_string(focal) + " out of range");
}

double total_of(const std::vector<EventProblemSet>& sets, const EvalOptions& opts,
                std::uint64_t stream) {
  return integrate_sets(sets, opts.tol, opts.seed ^ stream).total;
}

}  // namespace

double pwer(const TrialDesign& design, const EvalOptions& opts) {
  design.validate();
  auto problem = pwer_problem(design);
  auto est = mvn::rectangle_probability(problem, opts.tol, opts.seed ^ kPwerStream);
  return std::clamp(1.0 - est.value, 0.0, 1.0);
}

double boundary_crossing_probability(const TrialDesign& design, const EffectConfig& effects,
                                     int focal, const EvalOptions& opts) {
  design.validate();
  check_effects(design, effects);
  check_focal(design, focal);
  std::vector<StatCoord> coords;
  std::vector<double> lo, hi;
  for (int j = 1; j <= design.stages; ++j) {
    if (std::isinf(design.boundaries[j - 1])) continue;
    coords.push_back(StatCoord::single(focal, j));
    lo.push_back(-kInf);
    hi.push_back(design.boundaries[j - 1]);
  }
  auto problem = build_moment_problem(design, effects, coords, lo, hi);
  auto est = mvn::rectangle_probability(problem, opts.tol, opts.seed ^ kPwerStream);
  return std::clamp(1.0 - est.value, 0.0, 1.0);
}

double power_lfc(const TrialDesign& design, double theta_prime, double theta_zero,
                 const EvalOptions& opts) {
  design.validate();
  return total_of(power_lfc_problems(design, theta_prime, theta_zero), opts, kRecommendStream);
}

double recommend_probability(const TrialDesign& design, const EffectConfig& effects, int focal,
                             const EvalOptions& opts) {
  design.validate();
  check_effects(design, effects);
  check_focal(design, focal);
  return total_of(recommend_problems(design, effects, focal), opts, kRecommendStream);
}

double type_i_error(const TrialDesign& design, const EffectConfig& effects, int focal,
                    const EvalOptions& opts) {
  design.validate();
  check_effects(design, effects);
  check_focal(design, focal);
  return total_of(rejection_problems(design, effects, focal), opts, kRejectStream);
}

double type_i_global_null(const TrialDesign& design, const EvalOptions& opts) {
  design.validate();
  return total_of(global_null_typeI_problems(design), opts, kRejectStream);
}

StageProbabilities stop_probabilities(const TrialDesign& design, const EffectConfig& effects,
                                      const EvalOptions& opts) {
  design.validate();
  check_effects(design, effects);
  // A trial that reaches the last look stops there, so only the interim
  // stages are integrated and the last one takes the remaining mass.
  auto sets = stop_stage_problems(design, effects);
  std::erase_if(sets, [&](const EventProblemSet& s) { return s.stage >= design.stages; });
  auto out = integrate_sets(sets, opts.tol, opts.seed ^ kStopStream);
  out.by_stage.resize(static_cast<std::size_t>(design.stages), 0.0);
  out.by_stage.back() = std::max(0.0, 1.0 - out.total);
  out.total = out.total + out.by_stage.back();
  return out;
}

std::int64_t patients_at_stop(const TrialDesign& design, int stage) {
  if (stage < 1 || stage > design.stages) throw InputError("stage out of range");
  const std::int64_t n = design.n_per_stage;
  std::int64_t total = 0;
  for (int i = 1; i < stage; ++i) total += i * n;
  total += static_cast<std::int64_t>(design.arms - stage + 2) * stage * n;
  return total;
}

std::int64_t patients_at_stop_cumulative(const TrialDesign& design, int stage) {
  if (stage < 1 || stage > design.stages) throw InputError("stage out of range");
  const std::int64_t n = design.n_per_stage;
  auto cum = [&](int j) { return j * n; };
  std::int64_t total = 0;
  for (int i = 1; i < stage; ++i) total += cum(i);
  total += (design.arms - stage + 1) * cum(stage);
  total += cum(stage);  // control
  return total;
}

std::int64_t max_sample_size(const TrialDesign& design) {
  const std::int64_t n = design.n_per_stage;
  std::int64_t total = 0;
  for (int j = 1; j <= design.stages; ++j) total += j * n;
  return total + design.stages * n;
}

double ess_from_stop_probs(const TrialDesign& design, const std::vector<double>& stop_probs) {
  if (static_cast<int>(stop_probs.size()) != design.stages)
    throw InputError("need one stop probability per stage");
  double ess = 0.0;
  for (int j = 1; j <= design.stages; ++j)
    ess += stop_probs[j - 1] * static_cast<double>(patients_at_stop(design, j));
  return ess;
}

double ess_from_stop_probs_cumulative(const TrialDesign& design,
                                      const std::vector<double>& stop_probs) {
  if (static_cast<int>(stop_probs.size()) != design.stages)
    throw InputError("need one stop probability per stage");
  double ess = 0.0;
  for (int j = 1; j <= design.stages; ++j)
    ess += stop_probs[j - 1] * static_cast<double>(patients_at_stop_cumulative(design, j));
  return ess;
}

double expected_sample_size(const TrialDesign& design, const EffectConfig& effects,
                            const EvalOptions& opts) {
  auto probs = stop_probabilities(design, effects, opts);
  return ess_from_stop_probs(design, probs.by_stage);
}

double multiarm_power(int arms, int n, double critical_value, double theta_prime,
                      double theta_zero, double sigma, const EvalOptions& opts) {
  if (arms < 1) throw InputError("arms must be at least 1");
  if (n < 1) throw InputError("n must be at least 1");
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  const double mean1 = theta_prime * std::sqrt(static_cast<double>(n)) / (sigma * std::sqrt(2.0));
  if (arms == 1) return norm_sf(critical_value - mean1);

  // Reuse the staged covariance with a single look at stage 1.
  TrialDesign d;
  d.arms = arms;
  d.stages = arms;
  d.n_per_stage = n;
  d.boundaries.assign(arms, critical_value);
  d.sigma = sigma;
  EffectConfig eff;
  eff.deltas.assign(arms, theta_zero);
  eff.deltas[0] = theta_prime;

  std::vector<StatCoord> coords{StatCoord::single(1, 1)};
  std::vector<double> lo{critical_value}, hi{kInf};
  for (int k = 2; k <= arms; ++k) {
    coords.push_back(StatCoord::difference(1, k, 1));
    lo.push_back(0.0);
    hi.push_back(kInf);
  }
  auto problem = build_moment_problem(d, eff, coords, lo, hi);
  return mvn::rectangle_probability(problem, opts.tol, opts.seed ^ kMultiarmStream).value;
}

ComparatorResult comparator_multiarm(int arms, double alpha, double power_target,
                                     double theta_prime, double theta_zero, double sigma,
                                     const EvalOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (!(power_target > 0.0 && power_target < 1.0))
    throw InputError("power must lie in (0, 1)");
  if (!(theta_prime > theta_zero)) throw InputError("theta_prime must exceed theta_zero");
  const double crit = norm_quantile(1.0 - alpha);
  auto power_at = [&](int n) {
    return multiarm_power(arms, n, crit, theta_prime, theta_zero, sigma, opts);
  };
  constexpr int kCap = 1 << 24;
  int hi = 1;
  double p_hi = power_at(hi);
  while (p_hi < power_target) {
    if (hi >= kCap) throw CapacityError("multi-arm comparator needs more than 2^24 per arm");
    hi *= 2;
    p_hi = power_at(hi);
  }
  int lo = hi / 2;  // lo == 0 means n = 1 already suffices
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    double p = power_at(mid);
    if (p >= power_target) {
      hi = mid;
      p_hi = p;
    } else {
      lo = mid;
    }
  }
  ComparatorResult r;
  r.n = hi;
  r.max_n = static_cast<std::int64_t>(arms + 1) * hi;
  r.power = p_hi;
  r.critical_value = crit;
  return r;
}

ComparatorResult comparator_separate_trials(int arms, double alpha, double power_target,
                                            double theta_prime, double sigma) {
  if (arms < 1) throw InputError("arms must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (!(power_target > 0.0 && power_target < 1.0))
    throw InputError("power must lie in (0, 1)");
  if (!(theta_prime > 0.0)) throw InputError("theta_prime must be positive");
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  const double za = norm_quantile(1.0 - alpha);
  const double zb = norm_quantile(power_target);
  const double raw = 2.0 * sigma * sigma * (za + zb) * (za + zb) / (theta_prime * theta_prime);
  // Guard against 564.0000000001 style rounding noise.
  double n = std::ceil(raw - 1e-9);
  ComparatorResult r;
  r.n = static_cast<int>(n);
  r.max_n = 2LL * arms * r.n;
  r.power = norm_sf(za - theta_prime * std::sqrt(n) / (sigma * std::sqrt(2.0)));
  r.critical_value = za;
  return r;
}

OperatingCharacteristics full_report(const TrialDesign& design, const NormalEffectSpec& endpoint,
                                     const NamedEffects& named, const EvalOptions& opts) {
  design.validate();
  OperatingCharacteristics oc;
  oc.pwer = pwer(design, opts);
  oc.power_lfc = power_lfc(design, endpoint.theta_prime, endpoint.theta_zero, opts);
  oc.type_i_global_null = type_i_global_null(design, opts);
  oc.max_n = max_sample_size(design);
  for (const auto& [name, eff] : named) {
    auto probs = stop_probabilities(design, eff, opts);
    oc.stop_probs[name] = probs.by_stage;
    oc.ess[name] = ess_from_stop_probs(design, probs.by_stage);
  }
  return oc;
}

}  // namespace supdtl
