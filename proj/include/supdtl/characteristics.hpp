#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "supdtl/covariance.hpp"
#include "supdtl/endpoint.hpp"
#include "supdtl/events.hpp"

namespace supdtl {

struct EvalOptions {
  /// Absolute integration error allowed for each reported probability.
  double tol = 1e-5;
  std::uint64_t seed = 0x5eedULL;
};

double pwer(const TrialDesign& design, const EvalOptions& opts = {});

/// Probability that Z_{focal,j} exceeds u_j at some look, ignoring dropping
/// and stopping. Equals pwer() when the focal effect is zero.
double boundary_crossing_probability(const TrialDesign& design, const EffectConfig& effects,
                                     int focal, const EvalOptions& opts = {});

double power_lfc(const TrialDesign& design, double theta_prime, double theta_zero,
                 const EvalOptions& opts = {});

/// Probability that `focal` is recommended under arbitrary effects.
double recommend_probability(const TrialDesign& design, const EffectConfig& effects, int focal,
                             const EvalOptions& opts = {});

/// Probability that `focal` is declared superior when the trial ends.
double type_i_error(const TrialDesign& design, const EffectConfig& effects, int focal,
                    const EvalOptions& opts = {});

double type_i_global_null(const TrialDesign& design, const EvalOptions& opts = {});

StageProbabilities stop_probabilities(const TrialDesign& design, const EffectConfig& effects,
                                      const EvalOptions& opts = {});

/// Patients accrued when the trial stops at `stage`:
/// sum_{i<j} i n + (K - j + 2) j n.
std::int64_t patients_at_stop(const TrialDesign& design, int stage);

/// The same count written with cumulative per-stage sizes:
/// sum_{i<j} n_i + (K - j + 1) n_j + n_{0,j}.
std::int64_t patients_at_stop_cumulative(const TrialDesign& design, int stage);

/// sum_j n_j + n_{0,J}.
std::int64_t max_sample_size(const TrialDesign& design);

/// E(N | effects) weighting patients_at_stop by the stop probabilities.
double expected_sample_size(const TrialDesign& design, const EffectConfig& effects,
                            const EvalOptions& opts = {});
double ess_from_stop_probs(const TrialDesign& design, const std::vector<double>& stop_probs);
double ess_from_stop_probs_cumulative(const TrialDesign& design,
                                      const std::vector<double>& stop_probs);

struct ComparatorResult {
  int n = 0;        // per arm (multi-arm) or per group (separate trials)
  std::int64_t max_n = 0;
  double power = 0.0;
  double critical_value = 0.0;
};

/// Power of a single-look trial with `arms` arms plus control where the
/// focal arm must beat the critical value and every other arm.
double multiarm_power(int arms, int n, double critical_value, double theta_prime,
                      double theta_zero, double sigma, const EvalOptions& opts = {});

/// Smallest n per arm for which multiarm_power reaches power_target.
ComparatorResult comparator_multiarm(int arms, double alpha, double power_target,
                                     double theta_prime, double theta_zero, double sigma,
                                     const EvalOptions& opts = {});

/// K independent two-arm single-stage trials, each with its own control.
ComparatorResult comparator_separate_trials(int arms, double alpha, double power_target,
                                            double theta_prime, double sigma);

struct OperatingCharacteristics {
  double pwer = 0.0;
  double power_lfc = 0.0;
  double type_i_global_null = 0.0;
  std::map<std::string, double> ess;
  std::map<std::string, std::vector<double>> stop_probs;
  std::int64_t max_n = 0;
};

using NamedEffects = std::vector<std::pair<std::string, EffectConfig>>;

OperatingCharacteristics full_report(const TrialDesign& design, const NormalEffectSpec& endpoint,
                                     const NamedEffects& named, const EvalOptions& opts = {});

}  // namespace supdtl
