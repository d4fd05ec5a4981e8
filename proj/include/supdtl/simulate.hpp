#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "supdtl/covariance.hpp"
#include "supdtl/events.hpp"

namespace supdtl {

struct TrialOutcome {
  int stop_stage = 0;
  bool early_stop = false;
  /// Arms still recruiting at the stopping look with Z above the boundary.
  std::vector<int> rejected_arms;
  /// 0 when no arm is recommended.
  int recommended_arm = 0;
  DropOrder drop_order;
  std::int64_t total_patients = 0;
};

/// Builds Z_{k,j} from per-stage standard normal increments laid out as
/// increments[arm * stages + stage - 1], arm 0 being the control.
ZPath z_path_from_increments(const TrialDesign& design, const EffectConfig& effects,
                             const std::vector<double>& increments);

/// Runs the drop-the-loser rules on a realized path.
TrialOutcome resolve_trial(const TrialDesign& design, const ZPath& z);

template <class Rng>
ZPath simulate_z_path(const TrialDesign& design, const EffectConfig& effects, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> inc(static_cast<std::size_t>(design.arms + 1) * design.stages);
  for (double& e : inc) e = normal(rng);
  return z_path_from_increments(design, effects, inc);
}

template <class Rng>
TrialOutcome simulate_trial(const TrialDesign& design, const EffectConfig& effects, Rng& rng) {
  return resolve_trial(design, simulate_z_path(design, effects, rng));
}

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

struct SimulationResult {
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  int focal_arm = 1;
  /// power, type_i_error, pwer, ess, early_stop, stop_stage_<j>.
  std::map<std::string, Estimate> estimates;
  std::vector<std::int64_t> stop_histogram;
};

struct SimulationOptions {
  int focal_arm = 1;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Replicates are generated in fixed blocks, each with its own engine seeded
/// from (seed, block index), so results do not depend on the thread count.
SimulationResult estimate_characteristics(const TrialDesign& design, const EffectConfig& effects,
                                          std::int64_t replicates, std::uint64_t seed,
                                          const SimulationOptions& opts = {});

}  // namespace supdtl
