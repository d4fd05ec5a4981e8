#pragma once

#include <vector>

#include "supdtl/mvn.hpp"

namespace supdtl {

/// Equal-allocation drop-the-loser design. Arms are numbered 1..arms; the
/// shared control is arm 0 and never appears in a StatCoord. Stage j has
/// accrued j * n_per_stage patients on every arm still recruiting.
struct TrialDesign {
  int arms = 3;
  int stages = 3;
  int n_per_stage = 1;
  /// Upper boundaries u_1..u_J; +inf disables stopping at that look.
  std::vector<double> boundaries;
  double alpha = 0.025;
  /// Outcome-scale standard deviation (not the variance).
  double sigma = 1.0;

  /// Throws InputError if any field invariant is violated.
  void validate() const;
};

struct EffectConfig {
  std::vector<double> deltas;
};

enum class CoordKind { single, difference };

/// Z_{a,j} (single) or Z_{a,j} - Z_{b,j} (difference).
struct StatCoord {
  CoordKind kind = CoordKind::single;
  int arm_a = 1;
  int arm_b = 0;
  int stage = 1;

  static StatCoord single(int arm, int stage) { return {CoordKind::single, arm, 0, stage}; }
  static StatCoord difference(int arm_a, int arm_b, int stage) {
    return {CoordKind::difference, arm_a, arm_b, stage};
  }

  friend bool operator==(const StatCoord&, const StatCoord&) = default;
};

void validate_coord(const TrialDesign& design, const StatCoord& c);

// Correlations between standardized statistics. All three depend on the
// stages only through sqrt(min(j, j') / max(j, j')).
double cov_z(const TrialDesign& design, const StatCoord& a, const StatCoord& b);
double cov_z_diff(const TrialDesign& design, const StatCoord& a, const StatCoord& b);
double cov_diff_diff(const TrialDesign& design, const StatCoord& a, const StatCoord& b);

/// Dispatches to the appropriate covariance for any pair of coordinates.
double correlation(const TrialDesign& design, const StatCoord& a, const StatCoord& b);

/// Mean of a coordinate: effect * sqrt(j n) / (sigma sqrt 2).
double mean_of(const TrialDesign& design, const EffectConfig& effects, const StatCoord& c);

/// Assembles the rectangle problem for a list of coordinates and bounds.
mvn::OrthantProblem build_moment_problem(const TrialDesign& design, const EffectConfig& effects,
                                         const std::vector<StatCoord>& coords,
                                         const std::vector<double>& lowers,
                                         const std::vector<double>& uppers);

}  // namespace supdtl
