#pragma once

#include <cstdint>
#include <vector>

#include "supdtl/covariance.hpp"

namespace supdtl {

struct CalibrationConfig {
  double alpha = 0.025;
  /// Accepted PWER window is [alpha - omega, alpha].
  double omega = 1e-5;
  double power_target = 0.9;
  double c_lo = 0.5;
  double c_hi = 10.0;
  int max_n = 100000;
  std::uint64_t seed = 0x5eedULL;

  void validate() const;
  /// Integration error used while calibrating.
  double integration_tol() const { return omega / 10.0; }
};

struct BoundaryShape {
  enum class Kind { obrien_fleming, pocock, custom };
  Kind kind = Kind::obrien_fleming;
  /// Custom multipliers, one per stage; +inf disables that look.
  std::vector<double> custom;

  static BoundaryShape obrien_fleming() { return {Kind::obrien_fleming, {}}; }
  static BoundaryShape pocock() { return {Kind::pocock, {}}; }
  static BoundaryShape from_multipliers(std::vector<double> m) {
    return {Kind::custom, std::move(m)};
  }

  /// Boundary u_j = scale * multipliers()[j - 1].
  std::vector<double> multipliers(int stages) const;
};

/// c * sqrt(J / j) for j = 1..J.
std::vector<double> obf_shape(int stages, double c);

struct BoundaryCalibration {
  TrialDesign design;
  double scale = 0.0;
  double pwer = 0.0;
  int iterations = 0;
};

/// Bisection on the scale until PWER lies in [alpha - omega, alpha]. Throws
/// BracketError if [c_lo, c_hi] does not straddle that window.
BoundaryCalibration calibrate_scale(TrialDesign design, const BoundaryShape& shape,
                                    const CalibrationConfig& cfg);

TrialDesign calibrate_boundaries(const TrialDesign& design, const BoundaryShape& shape,
                                 const CalibrationConfig& cfg);

struct SampleSizeSearch {
  TrialDesign design;
  double power = 0.0;
  int evaluations = 0;
};

/// Smallest n_per_stage reaching power_target under the least favourable
/// configuration. Doubling then binary search; throws CapacityError beyond
/// cfg.max_n.
SampleSizeSearch search_sample_size(TrialDesign design, double theta_prime, double theta_zero,
                                    const CalibrationConfig& cfg);

TrialDesign find_sample_size(const TrialDesign& design, double theta_prime, double theta_zero,
                             const CalibrationConfig& cfg);

}  // namespace supdtl
