#pragma once

#include <cstdint>
#include <vector>

#include "supdtl/covariance.hpp"
#include "supdtl/mvn.hpp"

namespace supdtl {

/// Arms dropped at stages 1, 2, ... in order.
using DropOrder = std::vector<int>;

/// lower < coord <= upper.
struct Bound {
  StatCoord coord;
  double lower;
  double upper;
};

/// One disjoint rectangle of an event, standing in for `weight` drop orders
/// that are exchangeable under the effect configuration.
struct EventTerm {
  int weight = 1;
  DropOrder order;
  std::vector<Bound> bounds;
  mvn::OrthantProblem problem;
};

struct EventProblemSet {
  int stage = 1;
  std::vector<EventTerm> terms;
};

struct EnumerationOptions {
  int max_arms = 8;
  /// Merge drop orders related by a relabeling of arms with identical effects.
  bool collapse_symmetric = true;
};

/// Z_{1,1..J} below u_1..u_J; PWER is one minus its probability. Coordinates
/// with infinite boundaries are omitted.
mvn::OrthantProblem pwer_problem(const TrialDesign& design);

/// Trial stops at stage j with `focal` among the survivors and largest (or
/// the last arm standing at J) above the boundary. Summed over stages this
/// is the probability that `focal` is recommended.
std::vector<EventProblemSet> recommend_problems(const TrialDesign& design,
                                                const EffectConfig& effects, int focal,
                                                const EnumerationOptions& opts = {});

/// Recommendation of arm 1 under the least favourable configuration
/// (theta_prime on arm 1, theta_zero elsewhere).
std::vector<EventProblemSet> power_lfc_problems(const TrialDesign& design, double theta_prime,
                                                double theta_zero,
                                                const EnumerationOptions& opts = {});

/// Trial stops at stage j, over every drop order of all arms. Partitions the
/// sample space.
std::vector<EventProblemSet> stop_stage_problems(const TrialDesign& design,
                                                 const EffectConfig& effects,
                                                 const EnumerationOptions& opts = {});

/// Trial stops at stage j with `focal` still recruiting at that look
/// (surviving, or dropped at that very look) and Z_{focal,j} > u_j.
std::vector<EventProblemSet> rejection_problems(const TrialDesign& design,
                                                const EffectConfig& effects, int focal,
                                                const EnumerationOptions& opts = {});

/// rejection_problems for arm 1 with every effect zero.
std::vector<EventProblemSet> global_null_typeI_problems(const TrialDesign& design,
                                                        const EnumerationOptions& opts = {});

/// Z values indexed [arm - 1][stage - 1].
using ZPath = std::vector<std::vector<double>>;

double coord_value(const StatCoord& c, const ZPath& z);

/// Whether a realized path lies in the term's rectangle.
bool term_contains(const EventTerm& term, const ZPath& z);

struct StageProbabilities {
  std::vector<double> by_stage;
  double total = 0.0;
  /// Combined three-sigma integration error of `total`.
  double error_bound = 0.0;
  bool converged = true;
};

/// Integrates every term, splitting `target_abs_error` across terms so the
/// combined error of the total stays within it. Summation follows enumeration
/// order, so the result is deterministic in (sets, target, seed).
StageProbabilities integrate_sets(const std::vector<EventProblemSet>& sets,
                                  double target_abs_error, std::uint64_t seed);

}  // namespace supdtl
