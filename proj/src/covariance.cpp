#include "supdtl/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "supdtl/error.hpp"

namespace supdtl {
namespace {

double stage_ratio(const StatCoord& a, const StatCoord& b) {
  const double lo = std::min(a.stage, b.stage);
  const double hi = std::max(a.stage, b.stage);
  return std::sqrt(lo / hi);
}

}  // namespace

void TrialDesign::validate() const {
  if (arms < 2) throw InputError("design: at least two active arms are required");
  if (stages != arms) throw InputError("design: the number of stages must equal the number of arms");
  if (n_per_stage < 1) throw InputError("design: n_per_stage must be at least 1");
  if (boundaries.size() != static_cast<std::size_t>(stages)) {
    throw InputError("design: expected " + std::to_string(stages) + " boundaries");
  }
  for (double u : boundaries) {
    if (std::isnan(u) || u == -std::numeric_limits<double>::infinity()) {
      throw InputError("design: boundaries must be real or +inf");
    }
  }
  if (!std::isfinite(boundaries.back())) {
    throw InputError("design: the final-stage boundary must be finite");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("design: alpha must lie in (0, 1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("design: sigma must be positive");
}

void validate_coord(const TrialDesign& design, const StatCoord& c) {
  const auto arm_ok = [&](int k) { return k >= 1 && k <= design.arms; };
  if (!arm_ok(c.arm_a) || c.stage < 1 || c.stage > design.stages) {
    throw InputError("coordinate out of range");
  }
  if (c.kind == CoordKind::difference && (!arm_ok(c.arm_b) || c.arm_a == c.arm_b)) {
    throw InputError("difference coordinate needs two distinct arms");
  }
}

double cov_z(const TrialDesign& design, const StatCoord& a, const StatCoord& b) {
  validate_coord(design, a);
  validate_coord(design, b);
  const double r = stage_ratio(a, b);
  return a.arm_a == b.arm_a ? r : 0.5 * r;
}

double cov_z_diff(const TrialDesign& design, const StatCoord& a, const StatCoord& b) {
  validate_coord(design, a);
  validate_coord(design, b);
  const double r = stage_ratio(a, b);
  if (a.arm_a == b.arm_a) return 0.5 * r;
  if (a.arm_a == b.arm_b) return -0.5 * r;
  return 0.0;
}

double cov_diff_diff(const TrialDesign& design, const StatCoord& a, const StatCoord& b) {
  validate_coord(design, a);
  validate_coord(design, b);
  const double r = stage_ratio(a, b);
  const bool first_same = a.arm_a == b.arm_a;
  const bool second_same = a.arm_b == b.arm_b;
  const bool swapped_first = a.arm_a == b.arm_b;
  const bool swapped_second = a.arm_b == b.arm_a;
  if (first_same && second_same) return r;
  if (swapped_first && swapped_second) return -r;
  if (first_same || second_same) return 0.5 * r;
  if (swapped_first || swapped_second) return -0.5 * r;
  return 0.0;
}

double correlation(const TrialDesign& design, const StatCoord& a, const StatCoord& b) {
  if (a.kind == CoordKind::single && b.kind == CoordKind::single) return cov_z(design, a, b);
  if (a.kind == CoordKind::single) return cov_z_diff(design, a, b);
  if (b.kind == CoordKind::single) return cov_z_diff(design, b, a);
  return cov_diff_diff(design, a, b);
}

double mean_of(const TrialDesign& design, const EffectConfig& effects, const StatCoord& c) {
  validate_coord(design, c);
  if (effects.deltas.size() != static_cast<std::size_t>(design.arms)) {
    throw InputError("effects: expected one delta per arm");
  }
  double effect = effects.deltas[c.arm_a - 1];
  if (c.kind == CoordKind::difference) effect -= effects.deltas[c.arm_b - 1];
  const double info = static_cast<double>(c.stage) * design.n_per_stage;
  return effect * std::sqrt(info) / (design.sigma * std::sqrt(2.0));
}

mvn::OrthantProblem build_moment_problem(const TrialDesign& design, const EffectConfig& effects,
                                         const std::vector<StatCoord>& coords,
                                         const std::vector<double>& lowers,
                                         const std::vector<double>& uppers) {
  if (coords.empty()) throw InputError("build_moment_problem: no coordinates");
  if (lowers.size() != coords.size() || uppers.size() != coords.size()) {
    throw InputError("build_moment_problem: bounds and coordinates differ in length");
  }
  const auto m = static_cast<Eigen::Index>(coords.size());
  mvn::OrthantProblem p;
  p.corr.resize(m, m);
  p.lower = lowers;
  p.upper = uppers;
  for (Eigen::Index i = 0; i < m; ++i) {
    p.mean.push_back(mean_of(design, effects, coords[i]));
    p.corr(i, i) = 1.0;
    for (Eigen::Index k = 0; k < i; ++k) {
      const double r = correlation(design, coords[i], coords[k]);
      p.corr(i, k) = r;
      p.corr(k, i) = r;
    }
  }
  return p;
}

}  // namespace supdtl
