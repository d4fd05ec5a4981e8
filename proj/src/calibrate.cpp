#include "supdtl/calibrate.hpp"

#include <cmath>
#include <map>
#include <string>

#include "supdtl/characteristics.hpp"
#include "supdtl/error.hpp"

namespace supdtl {

namespace {
constexpr int kMaxBisections = 200;
// Screening precision; a value is refined to the full budget only when the
// screen lands within kScreenMargin of a decision threshold.
constexpr double kScreenTol = 1e-4;
constexpr double kScreenMargin = 5.0 * kScreenTol;
}

void CalibrationConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("calibration.alpha", "must lie in (0, 1)");
  if (!(omega > 0.0 && omega < alpha))
    throw ValidationError("calibration.omega", "must lie in (0, alpha)");
  if (!(power_target > 0.0 && power_target < 1.0))
    throw ValidationError("calibration.power", "must lie in (0, 1)");
  if (!(c_lo > 0.0 && c_lo < c_hi && std::isfinite(c_hi)))
    throw ValidationError("calibration.c_lo", "need 0 < c_lo < c_hi < inf");
  if (max_n < 1) throw ValidationError("calibration.max_n", "must be at least 1");
}

std::vector<double> BoundaryShape::multipliers(int stages) const {
  if (stages < 1) throw InputError("stages must be positive");
  switch (kind) {
    case Kind::obrien_fleming:
      return obf_shape(stages, 1.0);
    case Kind::pocock:
      return std::vector<double>(stages, 1.0);
    case Kind::custom:
      break;
  }
  if (static_cast<int>(custom.size()) != stages)
    throw InputError("custom shape needs " + std::to_string(stages) + " multipliers");
  for (double m : custom)
    if (std::isnan(m) || !(m > 0.0)) throw InputError("shape multipliers must be positive");
  if (!std::isfinite(custom.back())) throw InputError("final shape multiplier must be finite");
  return custom;
}

std::vector<double> obf_shape(int stages, double c) {
  std::vector<double> u(stages);
  for (int j = 1; j <= stages; ++j) u[j - 1] = c * std::sqrt(static_cast<double>(stages) / j);
  return u;
}

BoundaryCalibration calibrate_scale(TrialDesign design, const BoundaryShape& shape,
                                    const CalibrationConfig& cfg) {
  cfg.validate();
  const auto mult = shape.multipliers(design.stages);
  design.alpha = cfg.alpha;
  EvalOptions opts{cfg.integration_tol(), cfg.seed};

  auto at = [&](double c) {
    TrialDesign d = design;
    d.boundaries.resize(mult.size());
    for (std::size_t j = 0; j < mult.size(); ++j) d.boundaries[j] = c * mult[j];
    return d;
  };
  auto in_window = [&](double p) { return p >= cfg.alpha - cfg.omega && p <= cfg.alpha; };
  const EvalOptions screen{kScreenTol, cfg.seed};
  auto pwer_at = [&](const TrialDesign& d) {
    const double rough = pwer(d, screen);
    if (rough > cfg.alpha + kScreenMargin || rough < cfg.alpha - cfg.omega - kScreenMargin)
      return rough;
    return pwer(d, opts);
  };

  BoundaryCalibration out;
  double lo = cfg.c_lo, hi = cfg.c_hi;
  TrialDesign d_lo = at(lo), d_hi = at(hi);
  double p_lo = pwer_at(d_lo), p_hi = pwer_at(d_hi);
  out.iterations = 2;
  if (in_window(p_lo)) return {d_lo, lo, p_lo, out.iterations};
  if (in_window(p_hi)) return {d_hi, hi, p_hi, out.iterations};
  if (p_lo < cfg.alpha || p_hi > cfg.alpha - cfg.omega)
    throw BracketError("scale bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "] does not straddle the target PWER");

  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    TrialDesign d = at(mid);
    const double p = pwer_at(d);
    ++out.iterations;
    if (in_window(p)) return {d, mid, p, out.iterations};
    if (p > cfg.alpha)
      lo = mid;
    else
      hi = mid;
  }
  throw Error("boundary calibration did not converge");
}

TrialDesign calibrate_boundaries(const TrialDesign& design, const BoundaryShape& shape,
                                 const CalibrationConfig& cfg) {
  return calibrate_scale(design, shape, cfg).design;
}

SampleSizeSearch search_sample_size(TrialDesign design, double theta_prime, double theta_zero,
                                    const CalibrationConfig& cfg) {
  cfg.validate();
  if (!(theta_prime > theta_zero)) throw InputError("theta_prime must exceed theta_zero");
  const EvalOptions opts{cfg.integration_tol(), cfg.seed};
  const EvalOptions screen{kScreenTol, cfg.seed};
  std::map<int, double> seen;
  std::map<int, double> precision;
  auto power_at = [&](int n) {
    auto it = seen.find(n);
    if (it != seen.end()) return it->second;
    TrialDesign d = design;
    d.n_per_stage = n;
    double p = power_lfc(d, theta_prime, theta_zero, screen);
    double tol = kScreenTol;
    if (std::abs(p - cfg.power_target) <= kScreenMargin) {
      p = power_lfc(d, theta_prime, theta_zero, opts);
      tol = opts.tol;
    }
    seen.emplace(n, p);
    precision.emplace(n, tol);
    return p;
  };

  int hi = 1;
  while (power_at(hi) < cfg.power_target) {
    if (hi >= cfg.max_n)
      throw CapacityError("power target not reached with n_per_stage <= " +
                          std::to_string(cfg.max_n));
    hi = std::min(hi * 2, cfg.max_n);
  }
  int lo = 0;
  for (const auto& [n, p] : seen)
    if (n < hi && p < cfg.power_target) lo = std::max(lo, n);
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    if (power_at(mid) >= cfg.power_target)
      hi = mid;
    else
      lo = mid;
  }

  // Power in n should be nondecreasing up to integration noise.
  double prev = -1.0, prev_tol = 0.0;
  for (const auto& [n, p] : seen) {
    if (p < prev - 2.0 * (prev_tol + precision.at(n)))
      throw Error("power is not monotone in n near n_per_stage = " + std::to_string(n));
    if (p > prev) {
      prev = p;
      prev_tol = precision.at(n);
    }
  }

  design.n_per_stage = hi;
  const double final_power = precision.at(hi) == opts.tol
                                 ? seen.at(hi)
                                 : power_lfc(design, theta_prime, theta_zero, opts);
  return {design, final_power, static_cast<int>(seen.size())};
}

TrialDesign find_sample_size(const TrialDesign& design, double theta_prime, double theta_zero,
                             const CalibrationConfig& cfg) {
  return search_sample_size(design, theta_prime, theta_zero, cfg).design;
}

}  // namespace supdtl
