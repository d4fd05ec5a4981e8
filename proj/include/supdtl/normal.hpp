#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace supdtl {

namespace detail {
// Evaluate in double; the default promotes to long double and is ~3x slower.
inline constexpr boost::math::policies::policy<boost::math::policies::promote_double<false>>
    kDoublePolicy{};
}  // namespace detail

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard normal density.
inline double norm_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

// Standard normal CDF; accurate in both tails.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

// Upper tail P(Z > x).
inline double norm_sf(double x) { return norm_cdf(-x); }

// Inverse standard normal CDF. Returns -inf/+inf at 0/1.
inline double norm_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p, detail::kDoublePolicy);
}

// P(lo < Z <= hi) computed on whichever side of zero avoids cancellation.
inline double interval_prob(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo > 0.0) return norm_sf(lo) - norm_sf(hi);
  return norm_cdf(hi) - norm_cdf(lo);
}

// Mean of a standard normal truncated to (lo, hi].
inline double truncated_mean(double lo, double hi) {
  const double mass = interval_prob(lo, hi);
  if (mass <= 1e-300) {
    // Degenerate interval far in a tail: use the nearer endpoint.
    if (std::isinf(lo)) return hi;
    if (std::isinf(hi)) return lo;
    return 0.5 * (lo + hi);
  }
  return (norm_pdf(lo) - norm_pdf(hi)) / mass;
}

}  // namespace supdtl
