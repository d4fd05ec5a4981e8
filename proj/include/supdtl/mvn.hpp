#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace supdtl::mvn {

/// A multivariate normal rectangle probability P(lower <= X <= upper) with
/// X ~ N(mean, corr). Bounds may be infinite.
struct OrthantProblem {
  std::vector<double> mean;
  Eigen::MatrixXd corr;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return mean.size(); }
};

struct ProbabilityEstimate {
  double value = 0.0;
  /// Three standard errors of the randomized QMC estimate.
  double error_bound = 0.0;
  std::int64_t evaluations = 0;
  bool converged = true;
  /// Numerical rank of the correlation after pivoted factorization.
  int rank = 0;
};

struct IntegrationOptions {
  double target_abs_error = 1e-5;
  std::uint64_t seed = 0;
  /// Independent random shifts used for the error estimate.
  int randomizations = 12;
  /// Cap on integrand evaluations; exceeding it returns converged == false.
  std::int64_t max_evaluations = 200'000'000;
};

/// Largest dimension accepted by rectangle_probability.
inline constexpr std::size_t kMaxDimension = 16;

/// Throws InputError for dimension mismatches, non-unit diagonals, asymmetry
/// or empty intervals, and NotPositiveSemidefinite when an eigenvalue falls
/// below -1e-10 times the largest.
void validate(const OrthantProblem& problem);

/// Separation-of-variables (Genz) transform with pivoted, rank-revealing
/// Cholesky and a randomized Richtmyer lattice. Deterministic in
/// (problem, options). Singular correlations are supported: dependent rows
/// are folded into the interval of the last variable they load on.
ProbabilityEstimate rectangle_probability(const OrthantProblem& problem,
                                          const IntegrationOptions& options);

inline ProbabilityEstimate rectangle_probability(const OrthantProblem& problem,
                                                 double target_abs_error,
                                                 std::uint64_t seed) {
  IntegrationOptions opts;
  opts.target_abs_error = target_abs_error;
  opts.seed = seed;
  return rectangle_probability(problem, opts);
}

/// Rescales a covariance problem to unit diagonal. The probability is
/// unchanged.
OrthantProblem standardize(const std::vector<double>& mean, const Eigen::MatrixXd& cov,
                           const std::vector<double>& lower,
                           const std::vector<double>& upper);

}  // namespace supdtl::mvn
