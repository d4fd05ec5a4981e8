#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "supdtl/mvn.hpp"

namespace oracle {

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(X > a, Y > b) for a standard bivariate normal with correlation r, by
/// adaptive Gauss-Kronrod over x with the conditional tail in closed form.
inline double bivariate_upper(double a, double b, double r) {
  const double s = std::sqrt(1.0 - r * r);
  auto f = [&](double x) { return phi(x) * Phi((r * x - b) / s); };
  const double hi = 40.0;
  const double lo = std::isinf(a) ? -40.0 : a;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
}

struct McEstimate {
  double p;
  double se;
};

/// Plain Monte Carlo for a rectangle probability, sampling through the
/// symmetric square root from an eigen-decomposition.
inline McEstimate plain_mc(const supdtl::mvn::OrthantProblem& p, std::int64_t samples,
                           std::uint64_t seed) {
  const auto m = static_cast<Eigen::Index>(p.dim());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.corr);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd A = eig.eigenvectors() * root.asDiagonal();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(m);
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
    Eigen::VectorXd x = A * z;
    bool in = true;
    for (Eigen::Index i = 0; i < m && in; ++i) {
      const double v = x(i) + p.mean[i];
      in = v > p.lower[i] && v <= p.upper[i];
    }
    hits += in;
  }
  const double est = static_cast<double>(hits) / static_cast<double>(samples);
  // Agresti-Coull standard error, which stays positive when hits is 0 or n.
  const double n_adj = static_cast<double>(samples) + 4.0;
  const double p_adj = (static_cast<double>(hits) + 2.0) / n_adj;
  return {est, std::sqrt(p_adj * (1.0 - p_adj) / n_adj)};
}

/// Random correlation matrix of the given rank from normalized Gaussian
/// factor loadings.
inline Eigen::MatrixXd random_correlation(int dim, int rank, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd F(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < rank; ++k) F(i, k) = normal(rng);
  Eigen::MatrixXd S = F * F.transpose();
  Eigen::VectorXd d = S.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd C = d.asDiagonal() * S * d.asDiagonal();
  C.diagonal().setOnes();
  return C;
}

}  // namespace oracle
