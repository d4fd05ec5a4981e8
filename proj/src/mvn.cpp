#include "supdtl/mvn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "supdtl/error.hpp"
#include "supdtl/normal.hpp"

namespace supdtl::mvn {
namespace {

// Residual variance below which a pivot is treated as linearly dependent.
constexpr double kPivotTol = 1e-10;
// Loadings smaller than this are treated as structural zeros.
constexpr double kLoadTol = 1e-9;

constexpr std::array<double, kMaxDimension> kPrimes = {
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// One linear constraint lower <= sum_k coef[k] * y_k <= upper whose last
// nonzero loading sits on the owning column.
struct Constraint {
  std::vector<double> coef;
  double lower;
  double upper;
};

struct Factor {
  // columns[c] holds the pivot row for variable c followed by any dependent
  // rows folded onto it.
  std::vector<std::vector<Constraint>> columns;
  bool infeasible = false;
};

Factor factorize(const Eigen::MatrixXd& corr, std::vector<double> lo, std::vector<double> hi) {
  const int m = static_cast<int>(lo.size());
  Eigen::MatrixXd c = corr;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(m);

  int rank = 0;
  for (int i = 0; i < m; ++i) {
    // Genz ordering: next pivot is the row with the smallest conditional
    // interval mass given the expected values of earlier variables.
    int best = -1;
    double best_mass = kInf;
    for (int r = i; r < m; ++r) {
      const double resid = c(r, r) - L.row(r).head(i).squaredNorm();
      if (resid <= kPivotTol) continue;
      const double s = L.row(r).head(i).dot(expect.head(i));
      const double sd = std::sqrt(resid);
      const double mass = interval_prob((lo[r] - s) / sd, (hi[r] - s) / sd);
      if (mass < best_mass) {
        best_mass = mass;
        best = r;
      }
    }
    if (best < 0) break;

    if (best != i) {
      c.row(i).swap(c.row(best));
      c.col(i).swap(c.col(best));
      L.row(i).swap(L.row(best));
      std::swap(lo[i], lo[best]);
      std::swap(hi[i], hi[best]);
    }
    const double diag = std::sqrt(c(i, i) - L.row(i).head(i).squaredNorm());
    L(i, i) = diag;
    for (int r = i + 1; r < m; ++r) {
      L(r, i) = (c(r, i) - L.row(r).head(i).dot(L.row(i).head(i))) / diag;
    }
    const double s = L.row(i).head(i).dot(expect.head(i));
    expect(i) = truncated_mean((lo[i] - s) / diag, (hi[i] - s) / diag);
    rank = i + 1;
  }

  Factor f;
  f.columns.resize(rank);
  for (int i = 0; i < rank; ++i) {
    std::vector<double> coef(i + 1);
    for (int k = 0; k <= i; ++k) coef[k] = L(i, k);
    f.columns[i].push_back({std::move(coef), lo[i], hi[i]});
  }
  for (int r = rank; r < m; ++r) {
    int last = -1;
    for (int k = rank - 1; k >= 0; --k) {
      if (std::abs(L(r, k)) > kLoadTol) {
        last = k;
        break;
      }
    }
    if (last < 0) {
      // Degenerate coordinate identically equal to its mean.
      if (!(lo[r] <= 0.0 && 0.0 <= hi[r])) f.infeasible = true;
      continue;
    }
    std::vector<double> coef(last + 1);
    for (int k = 0; k <= last; ++k) coef[k] = L(r, k);
    f.columns[last].push_back({std::move(coef), lo[r], hi[r]});
  }
  return f;
}

// Draws the next variable by inverse CDF inside (lo, hi], working in the
// upper tail when the whole interval is positive.
double draw(double lo, double mass, double w) {
  constexpr double kTiny = 1e-300;
  constexpr double kTop = 1.0 - 0x1p-53;
  if (lo > 0.0) {
    const double q = std::clamp(norm_sf(lo) - w * mass, kTiny, kTop);
    return -norm_quantile(q);
  }
  const double p = std::clamp(norm_cdf(lo) + w * mass, kTiny, kTop);
  return norm_quantile(p);
}

// Product of conditional interval masses along one path through the
// sequential conditioning. `w` supplies rank - 1 uniforms.
double integrand(const Factor& f, const double* w, double* y) {
  double prod = 1.0;
  const std::size_t rank = f.columns.size();
  for (std::size_t c = 0; c < rank; ++c) {
    double lo = -kInf;
    double hi = kInf;
    for (const Constraint& row : f.columns[c]) {
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += row.coef[k] * y[k];
      const double p = row.coef[c];
      double l = (row.lower - s) / p;
      double h = (row.upper - s) / p;
      if (p < 0.0) std::swap(l, h);
      lo = std::max(lo, l);
      hi = std::min(hi, h);
    }
    const double mass = interval_prob(lo, hi);
    if (mass <= 0.0) return 0.0;
    prod *= mass;
    if (c + 1 < rank) y[c] = draw(lo, mass, w[c]);
  }
  return prod;
}

OrthantProblem drop_unconstrained(const OrthantProblem& p) {
  std::vector<int> keep;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    if (!(std::isinf(p.lower[i]) && p.lower[i] < 0 && std::isinf(p.upper[i]) && p.upper[i] > 0)) {
      keep.push_back(static_cast<int>(i));
    }
  }
  OrthantProblem out;
  const auto k = static_cast<Eigen::Index>(keep.size());
  out.corr.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.mean.push_back(p.mean[keep[i]]);
    out.lower.push_back(p.lower[keep[i]]);
    out.upper.push_back(p.upper[keep[i]]);
    for (Eigen::Index j = 0; j < k; ++j) out.corr(i, j) = p.corr(keep[i], keep[j]);
  }
  return out;
}

}  // namespace

void validate(const OrthantProblem& problem) {
  const std::size_t m = problem.dim();
  if (problem.lower.size() != m || problem.upper.size() != m ||
      static_cast<std::size_t>(problem.corr.rows()) != m ||
      static_cast<std::size_t>(problem.corr.cols()) != m) {
    throw InputError("orthant problem: dimensions of mean, corr, lower and upper disagree");
  }
  if (m > kMaxDimension) {
    throw CapacityError("orthant problem: dimension " + std::to_string(m) +
                        " exceeds the supported maximum of " +
                        std::to_string(kMaxDimension));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(problem.mean[i])) throw InputError("orthant problem: non-finite mean");
    if (std::isnan(problem.lower[i]) || std::isnan(problem.upper[i]) ||
        !(problem.lower[i] < problem.upper[i])) {
      throw InputError("orthant problem: empty interval at coordinate " + std::to_string(i));
    }
    if (std::abs(problem.corr(i, i) - 1.0) > 1e-12) {
      throw InputError("orthant problem: correlation diagonal is not 1 at " + std::to_string(i));
    }
    for (std::size_t j = 0; j < i; ++j) {
      const double a = problem.corr(i, j);
      if (!std::isfinite(a) || std::abs(a - problem.corr(j, i)) > 1e-12 || std::abs(a) > 1.0 + 1e-12) {
        throw InputError("orthant problem: correlation is not a symmetric matrix with entries in [-1, 1]");
      }
    }
  }
  if (m == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(problem.corr, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = eig.eigenvalues().minCoeff();
  if (bottom < -1e-10 * top) {
    throw NotPositiveSemidefinite("orthant problem: correlation has eigenvalue " +
                                  std::to_string(bottom));
  }
}

ProbabilityEstimate rectangle_probability(const OrthantProblem& problem,
                                          const IntegrationOptions& options) {
  if (!(options.target_abs_error > 0.0)) {
    throw InputError("rectangle_probability: target_abs_error must be positive");
  }
  if (options.randomizations < 2) {
    throw InputError("rectangle_probability: at least two randomizations are required");
  }
  validate(problem);

  const OrthantProblem reduced = drop_unconstrained(problem);
  ProbabilityEstimate out;
  if (reduced.dim() == 0) {
    out.value = 1.0;
    return out;
  }

  std::vector<double> lo(reduced.dim()), hi(reduced.dim());
  for (std::size_t i = 0; i < reduced.dim(); ++i) {
    lo[i] = reduced.lower[i] - reduced.mean[i];
    hi[i] = reduced.upper[i] - reduced.mean[i];
  }
  const Factor f = factorize(reduced.corr, lo, hi);
  out.rank = static_cast<int>(f.columns.size());
  if (f.infeasible) return out;

  const std::size_t dims = f.columns.size() - 1;
  std::vector<double> w(std::max<std::size_t>(dims, 1));
  std::vector<double> y(f.columns.size());
  if (dims == 0) {
    out.value = integrand(f, w.data(), y.data());
    out.evaluations = 1;
    return out;
  }

  std::array<double, kMaxDimension> alpha{};
  for (std::size_t k = 0; k < dims; ++k) {
    const double r = std::sqrt(kPrimes[k]);
    alpha[k] = r - std::floor(r);
  }

  // One fixed shift per randomization; the lattice is extended in place so
  // every round reuses the points already summed.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int shifts = options.randomizations;
  std::vector<std::vector<double>> shift(shifts, std::vector<double>(dims));
  for (auto& s : shift)
    for (auto& v : s) v = unif(rng);
  std::vector<double> acc(shifts, 0.0);
  std::vector<double> xw(dims), xa(dims);

  double estimate = 0.0;
  double variance = 0.0;
  std::int64_t done = 0;
  std::int64_t points = 256;
  for (;;) {
    for (int q = 0; q < shifts; ++q) {
      double a = 0.0;
      for (std::int64_t i = done + 1; i <= points; ++i) {
        for (std::size_t k = 0; k < dims; ++k) {
          double x = static_cast<double>(i) * alpha[k] + shift[q][k];
          x -= std::floor(x);
          // Baker's (tent) periodization plus an antithetic partner.
          xw[k] = std::abs(2.0 * x - 1.0);
          xa[k] = 1.0 - xw[k];
        }
        a += 0.5 * (integrand(f, xw.data(), y.data()) + integrand(f, xa.data(), y.data()));
      }
      acc[q] += a;
    }
    out.evaluations += 2 * (points - done) * shifts;
    done = points;

    double sum = 0.0, sumsq = 0.0;
    for (double a : acc) {
      const double est = a / static_cast<double>(points);
      sum += est;
      sumsq += est * est;
    }
    estimate = sum / shifts;
    variance = std::max(0.0, (sumsq - shifts * estimate * estimate) / (shifts - 1)) / shifts;

    if (3.0 * std::sqrt(variance) <= options.target_abs_error) {
      out.converged = true;
      break;
    }
    if (out.evaluations + 2 * points * shifts > options.max_evaluations) {
      out.converged = false;
      break;
    }
    points *= 2;
  }

  out.value = std::clamp(estimate, 0.0, 1.0);
  out.error_bound = std::min({3.0 * std::sqrt(variance), out.value, 1.0 - out.value});
  out.error_bound = std::max(out.error_bound, 0.0);
  return out;
}

OrthantProblem standardize(const std::vector<double>& mean, const Eigen::MatrixXd& cov,
                           const std::vector<double>& lower,
                           const std::vector<double>& upper) {
  const std::size_t m = mean.size();
  if (lower.size() != m || upper.size() != m || static_cast<std::size_t>(cov.rows()) != m ||
      static_cast<std::size_t>(cov.cols()) != m) {
    throw InputError("standardize: dimensions of mean, cov, lower and upper disagree");
  }
  std::vector<double> sd(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(cov(i, i) > 0.0)) {
      throw InputError("standardize: covariance diagonal must be strictly positive");
    }
    sd[i] = std::sqrt(cov(i, i));
  }
  OrthantProblem p;
  p.corr.resize(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    p.mean.push_back(mean[i] / sd[i]);
    p.lower.push_back(lower[i] / sd[i]);
    p.upper.push_back(upper[i] / sd[i]);
    for (std::size_t j = 0; j < m; ++j) {
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-12 * std::max(1.0, std::abs(cov(i, j)))) {
        throw InputError("standardize: covariance is not symmetric");
      }
      p.corr(i, j) = i == j ? 1.0 : cov(i, j) / (sd[i] * sd[j]);
    }
  }
  return p;
}

}  // namespace supdtl::mvn
