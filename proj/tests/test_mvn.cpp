#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "supdtl/error.hpp"
#include "supdtl/mvn.hpp"
#include "supdtl/normal.hpp"

using supdtl::kInf;
using supdtl::mvn::OrthantProblem;
using supdtl::mvn::rectangle_probability;

namespace {

OrthantProblem two_dim(double r, double a, double b) {
  OrthantProblem p;
  p.mean = {0.0, 0.0};
  p.corr = Eigen::MatrixXd{{1.0, r}, {r, 1.0}};
  p.lower = {a, b};
  p.upper = {kInf, kInf};
  return p;
}

}  // namespace

TEST_SUITE("mvn") {
  TEST_CASE("positive orthant with correlation one half is one third") {
    auto est = rectangle_probability(two_dim(0.5, 0.0, 0.0), 1e-7, 1);
    CHECK(std::abs(est.value - 1.0 / 3.0) <= 1e-7);
    CHECK(std::abs(oracle::bivariate_upper(0.0, 0.0, 0.5) - 1.0 / 3.0) < 1e-12);
  }

  TEST_CASE("bivariate problems match quadrature") {
    for (double r : {-0.9, -0.3, 0.2, 0.7, 0.95}) {
      for (double a : {-1.0, 0.3, 2.0}) {
        const double b = 0.5 - a / 2;
        auto est = rectangle_probability(two_dim(r, a, b), 1e-7, 3);
        CAPTURE(r);
        CAPTURE(a);
        CHECK(std::abs(est.value - oracle::bivariate_upper(a, b, r)) <= 2e-7);
      }
    }
  }

  TEST_CASE("independent coordinates factor into univariate masses") {
    OrthantProblem p;
    p.mean = {0.2, -0.4, 1.0};
    p.corr = Eigen::MatrixXd::Identity(3, 3);
    p.lower = {-1.0, 0.0, -kInf};
    p.upper = {1.5, kInf, 0.3};
    double expect = 1.0;
    for (int i = 0; i < 3; ++i)
      expect *= oracle::Phi(p.upper[i] - p.mean[i]) - oracle::Phi(p.lower[i] - p.mean[i]);
    auto est = rectangle_probability(p, 1e-8, 5);
    CHECK(std::abs(est.value - expect) < 1e-8);
  }

  TEST_CASE("identical coordinates collapse to the tighter bound") {
    OrthantProblem p;
    p.mean = {0.0, 0.0};
    p.corr = Eigen::MatrixXd::Ones(2, 2);
    p.lower = {-kInf, -kInf};
    p.upper = {1.0, 0.0};
    auto est = rectangle_probability(p, 1e-6, 1);
    CHECK(est.rank == 1);
    CHECK(std::abs(est.value - 0.5) < 1e-12);
  }

  TEST_CASE("singular problem agrees with the reduced problem") {
    // X3 = (X1 + X2) / sqrt(2 + 2 r) adds one constraint but no dimension.
    const double r = 0.3;
    const double c = 1.0 / std::sqrt(2.0 + 2.0 * r);
    const double rho = (1.0 + r) * c;
    OrthantProblem p;
    p.mean = {0.0, 0.0, 0.0};
    p.corr = Eigen::MatrixXd{{1.0, r, rho}, {r, 1.0, rho}, {rho, rho, 1.0}};
    p.lower = {-kInf, -kInf, -kInf};
    p.upper = {0.5, 0.5, 0.2};
    auto est = rectangle_probability(p, 1e-6, 2);
    CHECK(est.rank == 2);
    auto mc = oracle::plain_mc(p, 2'000'000, 11);
    CHECK(std::abs(est.value - mc.p) <= 4.0 * std::hypot(mc.se, est.error_bound / 3.0));
  }

  TEST_CASE("free coordinates are ignored") {
    auto base = two_dim(0.4, 0.1, -0.2);
    OrthantProblem p = base;
    p.mean.push_back(3.0);
    p.lower.push_back(-kInf);
    p.upper.push_back(kInf);
    p.corr = Eigen::MatrixXd{{1.0, 0.4, 0.2}, {0.4, 1.0, 0.1}, {0.2, 0.1, 1.0}};
    auto a = rectangle_probability(base, 1e-7, 4);
    auto b = rectangle_probability(p, 1e-7, 4);
    CHECK(std::abs(a.value - b.value) < 1e-12);
  }

  TEST_CASE("deterministic for a fixed seed") {
    std::mt19937_64 rng(99);
    OrthantProblem p;
    p.corr = oracle::random_correlation(5, 5, rng);
    p.mean.assign(5, 0.1);
    p.lower.assign(5, -0.5);
    p.upper.assign(5, kInf);
    auto a = rectangle_probability(p, 1e-5, 42);
    auto b = rectangle_probability(p, 1e-5, 42);
    CHECK(a.value == b.value);
    CHECK(a.error_bound == b.error_bound);
    CHECK(a.evaluations == b.evaluations);
  }

  TEST_CASE("reported error meets the target") {
    std::mt19937_64 rng(5);
    OrthantProblem p;
    p.corr = oracle::random_correlation(6, 6, rng);
    p.mean.assign(6, 0.0);
    p.lower.assign(6, 0.0);
    p.upper.assign(6, kInf);
    auto est = rectangle_probability(p, 1e-5, 1);
    CHECK(est.converged);
    CHECK(est.error_bound <= 1e-5);
  }

  TEST_CASE("evaluation cap is reported as non-convergence") {
    std::mt19937_64 rng(8);
    supdtl::mvn::IntegrationOptions opts;
    opts.target_abs_error = 1e-12;
    opts.max_evaluations = 100'000;
    OrthantProblem p;
    p.corr = oracle::random_correlation(6, 6, rng);
    p.mean.assign(6, 0.0);
    p.lower.assign(6, 0.0);
    p.upper.assign(6, kInf);
    auto est = rectangle_probability(p, opts);
    CHECK_FALSE(est.converged);
    CHECK(est.evaluations <= opts.max_evaluations);
  }

  TEST_CASE("input validation") {
    auto p = two_dim(0.5, 0.0, 0.0);
    SUBCASE("empty interval") {
      p.lower[0] = 1.0;
      p.upper[0] = 1.0;
      CHECK_THROWS_AS(rectangle_probability(p, 1e-5, 0), supdtl::InputError);
    }
    SUBCASE("not unit diagonal") {
      p.corr(0, 0) = 2.0;
      CHECK_THROWS_AS(rectangle_probability(p, 1e-5, 0), supdtl::InputError);
    }
    SUBCASE("asymmetric") {
      p.corr(0, 1) = 0.4;
      CHECK_THROWS_AS(rectangle_probability(p, 1e-5, 0), supdtl::InputError);
    }
    SUBCASE("indefinite") {
      OrthantProblem q;
      q.mean.assign(3, 0.0);
      q.lower.assign(3, 0.0);
      q.upper.assign(3, kInf);
      q.corr = Eigen::MatrixXd{{1.0, 0.9, -0.9}, {0.9, 1.0, 0.9}, {-0.9, 0.9, 1.0}};
      CHECK_THROWS_AS(rectangle_probability(q, 1e-5, 0), supdtl::NotPositiveSemidefinite);
    }
    SUBCASE("too many dimensions") {
      OrthantProblem q;
      const int m = static_cast<int>(supdtl::mvn::kMaxDimension) + 1;
      q.mean.assign(m, 0.0);
      q.lower.assign(m, 0.0);
      q.upper.assign(m, kInf);
      q.corr = Eigen::MatrixXd::Identity(m, m);
      CHECK_THROWS_AS(rectangle_probability(q, 1e-5, 0), supdtl::CapacityError);
    }
    SUBCASE("dimension mismatch") {
      p.mean.push_back(0.0);
      CHECK_THROWS_AS(rectangle_probability(p, 1e-5, 0), supdtl::InputError);
    }
  }

  TEST_CASE("standardize rescales a covariance") {
    Eigen::MatrixXd cov{{4.0, 1.0}, {1.0, 9.0}};
    auto p = supdtl::mvn::standardize({2.0, 3.0}, cov, {0.0, -kInf}, {kInf, 6.0});
    CHECK(p.corr(0, 1) == doctest::Approx(1.0 / 6.0));
    CHECK(p.mean[0] == doctest::Approx(1.0));
    CHECK(p.upper[1] == doctest::Approx(2.0));
    CHECK(p.lower[0] == 0.0);
  }

  TEST_CASE("agrees with plain Monte Carlo on random problems") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 12; ++t) {
      const int dim = 2 + t % 6;
      OrthantProblem p;
      p.corr = oracle::random_correlation(dim, dim, rng);
      for (int i = 0; i < dim; ++i) {
        p.mean.push_back(0.5 * u(rng));
        p.lower.push_back(u(rng) - 0.8);
        p.upper.push_back(u(rng) > 0 ? kInf : p.lower.back() + 2.0);
      }
      auto est = rectangle_probability(p, 1e-5, t);
      auto mc = oracle::plain_mc(p, 200'000, 1000 + t);
      CAPTURE(t);
      CHECK(std::abs(est.value - mc.p) <= 4.0 * std::hypot(mc.se, est.error_bound / 3.0));
    }
  }
}
