#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "reference_matrices.hpp"
#include "supdtl/covariance.hpp"
#include "supdtl/error.hpp"
#include "supdtl/mvn.hpp"
#include "supdtl/normal.hpp"
#include "supdtl/simulate.hpp"

using namespace supdtl;
using ref::D;
using ref::Z;

namespace {

TrialDesign design3(int n = 10, double sigma = 1.0) {
  TrialDesign d;
  d.arms = 3;
  d.stages = 3;
  d.n_per_stage = n;
  d.boundaries = {3.0, 2.5, 2.0};
  d.sigma = sigma;
  return d;
}

Eigen::MatrixXd correlation_of(const TrialDesign& d, const std::vector<StatCoord>& coords) {
  const auto m = static_cast<Eigen::Index>(coords.size());
  Eigen::MatrixXd c(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) c(i, j) = correlation(d, coords[i], coords[j]);
  return c;
}

}  // namespace

TEST_SUITE("covariance") {
  TEST_CASE("pairwise examples") {
    const auto d = design3();
    CHECK(cov_z(d, Z(1, 1), Z(1, 2)) == doctest::Approx(std::sqrt(0.5)));
    CHECK(cov_z(d, Z(1, 1), Z(2, 1)) == doctest::Approx(0.5));
    CHECK(cov_z(d, Z(2, 3), Z(2, 3)) == doctest::Approx(1.0));
    CHECK(cov_z_diff(d, Z(1, 1), D(1, 2, 1)) == doctest::Approx(0.5));
    CHECK(cov_z_diff(d, Z(2, 1), D(1, 2, 1)) == doctest::Approx(-0.5));
    CHECK(cov_z_diff(d, Z(3, 1), D(1, 2, 1)) == doctest::Approx(0.0));
    CHECK(cov_diff_diff(d, D(1, 2, 1), D(1, 2, 1)) == doctest::Approx(1.0));
    CHECK(cov_diff_diff(d, D(1, 3, 1), D(2, 3, 1)) == doctest::Approx(0.5));
    CHECK(cov_diff_diff(d, D(1, 2, 2), D(2, 3, 1)) == doctest::Approx(-1.0 / (2.0 * std::sqrt(2.0))));
    CHECK(cov_diff_diff(d, D(1, 2, 1), D(2, 1, 1)) == doctest::Approx(-1.0));
  }

  TEST_CASE("golden matrices match entrywise") {
    const auto d = design3();
    for (const auto& g : ref::matrices()) {
      CAPTURE(g.name);
      const Eigen::MatrixXd c = correlation_of(d, g.coords);
      REQUIRE(c.rows() == g.sigma.rows());
      CHECK((c - g.sigma).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((g.sigma - g.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("means follow the effect scaling") {
    const double tp = 0.6, t0 = 0.1, sigma = 3.0;
    const int n = 50;
    const auto d = design3(n, sigma);
    EffectConfig lfc{{tp, t0, t0}};
    const double s = std::sqrt(static_cast<double>(n)) / sigma;
    // Means printed alongside the power matrices.
    const std::vector<std::pair<StatCoord, double>> expect{
        {Z(1, 1), tp * s / std::sqrt(2.0)},
        {D(1, 2, 1), (tp - t0) * s / std::sqrt(2.0)},
        {Z(2, 1), t0 * s / std::sqrt(2.0)},
        {D(2, 3, 1), 0.0},
        {Z(1, 2), tp * s},
        {D(1, 2, 2), (tp - t0) * s},
        {Z(1, 3), tp * std::sqrt(3.0) * s / std::sqrt(2.0)}};
    for (const auto& [c, m] : expect) CHECK(mean_of(d, lfc, c) == doctest::Approx(m).epsilon(1e-14));
  }

  TEST_CASE("moment problem for the PWER event under the global null") {
    const auto d = design3();
    EffectConfig null_cfg{{0, 0, 0}};
    auto p = build_moment_problem(d, null_cfg, {Z(1, 1), Z(1, 2), Z(1, 3)}, {-kInf, -kInf, -kInf},
                                  {3.0, 2.5, 2.0});
    CHECK(p.mean == std::vector<double>{0, 0, 0});
    CHECK((p.corr - ref::matrices()[0].sigma).cwiseAbs().maxCoeff() <= 1e-12);
    auto one = build_moment_problem(d, null_cfg, {Z(2, 2)}, {0.0}, {kInf});
    CHECK(one.corr.rows() == 1);
    CHECK(one.corr(0, 0) == 1.0);
  }

  TEST_CASE("random coordinate sets give valid correlations") {
    std::mt19937_64 rng(17);
    for (int arms = 2; arms <= 6; ++arms) {
      TrialDesign d;
      d.arms = arms;
      d.stages = arms;
      d.n_per_stage = 3;
      d.boundaries.assign(arms, 2.0);
      std::uniform_int_distribution<int> arm(1, arms), stage(1, arms);
      std::vector<StatCoord> coords;
      for (int i = 0; i < 12; ++i) {
        const int a = arm(rng);
        int b = arm(rng);
        if (b == a || i % 2) {
          coords.push_back(Z(a, stage(rng)));
        } else {
          coords.push_back(D(a, b, stage(rng)));
        }
      }
      const Eigen::MatrixXd c = correlation_of(d, coords);
      CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((c.diagonal().array() - 1.0).abs().maxCoeff() < 1e-15);
      mvn::OrthantProblem p;
      p.corr = c;
      p.mean.assign(coords.size(), 0.0);
      p.lower.assign(coords.size(), -kInf);
      p.upper.assign(coords.size(), 0.0);
      CHECK_NOTHROW(mvn::validate(p));
    }
  }

  TEST_CASE("correlations match simulated statistics") {
    const auto d = design3();
    EffectConfig eff{{0.3, -0.2, 0.1}};
    const std::vector<StatCoord> coords{Z(1, 1), Z(1, 2), Z(2, 1), D(1, 2, 2), D(2, 3, 1), Z(3, 3)};
    const int reps = 100'000;
    const auto m = static_cast<Eigen::Index>(coords.size());
    Eigen::MatrixXd x(reps, m);
    std::mt19937_64 rng(3);
    for (int r = 0; r < reps; ++r) {
      auto z = simulate_z_path(d, eff, rng);
      for (Eigen::Index i = 0; i < m; ++i) x(r, i) = coord_value(coords[i], z);
    }
    Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / (reps - 1.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      CHECK(std::abs(mean(i) - mean_of(d, eff, coords[i])) <= 4.0 * std::sqrt(cov(i, i) / reps));
      for (Eigen::Index j = 0; j < i; ++j) {
        const double r = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
        const double rho = correlation(d, coords[i], coords[j]);
        const double se = (1.0 - rho * rho) / std::sqrt(static_cast<double>(reps));
        CAPTURE(i);
        CAPTURE(j);
        CHECK(std::abs(r - rho) <= 4.0 * se);
      }
    }
  }

  TEST_CASE("design validation") {
    auto d = design3();
    CHECK_NOTHROW(d.validate());
    auto bad = d;
    bad.stages = 2;
    bad.boundaries = {2, 2};
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = d;
    bad.boundaries.back() = kInf;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = d;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    CHECK_THROWS_AS(validate_coord(d, Z(4, 1)), InputError);
    CHECK_THROWS_AS(validate_coord(d, D(1, 1, 1)), InputError);
    CHECK_THROWS_AS(validate_coord(d, Z(1, 4)), InputError);
  }
}
