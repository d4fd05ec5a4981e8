#include <doctest.h>

#include <cmath>

#include "supdtl/endpoint.hpp"
#include "supdtl/error.hpp"

using namespace supdtl;

TEST_SUITE("endpoint") {
  TEST_CASE("motivating binary endpoint") {
    const auto e = binary_to_normal({0.12, 0.05, 0.01});
    CHECK(std::abs(e.theta_prime - 0.594) <= 0.001);
    CHECK(std::abs(e.theta_zero - 0.098) <= 0.001);
    CHECK(std::abs(e.sigma_sq - 9.47) <= 0.01);
  }

  TEST_CASE("log-odds effect by hand") {
    const double p = 0.3, rd = 0.1;
    const double expect = std::log(p / (1 - p)) - std::log((p - rd) / (1 - p + rd));
    CHECK(log_odds_effect(p, rd) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(binary_variance(0.5) == doctest::Approx(4.0));
  }

  TEST_CASE("treated rate inverts the effect") {
    for (double p : {0.05, 0.12, 0.5, 0.9})
      for (double rd : {0.001, 0.01, 0.04}) {
        const double theta = log_odds_effect(p, rd);
        CHECK(treated_rate(p, theta) == doctest::Approx(p - rd).epsilon(1e-12));
      }
  }

  TEST_CASE("invalid specifications name the field") {
    auto field_of = [](const BinaryEndpointSpec& s) {
      try {
        s.validate();
      } catch (const ValidationError& e) {
        return e.field();
      }
      return std::string();
    };
    CHECK(field_of({1.2, 0.05, 0.01}) == "endpoint.p_control");
    CHECK(field_of({0.12, 0.05, 0.0}) == "endpoint.rd_uninteresting");
    CHECK(field_of({0.12, 0.01, 0.05}) == "endpoint.rd_relevant");
    CHECK(field_of({0.12, 0.2, 0.01}) == "endpoint.rd_relevant");
    CHECK_THROWS_AS(NormalEffectSpec({0.1, 0.2, 1.0}).validate(), ValidationError);
    CHECK_THROWS_AS(log_odds_effect(0.1, 0.1), InputError);
  }
}
