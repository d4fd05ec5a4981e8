#include "supdtl/endpoint.hpp"

#include <cmath>

#include "supdtl/error.hpp"

namespace supdtl {

void BinaryEndpointSpec::validate() const {
  if (!(p_control > 0.0 && p_control < 1.0)) {
    throw ValidationError("endpoint.p_control", "must lie in (0, 1)");
  }
  if (!(rd_uninteresting > 0.0)) {
    throw ValidationError("endpoint.rd_uninteresting", "must be positive");
  }
  if (!(rd_relevant > rd_uninteresting)) {
    throw ValidationError("endpoint.rd_relevant", "must exceed rd_uninteresting");
  }
  if (!(rd_relevant < p_control)) {
    throw ValidationError("endpoint.rd_relevant", "must be smaller than p_control");
  }
}

void NormalEffectSpec::validate() const {
  if (!(theta_zero > 0.0)) throw ValidationError("endpoint.theta_zero", "must be positive");
  if (!(theta_prime > theta_zero)) {
    throw ValidationError("endpoint.theta_prime", "must exceed theta_zero");
  }
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw ValidationError("endpoint.sigma_sq", "must be positive");
  }
}

double log_odds(double p) { return std::log(p / (1.0 - p)); }

double log_odds_effect(double p_control, double rd) {
  const double treated = p_control - rd;
  if (!(treated > 0.0 && treated < 1.0)) {
    throw InputError("binary endpoint: treated event rate must lie in (0, 1)");
  }
  return log_odds(p_control) - log_odds(treated);
}

double treated_rate(double p_control, double theta) {
  const double lo = log_odds(p_control) - theta;
  return 1.0 / (1.0 + std::exp(-lo));
}

double binary_variance(double p_control) { return 1.0 / (p_control * (1.0 - p_control)); }

NormalEffectSpec binary_to_normal(const BinaryEndpointSpec& spec) {
  spec.validate();
  return {log_odds_effect(spec.p_control, spec.rd_relevant),
          log_odds_effect(spec.p_control, spec.rd_uninteresting),
          binary_variance(spec.p_control)};
}

}  // namespace supdtl
