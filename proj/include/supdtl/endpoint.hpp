#pragma once

namespace supdtl {

/// Binary outcome where treatment lowers an event rate.
struct BinaryEndpointSpec {
  double p_control = 0.5;
  /// Clinically relevant absolute risk decrease.
  double rd_relevant = 0.1;
  /// Largest uninteresting absolute risk decrease.
  double rd_uninteresting = 0.01;

  void validate() const;
};

/// Effects on the log-odds scale with the matching variance parameter.
struct NormalEffectSpec {
  double theta_prime = 0.0;
  double theta_zero = 0.0;
  double sigma_sq = 1.0;

  void validate() const;
};

double log_odds(double p);

/// log-odds(p_control) - log-odds(p_control - rd). Throws InputError if the
/// treated rate leaves (0, 1).
double log_odds_effect(double p_control, double rd);

/// Treated event rate implied by a log-odds effect; inverse of
/// log_odds_effect in its second argument.
double treated_rate(double p_control, double theta);

/// sigma^2 = 1 / (p_control (1 - p_control)).
double binary_variance(double p_control);

NormalEffectSpec binary_to_normal(const BinaryEndpointSpec& spec);

}  // namespace supdtl
