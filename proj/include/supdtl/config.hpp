#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "supdtl/calibrate.hpp"
#include "supdtl/characteristics.hpp"
#include "supdtl/endpoint.hpp"

namespace supdtl {

/// Contents of a design configuration file.
///
///   [design]       arms, shape (obf | pocock | custom), boundaries, n_per_stage
///   [endpoint]     type (binary | normal), p_control, rd_relevant,
///                  rd_uninteresting, theta_prime, theta_zero, sigma_sq
///   [calibration]  alpha, power, omega, max_n, c_lo, c_hi
///   [run]          seed, reps, tol
///   [effects]      NAME = d1, d2, ...
///
/// Effect entries accept numbers and the symbols theta_prime / theta_zero,
/// optionally signed and scaled (e.g. -2*theta_prime). With shape = custom,
/// `boundaries` lists per-stage multipliers of the calibrated scale; `inf`
/// disables a look.
struct ParsedConfig {
  int arms = 0;
  BoundaryShape shape;
  /// Fixes the per-stage sample size instead of searching for it.
  std::optional<int> n_per_stage;
  std::variant<BinaryEndpointSpec, NormalEffectSpec> endpoint;
  CalibrationConfig calibration;
  NamedEffects effects;
  std::uint64_t seed = 20240601;
  std::int64_t reps = 100000;
  /// Integration error for reported probabilities.
  double tol = 1e-5;

  /// Effects and variance on the analysis scale.
  NormalEffectSpec normal_effects() const;
  /// Design with stages = arms and sigma filled in; boundaries empty.
  TrialDesign design_template() const;
  /// Configured effects, or global_null / lfc / all_effective when none.
  NamedEffects effects_or_default() const;
};

/// Parses and validates. Throws ParseError (with line) for schema problems
/// and ValidationError (with field) for out-of-range values.
ParsedConfig parse_config(std::string_view text);

ParsedConfig load_config(const std::filesystem::path& path);

/// Standard effect patterns for the least favourable and related scenarios.
NamedEffects default_effects(int arms, const NormalEffectSpec& eff);

}  // namespace supdtl
