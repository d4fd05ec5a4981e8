#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "supdtl/config.hpp"

namespace supdtl::cli {

struct RunConfig {
  /// design | evaluate | simulate | compare
  std::string command;
  std::filesystem::path config_path;
  /// JSON report destination; nothing is written when empty.
  std::optional<std::filesystem::path> out_path;
  /// Design record written by `design`, reused instead of recalibrating.
  std::optional<std::filesystem::path> design_path;

  std::optional<double> alpha;
  std::optional<double> power;
  std::optional<double> omega;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::optional<double> tol;
};

/// Applies command-line overrides and revalidates the touched fields.
void apply_overrides(const RunConfig& run, ParsedConfig& cfg);

/// Runs one workflow and returns its JSON report; the text table goes to
/// `table`. Throws on any error.
nlohmann::json execute(const RunConfig& run, const ParsedConfig& cfg, std::ostream& table);

/// Full command: load config, execute, write the report. Errors are printed
/// to `err` as a one-line JSON diagnostic. Returns the process exit status.
int run(const RunConfig& run, std::ostream& out, std::ostream& err);

nlohmann::json design_to_json(const TrialDesign& design);
TrialDesign design_from_json(const nlohmann::json& j);

}  // namespace supdtl::cli
