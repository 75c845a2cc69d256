#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cimpcc/race_harness.hpp"

namespace cimpcc {

enum class RunMode { kMpcc, kCiMpcc, kCompare };

std::string_view to_string(RunMode mode);

/// Everything a CLI run needs. Defaults race the standard weights on the
/// shipped desk track, so an empty config document is a valid comparison.
struct RunConfig {
  std::filesystem::path track_path;
  RunMode mode{RunMode::kCompare};
  bool self_compare{false};
  std::filesystem::path output_dir{"cimpcc_out"};
  int maf_window{kDefaultMafWindow};
  /// Resample spacing in meters; unset keeps the file's points.
  std::optional<double> resample_spacing;
  RaceConfig race;

  /// Throws ConfigurationError.
  void validate() const;
};

/// Track shipped with the build (the desk-scale stadium-chicane circuit).
std::filesystem::path default_track_path();

/// Parses a JSON config. Relative paths resolve against base_dir; missing
/// keys take their defaults; unknown keys are rejected. Throws ParseError for
/// malformed JSON (message carries line and column) and ConfigurationError
/// for invalid content.
RunConfig parse_run_config(std::string_view json, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully resolved config as JSON; parsing it back gives the same RunConfig.
std::string to_json(const RunConfig& config);

/// Loads the configured track (resampled if requested) with its curvature
/// profile.
Track load_track(const RunConfig& config);

}  // namespace cimpcc
