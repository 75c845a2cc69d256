#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cimpcc/planner.hpp"

namespace cimpcc {

struct CycleRecord {
  double t{};
  VehicleState state;  // progress re-anchored to the centerline projection
  ControlInput command;
  double xi_con{};
  double xi_lag{};
  double beta{};
  double solve_time{};
  int iterations{};
  /// Solver status string, "rejected" when the plan was unusable and the
  /// previous command was reapplied, or "off_track".
  std::string status;
};

struct Aggregate {
  double max{};
  double min{};
  double mean{};
};

Aggregate aggregate(std::span<const double> values);

struct LapStats {
  std::vector<double> lap_times;
  std::vector<double> velocities;   // mean commanded v_l per lap
  std::vector<double> path_speeds;  // driven path length / lap time
  Aggregate lap_time;
  Aggregate velocity;
};

struct LapBoundary {
  std::size_t index{};  // first sample at or past the crossing
  double time{};        // interpolated crossing time
};

/// Lap k completes at the first sample with s >= k * total_length; the
/// crossing time is interpolated linearly between the bracketing samples.
std::vector<LapBoundary> detect_lap_completion(std::span<const double> progress,
                                               std::span<const double> times,
                                               double total_length);

/// Statistics over the laps between successive boundaries; the stretch before
/// the first boundary is the launch lap and is ignored. Throws NoCompletedLaps.
LapStats compute_stats(std::span<const CycleRecord> records,
                       std::span<const LapBoundary> boundaries);

struct RaceConfig {
  PlannerConfig planner;
  int n_laps{5};
  std::uint64_t seed{0};
  double v_l_noise_std{0.0};
  double delta_noise_std{0.0};
  /// Abort when the race has not finished after this much simulated time;
  /// zero picks a generous limit from the track length.
  double max_sim_time{0.0};

  void validate() const;
};

struct RaceResult {
  PlannerMode mode{PlannerMode::kCiMpcc};
  std::vector<CycleRecord> records;
  std::vector<LapBoundary> boundaries;
  LapStats stats;  // empty when no lap was counted
  bool aborted{};
  std::string abort_reason;
};

/// Closed-loop race from rest at s = 0. Two consecutive unusable solves or
/// off-track cycles abort the race; the partial telemetry is kept.
RaceResult run_race(const Track& track, PlannerMode mode, const RaceConfig& config);

struct ComparisonReport {
  std::string baseline_name;
  std::string candidate_name;
  LapStats baseline;
  LapStats candidate;
  double lap_time_change_percent{};  // (baseline - candidate) / baseline
  double velocity_change_percent{};  // (candidate - baseline) / baseline
};

ComparisonReport make_report(const RaceResult& baseline, const RaceResult& candidate);

struct Comparison {
  RaceResult baseline;
  RaceResult candidate;
  ComparisonReport report;
};

/// Runs MPCC then CiMPCC on the same track and config. With self_compare the
/// configured planner mode races against itself. Throws RaceAborted naming
/// the method that aborted.
Comparison compare(const Track& track, const RaceConfig& config, bool self_compare = false);

// --- serialization ---------------------------------------------------------

std::string telemetry_csv(std::span<const CycleRecord> records);
/// Throws ParseError (with line number) on malformed input or no rows.
std::vector<CycleRecord> parse_telemetry_csv(std::string_view content);

std::string stats_json(const LapStats& stats);
std::string stats_json(const RaceResult& result);
std::string comparison_json(const ComparisonReport& report);

struct TelemetrySummary {
  std::size_t cycles{};
  std::optional<LapStats> stats;  // absent when fewer than two crossings
  double solve_p50{};
  double solve_p95{};
  double solve_max{};
  double fraction_under_budget{};
};

/// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Lap table and solve-time profile recovered from telemetry alone.
TelemetrySummary summarize_telemetry(std::span<const CycleRecord> records, double total_length,
                                     double budget);

}  // namespace cimpcc
