#include "cimpcc/race_harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cimpcc {

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  return {*hi, *lo, std::clamp(mean, *lo, *hi)};
}

std::vector<LapBoundary> detect_lap_completion(std::span<const double> progress,
                                               std::span<const double> times,
                                               double total_length) {
  std::vector<LapBoundary> out;
  const std::size_t n = std::min(progress.size(), times.size());
  for (std::size_t j = 0; j < n; ++j) {
    const double target = static_cast<double>(out.size() + 1) * total_length;
    if (progress[j] < target) continue;
    double t = times[j];
    if (j > 0 && progress[j - 1] < target) {
      const double f = (target - progress[j - 1]) / (progress[j] - progress[j - 1]);
      t = times[j - 1] + f * (times[j] - times[j - 1]);
    }
    out.push_back({j, t});
  }
  return out;
}

LapStats compute_stats(std::span<const CycleRecord> records,
                       std::span<const LapBoundary> boundaries) {
  if (boundaries.size() < 2) throw NoCompletedLaps("no lap completed after the launch lap");
  LapStats stats;
  for (std::size_t lap = 0; lap + 1 < boundaries.size(); ++lap) {
    const auto& a = boundaries[lap];
    const auto& b = boundaries[lap + 1];
    if (b.index > records.size() || a.index >= b.index) {
      throw NoCompletedLaps("lap boundaries do not match the records");
    }
    double v_sum = 0.0;
    double path = 0.0;
    for (std::size_t i = a.index; i < b.index; ++i) {
      v_sum += records[i].command.v_l;
      if (i + 1 < records.size()) {
        path += std::hypot(records[i + 1].state.x - records[i].state.x,
                           records[i + 1].state.y - records[i].state.y);
      }
    }
    const double lap_time = b.time - a.time;
    stats.lap_times.push_back(lap_time);
    stats.velocities.push_back(v_sum / static_cast<double>(b.index - a.index));
    stats.path_speeds.push_back(path / lap_time);
  }
  stats.lap_time = aggregate(stats.lap_times);
  stats.velocity = aggregate(stats.velocities);
  return stats;
}

void RaceConfig::validate() const {
  planner.validate();
  if (n_laps < 0) throw ConfigurationError("n_laps must be non-negative");
  if (v_l_noise_std < 0.0 || delta_noise_std < 0.0) {
    throw ConfigurationError("noise standard deviations must be non-negative");
  }
  if (max_sim_time < 0.0) throw ConfigurationError("max_sim_time must be non-negative");
}

RaceResult run_race(const Track& track, PlannerMode mode, const RaceConfig& config) {
  config.validate();
  PlannerConfig pc = config.planner;
  pc.mode = mode;
  Planner planner(pc, track);
  Disturbance disturbance(config.v_l_noise_std, config.delta_noise_std, config.seed);

  const double dt = pc.horizon.t_s;
  const double length = track.centerline.total_length();
  const double time_limit = config.max_sim_time > 0.0
                                ? config.max_sim_time
                                : 60.0 + 2.0 * (config.n_laps + 1) * length;
  const auto max_cycles = static_cast<std::size_t>(std::ceil(time_limit / dt));

  RaceResult result;
  result.mode = mode;
  const auto start = track.reference.pose(0.0);
  VehicleState state{track.centerline.point(0).x, track.centerline.point(0).y, start.heading, 0.0};
  ControlInput last_command{};
  double s_prev = 0.0;
  int failures = 0;
  std::vector<double> progress;
  std::vector<double> times;

  for (std::size_t cycle = 0; cycle < max_cycles; ++cycle) {
    const double wrapped = track.centerline.wrap(s_prev);
    const double s_proj = project_continuous(track.centerline, state.x, state.y, wrapped);
    state.progress = s_prev + std::remainder(s_proj - wrapped, length);

    CycleRecord rec;
    rec.t = static_cast<double>(cycle) * dt;
    rec.state = state;
    const auto err = contour_lag_errors(state, track.reference);
    rec.xi_con = err.con;
    rec.xi_lag = err.lag;
    try {
      const HorizonPlan plan = planner.solve_step(state);
      rec.command = plan.command();
      rec.beta = plan.beta;
      rec.solve_time = plan.solve_time;
      rec.iterations = plan.iterations;
      rec.status = std::string(to_string(plan.status));
      failures = 0;
    } catch (const PlanRejected& e) {
      rec.command = last_command;
      rec.beta = e.plan().beta;
      rec.solve_time = e.plan().solve_time;
      rec.iterations = e.plan().iterations;
      rec.status = "rejected";
      ++failures;
      result.abort_reason = e.what();
    } catch (const OffTrack& e) {
      rec.command = last_command;
      rec.beta = planner.beta_at(state, state.progress);
      rec.status = "off_track";
      ++failures;
      result.abort_reason = e.what();
    }
    result.records.push_back(rec);
    progress.push_back(state.progress);
    times.push_back(rec.t);

    if (failures >= 2) {
      result.aborted = true;
      break;
    }
    if (state.progress >= static_cast<double>(config.n_laps + 1) * length) break;

    state = plant_step(state, rec.command, pc.vehicle, dt, &disturbance);
    last_command = rec.command;
    s_prev = progress.back();
    if (cycle + 1 == max_cycles) {
      result.aborted = true;
      result.abort_reason = "race did not finish within " + std::to_string(time_limit) + " s";
    }
  }

  if (!result.aborted) result.abort_reason.clear();
  result.boundaries = detect_lap_completion(progress, times, length);
  if (result.boundaries.size() >= 2) result.stats = compute_stats(result.records, result.boundaries);
  return result;
}

ComparisonReport make_report(const RaceResult& baseline, const RaceResult& candidate) {
  ComparisonReport r;
  r.baseline_name = std::string(to_string(baseline.mode));
  r.candidate_name = std::string(to_string(candidate.mode));
  r.baseline = baseline.stats;
  r.candidate = candidate.stats;
  if (r.baseline.lap_times.empty() || r.candidate.lap_times.empty()) {
    throw NoCompletedLaps("comparison needs at least one counted lap per method");
  }
  r.lap_time_change_percent =
      100.0 * (r.baseline.lap_time.mean - r.candidate.lap_time.mean) / r.baseline.lap_time.mean;
  r.velocity_change_percent =
      100.0 * (r.candidate.velocity.mean - r.baseline.velocity.mean) / r.baseline.velocity.mean;
  return r;
}

Comparison compare(const Track& track, const RaceConfig& config, bool self_compare) {
  const PlannerMode base = self_compare ? config.planner.mode : PlannerMode::kMpcc;
  const PlannerMode cand = self_compare ? config.planner.mode : PlannerMode::kCiMpcc;
  Comparison c;
  // Sequential on purpose: solves are timed, and sharing a core would distort
  // the wall-time limit.
  for (auto* target : {&c.baseline, &c.candidate}) {
    *target = run_race(track, target == &c.baseline ? base : cand, config);
    if (target->aborted) {
      throw RaceAborted(std::string(to_string(target->mode)) + " race aborted: " +
                        target->abort_reason);
    }
  }
  c.report = make_report(c.baseline, c.candidate);
  return c;
}

// --- serialization ---------------------------------------------------------

namespace {

constexpr const char* kTelemetryHeader =
    "t_s,x_m,y_m,heading_rad,s_m,v_l_cmd,delta_cmd,v_p_cmd,xi_con_m,xi_lag_m,beta,solve_time_s,"
    "status";

void append(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
  out.push_back(',');
}

double round1(double v) {
  const double r = std::round(v * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;  // no "-0.0"
}

nlohmann::ordered_json to_json(const Aggregate& a) {
  return {{"max", a.max}, {"min", a.min}, {"mean", a.mean}};
}

nlohmann::ordered_json to_json(const LapStats& s) {
  return {{"lap_times", s.lap_times},   {"velocities", s.velocities},
          {"path_speeds", s.path_speeds}, {"lap_time", to_json(s.lap_time)},
          {"velocity", to_json(s.velocity)}};
}

}  // namespace

std::string telemetry_csv(std::span<const CycleRecord> records) {
  std::string out = kTelemetryHeader;
  out.push_back('\n');
  for (const auto& r : records) {
    for (double v : {r.t, r.state.x, r.state.y, r.state.heading, r.state.progress, r.command.v_l,
                     r.command.delta, r.command.v_p, r.xi_con, r.xi_lag, r.beta, r.solve_time}) {
      append(out, v);
    }
    out += r.status;
    out.push_back('\n');
  }
  return out;
}

std::vector<CycleRecord> parse_telemetry_csv(std::string_view content) {
  std::vector<CycleRecord> out;
  std::size_t line_no = 0;
  bool header = false;
  while (!content.empty()) {
    const auto eol = content.find('\n');
    std::string_view line = content.substr(0, eol);
    content = eol == std::string_view::npos ? std::string_view{} : content.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != kTelemetryHeader) {
        throw ParseError("line " + std::to_string(line_no) + ": unexpected telemetry header");
      }
      header = true;
      continue;
    }
    double v[12];
    for (double& field : v) {
      const auto comma = line.find(',');
      if (comma == std::string_view::npos) {
        throw ParseError("line " + std::to_string(line_no) + ": expected 13 fields");
      }
      const auto token = line.substr(0, comma);
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), field);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                         std::string(token) + "'");
      }
      line.remove_prefix(comma + 1);
    }
    if (line.empty() || line.find(',') != std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 13 fields");
    }
    CycleRecord r;
    r.t = v[0];
    r.state = {v[1], v[2], v[3], v[4]};
    r.command = {v[5], v[6], v[7]};
    r.xi_con = v[8];
    r.xi_lag = v[9];
    r.beta = v[10];
    r.solve_time = v[11];
    r.status = std::string(line);
    out.push_back(std::move(r));
  }
  if (!header) throw ParseError("telemetry is empty");
  if (out.empty()) throw ParseError("telemetry has no rows");
  return out;
}

std::string stats_json(const LapStats& stats) { return to_json(stats).dump(2) + "\n"; }

std::string stats_json(const RaceResult& result) {
  nlohmann::ordered_json j = to_json(result.stats);
  j["mode"] = std::string(to_string(result.mode));
  j["laps"] = result.stats.lap_times.size();
  j["cycles"] = result.records.size();
  j["aborted"] = result.aborted;
  if (result.aborted) j["abort_reason"] = result.abort_reason;
  return j.dump(2) + "\n";
}

std::string comparison_json(const ComparisonReport& report) {
  nlohmann::ordered_json j;
  j["baseline"] = report.baseline_name;
  j["candidate"] = report.candidate_name;
  j["baseline_stats"] = to_json(report.baseline);
  j["candidate_stats"] = to_json(report.candidate);
  j["lap_time_change_percent"] = round1(report.lap_time_change_percent);
  j["velocity_change_percent"] = round1(report.velocity_change_percent);
  return j.dump(2) + "\n";
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

TelemetrySummary summarize_telemetry(std::span<const CycleRecord> records, double total_length,
                                     double budget) {
  if (records.empty()) throw ParseError("telemetry has no rows");
  TelemetrySummary s;
  s.cycles = records.size();
  std::vector<double> progress, times, solve;
  for (const auto& r : records) {
    progress.push_back(r.state.progress);
    times.push_back(r.t);
    solve.push_back(r.solve_time);
  }
  const auto boundaries = detect_lap_completion(progress, times, total_length);
  if (boundaries.size() >= 2) s.stats = compute_stats(records, boundaries);
  s.solve_p50 = percentile(solve, 50.0);
  s.solve_p95 = percentile(solve, 95.0);
  s.solve_max = *std::max_element(solve.begin(), solve.end());
  s.fraction_under_budget =
      static_cast<double>(std::count_if(solve.begin(), solve.end(),
                                        [&](double v) { return v < budget; })) /
      static_cast<double>(solve.size());
  return s;
}

}  // namespace cimpcc
