// Command-line front end: track preprocessing, races, comparisons, reports.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cimpcc/race_harness.hpp"
#include "cimpcc/run_config.hpp"

namespace fs = std::filesystem;
using namespace cimpcc;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kAborted = 3;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

RunConfig load_config(const fs::path& path) {
  RunConfig cfg = load_run_config(path);
  if (const char* seed = std::getenv("CIMPCC_SEED")) {
    try {
      std::size_t used = 0;
      cfg.race.seed = std::stoull(seed, &used);
      if (used != std::string(seed).size()) throw std::invalid_argument(seed);
    } catch (const std::exception&) {
      throw ConfigurationError(std::string("CIMPCC_SEED is not an unsigned integer: ") + seed);
    }
  }
  return cfg;
}

void print_stats(const std::string& name, const LapStats& s) {
  std::printf("%-8s laps %zu  lap time mean %.3f s (min %.3f, max %.3f)  v_l mean %.3f m/s\n",
              name.c_str(), s.lap_times.size(), s.lap_time.mean, s.lap_time.min, s.lap_time.max,
              s.velocity.mean);
}

int process_track(const fs::path& track, int window, double spacing, const fs::path& out_dir) {
  LoadOptions opts;
  if (spacing > 0.0) opts.resample_spacing = spacing;
  const Centerline cl = load_centerline_file(track, opts);
  const CurvatureProfile p = make_curvature_profile(cl, window);

  std::string csv = "index,s_m,x_m,y_m,kappa_raw,kappa_smooth,kappa_nsc\n";
  char line[256];
  for (std::size_t i = 0; i < cl.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                  cl.arc_lengths()[i], cl.point(i).x, cl.point(i).y, p.raw[i], p.smoothed[i],
                  p.normalized[i]);
    csv += line;
  }
  fs::create_directories(out_dir);
  const fs::path out = out_dir / (track.stem().string() + "_curvature.csv");
  write_file(out, csv);
  std::printf("points %zu  length %.3f m\n", cl.size(), cl.total_length());
  std::printf("kappa_raw min %.6g max %.6g\n", p.k_min, p.k_max);
  std::printf("wrote %s\n", out.string().c_str());
  return kOk;
}

int race(const fs::path& config_path) {
  const RunConfig cfg = load_config(config_path);
  if (cfg.mode == RunMode::kCompare) {
    throw ConfigurationError("mode is \"compare\"; use the compare command or set mode");
  }
  const Track track = load_track(cfg);
  const PlannerMode mode = cfg.mode == RunMode::kMpcc ? PlannerMode::kMpcc : PlannerMode::kCiMpcc;
  const RaceResult result = run_race(track, mode, cfg.race);

  fs::create_directories(cfg.output_dir);
  write_file(cfg.output_dir / "config.json", to_json(cfg));
  write_file(cfg.output_dir / "telemetry.csv", telemetry_csv(result.records));
  write_file(cfg.output_dir / "stats.json", stats_json(result));
  if (result.aborted) {
    std::fprintf(stderr, "race aborted: %s\n", result.abort_reason.c_str());
    return kAborted;
  }
  print_stats(std::string(to_string(mode)), result.stats);
  std::printf("wrote %s\n", cfg.output_dir.string().c_str());
  return kOk;
}

int compare_cmd(const fs::path& config_path) {
  const RunConfig cfg = load_config(config_path);
  if (cfg.mode != RunMode::kCompare) {
    throw ConfigurationError("mode must be \"compare\" for the compare command");
  }
  const Track track = load_track(cfg);
  fs::create_directories(cfg.output_dir);
  write_file(cfg.output_dir / "config.json", to_json(cfg));

  Comparison c;
  try {
    c = compare(track, cfg.race, cfg.self_compare);
  } catch (const RaceAborted& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kAborted;
  }
  for (const auto* r : {&c.baseline, &c.candidate}) {
    const fs::path dir = cfg.output_dir / (r == &c.baseline ? "baseline" : "candidate");
    fs::create_directories(dir);
    write_file(dir / "telemetry.csv", telemetry_csv(r->records));
    write_file(dir / "stats.json", stats_json(*r));
  }
  write_file(cfg.output_dir / "comparison.json", comparison_json(c.report));

  print_stats(c.report.baseline_name, c.report.baseline);
  print_stats(c.report.candidate_name, c.report.candidate);
  std::printf("lap time change %+.1f%%  velocity change %+.1f%%\n",
              c.report.lap_time_change_percent, c.report.velocity_change_percent);
  std::printf("wrote %s\n", cfg.output_dir.string().c_str());
  return kOk;
}

int report(const fs::path& telemetry, double budget, bool show_reference, const fs::path& track_arg) {
  const auto records = parse_telemetry_csv(read_file(telemetry));

  fs::path track_path = track_arg;
  if (track_path.empty()) {
    // Telemetry written by race/compare sits next to (or one level below)
    // the echoed config that names its track.
    for (const auto& dir : {telemetry.parent_path(), telemetry.parent_path().parent_path()}) {
      if (fs::is_regular_file(dir / "config.json")) {
        track_path = load_run_config(dir / "config.json").track_path;
        break;
      }
    }
  }
  if (track_path.empty()) track_path = default_track_path();
  const Centerline cl = load_centerline_file(track_path);

  const auto s = summarize_telemetry(records, cl.total_length(), budget);
  std::printf("cycles %zu  track %s (%.3f m)\n", s.cycles, track_path.string().c_str(),
              cl.total_length());
  if (s.stats) {
    std::printf("%-5s %12s %14s\n", "lap", "time_s", "mean_v_l_mps");
    for (std::size_t i = 0; i < s.stats->lap_times.size(); ++i) {
      std::printf("%-5zu %12.4f %14.4f\n", i + 1, s.stats->lap_times[i], s.stats->velocities[i]);
    }
    std::printf("mean lap time %.4f s  mean velocity %.4f m/s\n", s.stats->lap_time.mean,
                s.stats->velocity.mean);
  } else {
    std::printf("no counted laps in telemetry\n");
  }
  std::printf("solve time p50 %.6f s  p95 %.6f s  max %.6f s\n", s.solve_p50, s.solve_p95,
              s.solve_max);
  std::printf("cycles under %.4f s budget: %.1f%%\n", budget, 100.0 * s.fraction_under_budget);
  if (show_reference) {
    std::printf("reference: 95%% < 0.0206 s (published hardware); this run: 95%% < %.4f s\n",
                s.solve_p95);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature-integrated MPCC racing planner"};
  app.require_subcommand(1);

  fs::path track, out_dir, config, telemetry, report_track;
  int window = kDefaultMafWindow;
  double spacing = 0.0;
  double budget = 0.05;
  bool show_reference = false;

  auto* pt = app.add_subcommand("process-track", "Compute the curvature profile of a track");
  pt->add_option("--track", track, "Track CSV (x_m,y_m,w_left_m,w_right_m)")->required();
  pt->add_option("--window", window, "Moving-average window (odd)");
  pt->add_option("--spacing", spacing, "Resample spacing in meters (0 keeps the points)");
  pt->add_option("--out", out_dir, "Output directory")->required();

  auto* rc = app.add_subcommand("race", "Run a closed-loop race");
  rc->add_option("--config", config, "Run config (JSON)")->required();

  auto* cmp = app.add_subcommand("compare", "Race MPCC against CiMPCC");
  cmp->add_option("--config", config, "Run config (JSON)")->required();

  auto* rep = app.add_subcommand("report", "Summarize a telemetry file");
  rep->add_option("--telemetry", telemetry, "Telemetry CSV")->required();
  rep->add_option("--budget", budget, "Solve-time budget in seconds");
  rep->add_option("--track", report_track, "Track CSV (defaults to the run's echoed config)");
  rep->add_flag("--paper-ref", show_reference, "Print the published solve-time reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*pt) return process_track(track, window, spacing, out_dir);
    if (*rc) return race(config);
    if (*cmp) return compare_cmd(config);
    if (*rep) return report(telemetry, budget, show_reference, report_track);
  } catch (const RaceAborted& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kAborted;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
