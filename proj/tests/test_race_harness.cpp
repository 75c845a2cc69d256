#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cimpcc/race_harness.hpp"
#include "cimpcc/track_fixtures.hpp"

using namespace cimpcc;

namespace {

const Track& desk_track() {
  static const Track t = Track::build(fixtures::stadium_chicane());
  return t;
}

const RaceResult& desk_race(PlannerMode mode) {
  static const RaceResult ci = [] {
    RaceConfig rc;
    rc.n_laps = 3;
    return run_race(desk_track(), PlannerMode::kCiMpcc, rc);
  }();
  static const RaceResult mpcc = [] {
    RaceConfig rc;
    rc.n_laps = 3;
    return run_race(desk_track(), PlannerMode::kMpcc, rc);
  }();
  return mode == PlannerMode::kCiMpcc ? ci : mpcc;
}

CycleRecord record_at(double t, double v_l) {
  CycleRecord r;
  r.t = t;
  r.command.v_l = v_l;
  r.status = "converged";
  return r;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(LapDetection, ExactlyAtLength) {
  const std::vector<double> s{0.0, 5.0, 10.0, 15.0};
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const auto b = detect_lap_completion(s, t, 10.0);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].index, 2u);
  EXPECT_DOUBLE_EQ(b[0].time, 2.0);
}

TEST(LapDetection, InterpolatesBetweenSamples) {
  const double l = 45.0;
  const std::vector<double> s{l - 0.5, l - 0.1, l + 0.3};
  const std::vector<double> t{0.95, 1.00, 1.05};
  const auto b = detect_lap_completion(s, t, l);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].index, 2u);
  EXPECT_NEAR(b[0].time, 1.0125, 1e-12);
}

TEST(LapDetection, NoCrossing) {
  EXPECT_TRUE(detect_lap_completion(std::vector<double>{0.0, 3.0, 9.9},
                                    std::vector<double>{0.0, 1.0, 2.0}, 10.0)
                  .empty());
}

TEST(ComputeStats, HandExamples) {
  std::vector<CycleRecord> recs;
  for (int i = 0; i < 4; ++i) recs.push_back(record_at(i, 1.0 + i));
  const std::vector<LapBoundary> b{{0, 0.0}, {1, 14.0}, {2, 28.2}, {3, 42.6}};
  const auto st = compute_stats(recs, b);
  ASSERT_EQ(st.lap_times.size(), 3u);
  EXPECT_NEAR(st.lap_time.mean, 14.2, 1e-12);
  EXPECT_NEAR(st.lap_time.max, 14.4, 1e-12);
  EXPECT_NEAR(st.lap_time.min, 14.0, 1e-12);
  EXPECT_DOUBLE_EQ(st.velocities[0], 1.0);
  EXPECT_DOUBLE_EQ(st.velocities[2], 3.0);
}

TEST(ComputeStats, SingleLapAndNoLap) {
  std::vector<CycleRecord> recs{record_at(0, 2.0), record_at(1, 4.0), record_at(2, 9.0)};
  const std::vector<LapBoundary> one{{0, 0.0}, {2, 2.0}};
  const auto st = compute_stats(recs, one);
  EXPECT_EQ(st.lap_time.max, st.lap_time.min);
  EXPECT_EQ(st.lap_time.min, st.lap_time.mean);
  EXPECT_DOUBLE_EQ(st.velocity.mean, 3.0);
  EXPECT_THROW(compute_stats(recs, std::vector<LapBoundary>{{0, 0.0}}), NoCompletedLaps);
  EXPECT_THROW(compute_stats(recs, std::vector<LapBoundary>{}), NoCompletedLaps);
}

TEST(RunRace, ZeroLapsKeepsOnlyLaunch) {
  RaceConfig rc;
  rc.n_laps = 0;
  const auto r = run_race(desk_track(), PlannerMode::kCiMpcc, rc);
  EXPECT_FALSE(r.aborted);
  EXPECT_TRUE(r.stats.lap_times.empty());
  ASSERT_EQ(r.boundaries.size(), 1u);
  EXPECT_EQ(r.boundaries.back().index + 1, r.records.size());
}

TEST(RunRace, StadiumLapsAreSteady) {
  const Track track = Track::build(fixtures::stadium(10.0, 1.5));
  RaceConfig rc;
  rc.n_laps = 3;
  const auto r = run_race(track, PlannerMode::kCiMpcc, rc);
  ASSERT_FALSE(r.aborted) << r.abort_reason;
  ASSERT_EQ(r.stats.lap_times.size(), 3u);
  for (double a : r.stats.lap_times) {
    EXPECT_TRUE(std::isfinite(a));
    for (double b : r.stats.lap_times) EXPECT_LE(std::abs(a - b), 0.1 * std::min(a, b));
  }
}

TEST(RunRace, DeterministicWithFixedSeed) {
  RaceConfig rc;
  rc.n_laps = 1;
  rc.seed = 7;
  rc.v_l_noise_std = 0.05;
  rc.delta_noise_std = 0.01;
  const auto a = run_race(desk_track(), PlannerMode::kCiMpcc, rc);
  const auto b = run_race(desk_track(), PlannerMode::kCiMpcc, rc);
  EXPECT_EQ(a.stats.lap_times, b.stats.lap_times);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].state.vec(), b.records[i].state.vec());
    EXPECT_EQ(a.records[i].command.vec(), b.records[i].command.vec());
  }
}

TEST(RunRace, InvalidConfig) {
  RaceConfig rc;
  rc.n_laps = -1;
  EXPECT_THROW(run_race(desk_track(), PlannerMode::kMpcc, rc), ConfigurationError);
  rc = {};
  rc.v_l_noise_std = -0.1;
  EXPECT_THROW(run_race(desk_track(), PlannerMode::kMpcc, rc), ConfigurationError);
}

TEST(RunRace, TimingAccounting) {
  for (auto mode : {PlannerMode::kMpcc, PlannerMode::kCiMpcc}) {
    const auto& r = desk_race(mode);
    ASSERT_FALSE(r.aborted) << r.abort_reason;
    ASSERT_EQ(r.stats.lap_times.size(), 3u);
    const double sum = std::accumulate(r.stats.lap_times.begin(), r.stats.lap_times.end(), 0.0);
    EXPECT_NEAR(sum, r.boundaries.back().time - r.boundaries.front().time, 1e-9);
  }
}

TEST(RunRace, DistanceConsistency) {
  const double l = desk_track().centerline.total_length();
  for (auto mode : {PlannerMode::kMpcc, PlannerMode::kCiMpcc}) {
    const auto& st = desk_race(mode).stats;
    EXPECT_LE(std::abs(st.velocity.mean * st.lap_time.mean - l), 0.15 * l);
  }
}

TEST(RunRace, StaysInCorridorAndBounds) {
  const HorizonConfig h;
  for (auto mode : {PlannerMode::kMpcc, PlannerMode::kCiMpcc}) {
    for (const auto& c : desk_race(mode).records) {
      EXPECT_LE(std::abs(c.xi_con), 0.75);
      EXPECT_LE(std::abs(c.command.delta), h.input_upper[1]);
      EXPECT_LE(std::abs(c.command.v_l), h.input_upper[0]);
      EXPECT_EQ(c.status, "converged");
    }
  }
}

TEST(RunRace, VelocityAnticorrelatesWithCurvature) {
  const auto& r = desk_race(PlannerMode::kCiMpcc);
  std::vector<double> v, nsc;
  const auto from = r.boundaries[0].index, to = r.boundaries[1].index;
  for (auto i = from; i < to; ++i) {
    const auto& c = r.records[i];
    const auto p = project(desk_track().centerline, c.state.x, c.state.y, c.state.progress);
    v.push_back(c.command.v_l);
    nsc.push_back(desk_track().curvature.normalized[p.index]);
  }
  EXPECT_LT(correlation(v, nsc), 0.0);
}

TEST(RunRace, SeventeenLapProtocol) {
  RaceConfig rc;
  rc.n_laps = 17;
  const auto r = run_race(desk_track(), PlannerMode::kCiMpcc, rc);
  ASSERT_FALSE(r.aborted) << r.abort_reason;
  EXPECT_EQ(r.stats.lap_times.size(), 17u);
}

TEST(Compare, SelfComparisonIsZero) {
  RaceConfig rc;
  rc.n_laps = 1;
  const auto c = compare(desk_track(), rc, true);
  EXPECT_EQ(c.report.lap_time_change_percent, 0.0);
  EXPECT_EQ(c.report.velocity_change_percent, 0.0);
  const auto json = comparison_json(c.report);
  EXPECT_NE(json.find("0.0"), std::string::npos);
}

TEST(Compare, ReportDirection) {
  const auto rep = make_report(desk_race(PlannerMode::kMpcc), desk_race(PlannerMode::kCiMpcc));
  EXPECT_EQ(rep.baseline_name, "mpcc");
  EXPECT_EQ(rep.candidate_name, "cimpcc");
  EXPECT_GT(rep.lap_time_change_percent, 5.0);
  EXPECT_GT(rep.velocity_change_percent, 0.0);
}

TEST(Telemetry, RoundTripReproducesStats) {
  const auto& r = desk_race(PlannerMode::kCiMpcc);
  const auto parsed = parse_telemetry_csv(telemetry_csv(r.records));
  ASSERT_EQ(parsed.size(), r.records.size());
  const auto sum =
      summarize_telemetry(parsed, desk_track().centerline.total_length(), 0.05);
  ASSERT_TRUE(sum.stats.has_value());
  ASSERT_EQ(sum.stats->lap_times.size(), r.stats.lap_times.size());
  for (std::size_t i = 0; i < r.stats.lap_times.size(); ++i) {
    EXPECT_NEAR(sum.stats->lap_times[i], r.stats.lap_times[i], 1e-9);
    EXPECT_NEAR(sum.stats->velocities[i], r.stats.velocities[i], 1e-9);
  }
  EXPECT_EQ(sum.fraction_under_budget, 1.0);
}

TEST(Telemetry, HeaderAndParseErrors) {
  const auto csv = telemetry_csv(std::vector<CycleRecord>{record_at(0.0, 1.0)});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t_s,x_m,y_m,heading_rad,s_m,v_l_cmd,delta_cmd,v_p_cmd,xi_con_m,xi_lag_m,beta,"
            "solve_time_s,status");
  EXPECT_THROW(parse_telemetry_csv(""), ParseError);
  EXPECT_THROW(parse_telemetry_csv(csv.substr(0, csv.find('\n') + 1)), ParseError);
  try {
    parse_telemetry_csv(csv + "1,2,three\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Percentile, Examples) {
  EXPECT_DOUBLE_EQ(percentile(std::vector<double>(40, 0.01), 95.0), 0.01);
  EXPECT_DOUBLE_EQ(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 50.0), 3.0);
  EXPECT_DOUBLE_EQ(percentile({1.0, 2.0}, 95.0), 1.95);
  EXPECT_DOUBLE_EQ(percentile({3.0, 1.0}, 0.0), 1.0);
}
