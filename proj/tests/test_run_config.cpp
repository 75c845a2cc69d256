#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cimpcc/run_config.hpp"

using namespace cimpcc;

namespace {

const std::filesystem::path kData = CIMPCC_DATA_DIR;

std::string message_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(RunConfig, EmptyDocumentUsesDefaults) {
  for (const char* text : {"", "{}", "// nothing\n{}"}) {
    const auto cfg = parse_run_config(text);
    EXPECT_EQ(cfg.mode, RunMode::kCompare);
    EXPECT_EQ(cfg.race.n_laps, 5);
    EXPECT_EQ(cfg.race.seed, 0u);
    EXPECT_EQ(cfg.maf_window, kDefaultMafWindow);
    EXPECT_EQ(cfg.track_path, default_track_path());
    EXPECT_EQ(cfg.race.planner.weights.q_con, 800.0);
    EXPECT_EQ(cfg.race.planner.mapping.alpha, 3.0);
    EXPECT_EQ(cfg.race.planner.horizon.n_p, 10);
  }
  EXPECT_TRUE(std::filesystem::is_regular_file(default_track_path()));
}

TEST(RunConfig, ReadsEverySection) {
  const auto cfg = parse_run_config(R"({
    "mode": "mpcc", "n_laps": 17, "seed": 4,
    "track": {"maf_window": 5, "resample_spacing": 0.2},
    "horizon": {"n_p": 12, "n_c": 6, "input_upper": [10, 0.5, 10], "input_lower": [-10, -0.5, -10]},
    "weights": {"gamma": 20, "r3": [10, 20]},
    "mapping": {"alpha": 2.5},
    "velocity": {"v_bar": [4.0, 3.6], "v_under": [2.6, 2.34]},
    "vehicle": {"wheelbase": 0.3},
    "solver": {"max_iterations": 50, "hessian": "exact_diagonal_regularized"},
    "disturbance": {"v_l_std": 0.02}
  })");
  const auto& pc = cfg.race.planner;
  EXPECT_EQ(cfg.mode, RunMode::kMpcc);
  EXPECT_EQ(pc.mode, PlannerMode::kMpcc);
  EXPECT_EQ(cfg.race.n_laps, 17);
  EXPECT_EQ(cfg.race.seed, 4u);
  EXPECT_EQ(cfg.maf_window, 5);
  EXPECT_EQ(cfg.resample_spacing, 0.2);
  EXPECT_EQ(pc.horizon.n_p, 12);
  EXPECT_EQ(pc.horizon.n_c, 6);
  EXPECT_EQ(pc.horizon.input_upper[1], 0.5);
  EXPECT_EQ(pc.weights.gamma, 20.0);
  EXPECT_EQ(pc.weights.q_con, 800.0);
  EXPECT_EQ(pc.weights.r3[1], 20.0);
  EXPECT_EQ(pc.mapping.alpha, 2.5);
  EXPECT_EQ(pc.velocity.v_under.v_p, 2.34);
  EXPECT_EQ(pc.vehicle.wheelbase, 0.3);
  EXPECT_EQ(pc.solver.max_iterations, 50);
  EXPECT_EQ(pc.solver.hessian_strategy, HessianStrategy::kExactDiagonalRegularized);
  EXPECT_EQ(cfg.race.v_l_noise_std, 0.02);
}

TEST(RunConfig, UnknownKeysRejected) {
  EXPECT_THROW(parse_run_config(R"({"laps": 3})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"weights": {"q": 1}})"), ConfigurationError);
  EXPECT_NE(message_of(R"({"weights": {"q": 1}})").find("weights.q"), std::string::npos)
      << message_of(R"({"weights": {"q": 1}})");
}

TEST(RunConfig, MalformedJsonReportsPosition) {
  EXPECT_THROW(parse_run_config("{\n  \"n_laps\": 3,\n  oops\n}"), ParseError);
  const auto msg = message_of("{\n  \"n_laps\": 3,\n  oops\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(RunConfig, TypeAndValueErrors) {
  EXPECT_THROW(parse_run_config(R"({"n_laps": "five"})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"n_laps": -1})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"mode": "fast"})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"track": {"maf_window": 4}})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"weights": {"r1": [1, 2]}})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"horizon": {"n_c": 11}})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"mapping": {"alpha": 0}})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"solver": {"hessian": "bfgs"}})"), ConfigurationError);
  EXPECT_THROW(parse_run_config(R"({"track_path": "no/such/track.csv"})"), ConfigurationError);
  EXPECT_THROW(parse_run_config("[1, 2]"), ConfigurationError);
}

TEST(RunConfig, WiderSteeringBoundAccepted) {
  const auto cfg = parse_run_config(
      R"({"horizon": {"input_lower": [-10, -0.5, -10], "input_upper": [10, 0.5, 10]}})");
  EXPECT_EQ(cfg.race.planner.horizon.input_upper[1], 0.5);
}

TEST(RunConfig, RelativePathsResolveAgainstBaseDir) {
  const auto cfg = parse_run_config(R"({"track_path": "stadium_chicane.csv", "output_dir": "out"})",
                                    kData);
  EXPECT_EQ(cfg.track_path, kData / "stadium_chicane.csv");
  EXPECT_EQ(cfg.output_dir, kData / "out");
}

TEST(RunConfig, EchoRoundTrip) {
  const auto cfg = parse_run_config(R"({"mode": "cimpcc", "n_laps": 2, "seed": 9,
                                        "track": {"resample_spacing": 0.15},
                                        "weights": {"gamma": 35.5}})");
  const auto echo = to_json(cfg);
  const auto back = parse_run_config(echo);
  EXPECT_EQ(to_json(back), echo);
  EXPECT_EQ(back.race.planner.weights.gamma, 35.5);
  EXPECT_EQ(back.resample_spacing, 0.15);
  EXPECT_EQ(back.mode, RunMode::kCiMpcc);
}

TEST(RunConfig, LoadFromFileAndTrack) {
  const auto dir = std::filesystem::temp_directory_path() / "cimpcc_run_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "run.json") << R"({"n_laps": 1, "track": {"resample_spacing": 0.2}})";
  }
  const auto cfg = load_run_config(dir / "run.json");
  EXPECT_EQ(cfg.output_dir, dir / "cimpcc_out");
  const auto track = load_track(cfg);
  EXPECT_NEAR(track.centerline.total_length(), 45.415, 0.01);
  EXPECT_NEAR(track.centerline.total_length() / static_cast<double>(track.centerline.size()), 0.2,
              0.01);
  EXPECT_THROW(load_run_config(dir / "missing.json"), ConfigurationError);
  std::filesystem::remove_all(dir);
}
