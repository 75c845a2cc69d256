#include "cimpcc/run_config.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#ifndef CIMPCC_DEFAULT_TRACK
#define CIMPCC_DEFAULT_TRACK "data/stadium_chicane.csv"
#endif

namespace cimpcc {
namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    convert(key, *it, out);
  }

  std::optional<Section> section(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return std::nullopt;
    return Section(*it, qualified(key));
  }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail(key, "unknown key");
    }
  }

 private:
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string where = key.empty() ? path_ : qualified(key);
    throw ConfigurationError((where.empty() ? std::string("config") : where) + ": " + what);
  }

  void convert(const std::string& key, const json& v, double& out) const {
    if (!v.is_number()) fail(key, "expected a number");
    out = v.get<double>();
  }
  void convert(const std::string& key, const json& v, int& out) const {
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const auto i = v.get<long long>();
    if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
      fail(key, "integer out of range");
    }
    out = static_cast<int>(i);
  }
  void convert(const std::string& key, const json& v, std::uint64_t& out) const {
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void convert(const std::string& key, const json& v, bool& out) const {
    if (!v.is_boolean()) fail(key, "expected true or false");
    out = v.get<bool>();
  }
  void convert(const std::string& key, const json& v, std::string& out) const {
    if (!v.is_string()) fail(key, "expected a string");
    out = v.get<std::string>();
  }
  void convert(const std::string& key, const json& v, std::optional<double>& out) const {
    if (v.is_null()) {
      out.reset();
      return;
    }
    double d{};
    convert(key, v, d);
    out = d;
  }
  template <std::size_t N>
  void convert(const std::string& key, const json& v, std::array<double, N>& out) const {
    if (!v.is_array() || v.size() != N) {
      fail(key, "expected an array of " + std::to_string(N) + " numbers");
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number()) fail(key, "expected an array of " + std::to_string(N) + " numbers");
      out[i] = v[i].get<double>();
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

RunMode parse_mode(const std::string& s) {
  if (s == "mpcc") return RunMode::kMpcc;
  if (s == "cimpcc") return RunMode::kCiMpcc;
  if (s == "compare") return RunMode::kCompare;
  throw ConfigurationError("mode: expected \"mpcc\", \"cimpcc\" or \"compare\", got \"" + s + "\"");
}

HessianStrategy parse_hessian(const std::string& s) {
  if (s == "gauss_newton") return HessianStrategy::kGaussNewton;
  if (s == "exact_diagonal_regularized") return HessianStrategy::kExactDiagonalRegularized;
  throw ConfigurationError(
      "solver.hessian: expected \"gauss_newton\" or \"exact_diagonal_regularized\", got \"" + s +
      "\"");
}

std::string_view hessian_name(HessianStrategy h) {
  return h == HessianStrategy::kGaussNewton ? "gauss_newton" : "exact_diagonal_regularized";
}

std::array<double, 2> pair(const OverallVelocity& v) { return {v.v_l, v.v_p}; }

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kMpcc: return "mpcc";
    case RunMode::kCiMpcc: return "cimpcc";
    case RunMode::kCompare: return "compare";
  }
  return "compare";
}

std::filesystem::path default_track_path() { return CIMPCC_DEFAULT_TRACK; }

void RunConfig::validate() const {
  if (track_path.empty()) throw ConfigurationError("track_path is empty");
  if (!std::filesystem::is_regular_file(track_path)) {
    throw ConfigurationError("track_path: no such file: " + track_path.string());
  }
  if (maf_window <= 0 || maf_window % 2 == 0) {
    throw ConfigurationError("track.maf_window must be a positive odd integer");
  }
  if (resample_spacing && !(*resample_spacing > 0.0)) {
    throw ConfigurationError("track.resample_spacing must be positive");
  }
  if (output_dir.empty()) throw ConfigurationError("output_dir is empty");
  race.validate();
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json doc = json::object();
  const bool blank = text.find_first_not_of(" \t\r\n") == std::string_view::npos;
  try {
    if (!blank) doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (doc.is_null()) doc = json::object();

  RunConfig cfg;
  cfg.track_path = default_track_path();
  auto& race = cfg.race;
  auto& pc = race.planner;

  Section root(doc, "");
  std::string track_path;
  std::string mode = "compare";
  std::string output_dir = cfg.output_dir.string();
  root.read("track_path", track_path);
  root.read("mode", mode);
  root.read("self_compare", cfg.self_compare);
  root.read("output_dir", output_dir);
  root.read("n_laps", race.n_laps);
  root.read("seed", race.seed);
  root.read("max_sim_time", race.max_sim_time);
  cfg.mode = parse_mode(mode);
  if (!track_path.empty()) cfg.track_path = track_path;
  cfg.output_dir = output_dir;
  if (cfg.track_path.is_relative() && !base_dir.empty()) cfg.track_path = base_dir / cfg.track_path;
  if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;

  if (auto s = root.section("track")) {
    s->read("maf_window", cfg.maf_window);
    s->read("resample_spacing", cfg.resample_spacing);
    s->reject_unknown();
  }
  if (auto s = root.section("horizon")) {
    auto& h = pc.horizon;
    s->read("n_p", h.n_p);
    s->read("n_c", h.n_c);
    s->read("t_s", h.t_s);
    s->read("state_lower", h.state_lower);
    s->read("state_upper", h.state_upper);
    s->read("input_lower", h.input_lower);
    s->read("input_upper", h.input_upper);
    s->read("boundary_margin", h.boundary_margin);
    s->reject_unknown();
  }
  if (auto s = root.section("weights")) {
    auto& w = pc.weights;
    s->read("q_con", w.q_con);
    s->read("q_lag", w.q_lag);
    s->read("gamma", w.gamma);
    s->read("r1", w.r1);
    s->read("r2", w.r2);
    s->read("r3", w.r3);
    s->read("u_ref", w.u_ref);
    s->read("slack_weight", w.slack_weight);
    s->read("anchor_delta_u", w.anchor_delta_u);
    s->reject_unknown();
  }
  if (auto s = root.section("mapping")) {
    s->read("alpha", pc.mapping.alpha);
    s->read("per_stage_beta", pc.per_stage_beta);
    s->reject_unknown();
  }
  if (auto s = root.section("velocity")) {
    auto v_bar = pair(pc.velocity.v_bar);
    auto v_under = pair(pc.velocity.v_under);
    s->read("v_bar", v_bar);
    s->read("v_under", v_under);
    pc.velocity.v_bar = {v_bar[0], v_bar[1]};
    pc.velocity.v_under = {v_under[0], v_under[1]};
    s->reject_unknown();
  }
  if (auto s = root.section("vehicle")) {
    s->read("wheelbase", pc.vehicle.wheelbase);
    s->reject_unknown();
  }
  if (auto s = root.section("solver")) {
    std::string hessian(hessian_name(pc.solver.hessian_strategy));
    s->read("kkt_tolerance", pc.solver.kkt_tolerance);
    s->read("max_iterations", pc.solver.max_iterations);
    s->read("max_wall_time", pc.solver.max_wall_time);
    s->read("hessian", hessian);
    pc.solver.hessian_strategy = parse_hessian(hessian);
    s->reject_unknown();
  }
  if (auto s = root.section("disturbance")) {
    s->read("v_l_std", race.v_l_noise_std);
    s->read("delta_std", race.delta_noise_std);
    s->reject_unknown();
  }
  root.reject_unknown();

  pc.mode = cfg.mode == RunMode::kMpcc ? PlannerMode::kMpcc : PlannerMode::kCiMpcc;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigurationError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

std::string to_json(const RunConfig& cfg) {
  const auto& race = cfg.race;
  const auto& pc = race.planner;
  const auto& h = pc.horizon;
  const auto& w = pc.weights;
  nlohmann::ordered_json j;
  j["track_path"] = std::filesystem::absolute(cfg.track_path).lexically_normal().string();
  j["mode"] = std::string(to_string(cfg.mode));
  j["self_compare"] = cfg.self_compare;
  j["output_dir"] = std::filesystem::absolute(cfg.output_dir).lexically_normal().string();
  j["n_laps"] = race.n_laps;
  j["seed"] = race.seed;
  j["max_sim_time"] = race.max_sim_time;
  j["track"] = {{"maf_window", cfg.maf_window},
                {"resample_spacing", cfg.resample_spacing ? json(*cfg.resample_spacing) : json()}};
  j["horizon"] = {{"n_p", h.n_p},
                  {"n_c", h.n_c},
                  {"t_s", h.t_s},
                  {"state_lower", h.state_lower},
                  {"state_upper", h.state_upper},
                  {"input_lower", h.input_lower},
                  {"input_upper", h.input_upper},
                  {"boundary_margin", h.boundary_margin}};
  j["weights"] = {{"q_con", w.q_con}, {"q_lag", w.q_lag}, {"gamma", w.gamma},
                  {"r1", w.r1},       {"r2", w.r2},       {"r3", w.r3},
                  {"u_ref", w.u_ref}, {"slack_weight", w.slack_weight},
                  {"anchor_delta_u", w.anchor_delta_u}};
  j["mapping"] = {{"alpha", pc.mapping.alpha}, {"per_stage_beta", pc.per_stage_beta}};
  j["velocity"] = {{"v_bar", pair(pc.velocity.v_bar)}, {"v_under", pair(pc.velocity.v_under)}};
  j["vehicle"] = {{"wheelbase", pc.vehicle.wheelbase}};
  j["solver"] = {{"kkt_tolerance", pc.solver.kkt_tolerance},
                 {"max_iterations", pc.solver.max_iterations},
                 {"max_wall_time", pc.solver.max_wall_time},
                 {"hessian", std::string(hessian_name(pc.solver.hessian_strategy))}};
  j["disturbance"] = {{"v_l_std", race.v_l_noise_std}, {"delta_std", race.delta_noise_std}};
  return j.dump(2) + "\n";
}

Track load_track(const RunConfig& config) {
  LoadOptions opts;
  opts.resample_spacing = config.resample_spacing;
  return Track::build(load_centerline_file(config.track_path, opts), config.maf_window);
}

}  // namespace cimpcc
