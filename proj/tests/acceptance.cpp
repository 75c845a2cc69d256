// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
// argv[1] is the path of the cimpcc CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cimpcc/planner.hpp"
#include "cimpcc/race_harness.hpp"
#include "cimpcc/run_config.hpp"
#include "cimpcc/track_fixtures.hpp"

using namespace cimpcc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string capture(const std::string& cmd, int* status) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    *status = -1;
    return out;
  }
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  *status = pclose(pipe);
  return out;
}

double median(std::vector<double> v) {
  return percentile(std::move(v), 50.0);
}

const Track& desk_track() {
  static const Track t = Track::build(load_centerline_file(default_track_path()));
  return t;
}

Outcome curvature_oracle() {
  double worst = 0.0;
  for (double r : {0.5, 1.0, 2.0, 5.0}) {
    for (double k : compute_raw_curvature(fixtures::circle(r, 200))) {
      worst = std::max(worst, std::abs(k * r - 1.0));
    }
  }
  return {worst <= 0.01, fmt("max relative error %.2e", worst)};
}

Outcome mapping_endpoints() {
  double worst = 0.0;
  for (double alpha : {0.5, 1.0, 3.0, 7.0}) {
    worst = std::max(worst, std::abs(map_nsc_to_beta(0.0, {alpha}) - 1.0));
    worst = std::max(worst, std::abs(map_nsc_to_beta(1.0, {alpha}) - std::exp(-alpha)));
  }
  return {worst <= 1e-15, fmt("max endpoint error %.1e", worst)};
}

Outcome integrator_order() {
  const VehicleParams car;
  const VehicleState x0{0.0, 0.0, 0.1, 0.0};
  const ControlInput u{1.5, 0.3, 1.4};
  auto integrate = [&](double dt) {
    VehicleState x = x0;
    const int n = static_cast<int>(std::lround(1.0 / dt));
    for (int i = 0; i < n; ++i) x = rk4_step(x, u, car, dt);
    return x;
  };
  const auto ref = integrate(0.1 / 1000.0);
  auto err = [&](double dt) {
    const auto x = integrate(dt);
    return std::hypot(x.x - ref.x, x.y - ref.y);
  };
  const double order = std::min(std::log2(err(0.2) / err(0.1)), std::log2(err(0.1) / err(0.05)));
  return {order >= 3.5, fmt("observed order %.3f", order)};
}

Outcome solver_fixtures() {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  double worst_kkt = 0.0, worst_err = 0.0;
  auto record = [&](const Solution& s, const VectorXd& expected) {
    worst_kkt = std::max(worst_kkt, s.status == SolverStatus::kConverged ? s.kkt_residual : 1.0);
    worst_err = std::max(worst_err, (s.point - expected).cwiseAbs().maxCoeff());
  };
  const VectorXd c = (VectorXd(3) << 1.0, -2.0, 0.5).finished();
  FunctionProblem quad(3, 3, [c](const VectorXd& z, VectorXd& r, MatrixXd* j) {
    r = z - c;
    if (j) j->setIdentity();
  });
  record(solve(quad, VectorXd::Zero(3)), c);

  FunctionProblem eq(
      2, 2,
      [](const VectorXd& z, VectorXd& r, MatrixXd* j) {
        r << z(0) - 2.0, z(1) - 3.0;
        if (j) j->setIdentity();
      },
      1,
      [](const VectorXd& z, VectorXd& r, MatrixXd* j) {
        r(0) = z(0) + z(1) - 1.0;
        if (j) *j << 1.0, 1.0;
      });
  record(solve(eq, VectorXd::Zero(2)), (VectorXd(2) << 0.0, 1.0).finished());

  FunctionProblem box(1, 1, [](const VectorXd& z, VectorXd& r, MatrixXd* j) {
    r(0) = z(0) - 5.0;
    if (j) (*j)(0, 0) = 1.0;
  });
  box.set_bounds(VectorXd::Zero(1), VectorXd::Ones(1));
  record(solve(box, VectorXd::Constant(1, 0.5)), VectorXd::Ones(1));
  return {worst_kkt <= 1e-6 && worst_err <= 1e-6,
          fmt("max kkt %.1e, max optimum error %.1e", worst_kkt, worst_err)};
}

Outcome objective_equivalence() {
  std::mt19937_64 rng(5);
  const Track& track = desk_track();
  std::uniform_real_distribution<double> s_dist(0.0, track.centerline.total_length());
  std::uniform_real_distribution<double> beta_dist(0.05, 1.0), vl(0.5, 4.5), dl(-0.3, 0.3),
      vp(0.5, 4.0), unit(0.0, 1.0);
  PlannerConfig cfg;
  const Planner planner(cfg, track);
  const auto w = effective_weights(cfg.mode, cfg.weights);
  const ControlInput previous{3.0, 0.05, 2.8};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto pose = track.reference.pose(s_dist(rng));
    const VehicleState x0{pose.x, pose.y, pose.heading, 0.0};
    const double beta = beta_dist(rng);
    const auto prob = planner.build_nlp(x0, beta, previous);
    HorizonPlan plan;
    plan.states.push_back(x0);
    for (int k = 0; k < cfg.horizon.n_c; ++k) plan.inputs.push_back({vl(rng), dl(rng), vp(rng)});
    for (int k = 0; k < cfg.horizon.n_p; ++k) {
      plan.states.push_back(rk4_step(plan.states.back(), plan.inputs[static_cast<std::size_t>(k)],
                                     cfg.vehicle, cfg.horizon.t_s));
      const auto idx = prob.sparsity().extra_offset(k);
      plan.slacks.push_back(prob.lower_bounds()(idx) +
                            unit(rng) * (prob.upper_bounds()(idx) - prob.lower_bounds()(idx)));
    }
    const double nlp = prob.objective(prob.pack(plan));
    const double sum = eval_j_mpcc(plan, w, cfg.horizon, track.reference, previous) +
                       eval_j_ci(plan, cfg.horizon, beta, cfg.velocity, w.r3) +
                       slack_penalty(plan, track.reference, w.slack_weight);
    worst = std::max(worst, std::abs(nlp - sum) / std::max(1.0, std::abs(sum)));
  }
  return {worst <= 1e-10, fmt("max relative error %.1e over 100 points", worst)};
}

// Shared by criteria 6 and 7.
const Comparison& desk_comparison() {
  static const Comparison c = [] {
    RaceConfig rc;
    rc.n_laps = 5;
    rc.seed = 0;
    return compare(desk_track(), rc);
  }();
  return c;
}

Outcome desk_surrogate() {
  const auto& r = desk_comparison().report;
  const double ratio = r.candidate.lap_time.mean / r.baseline.lap_time.mean;
  const bool pass = r.baseline.lap_times.size() == 5 && r.candidate.lap_times.size() == 5 &&
                    ratio <= 0.95 && r.candidate.velocity.mean > r.baseline.velocity.mean;
  return {pass, fmt("lap MPCC %.3f s vs CiMPCC %.3f s (ratio %.3f)", r.baseline.lap_time.mean,
                    r.candidate.lap_time.mean, ratio) +
                    fmt(", velocity %.3f vs %.3f m/s", r.baseline.velocity.mean,
                        r.candidate.velocity.mean)};
}

Outcome safety() {
  const Track& track = desk_track();
  const HorizonConfig h;
  std::size_t corridor = 0, bounds = 0, cycles = 0;
  double worst = 0.0;
  for (const auto* race : {&desk_comparison().baseline, &desk_comparison().candidate}) {
    for (const auto& c : race->records) {
      ++cycles;
      const auto p = project(track.centerline, c.state.x, c.state.y, c.state.progress);
      const auto& pt = track.centerline.point(p.index);
      if (c.xi_con > pt.half_width_right || -c.xi_con > pt.half_width_left) ++corridor;
      worst = std::max(worst, std::abs(c.xi_con));
      const auto u = c.command.vec();
      for (int i = 0; i < 3; ++i) {
        if (u(i) < h.input_lower[static_cast<std::size_t>(i)] ||
            u(i) > h.input_upper[static_cast<std::size_t>(i)]) {
          ++bounds;
        }
      }
    }
  }
  return {corridor == 0 && bounds == 0 && cycles > 0,
          fmt("%.0f corridor and %.0f bound violations in %.0f cycles, max |xi_con| %.3f m",
              static_cast<double>(corridor), static_cast<double>(bounds),
              static_cast<double>(cycles), worst)};
}

struct CliRun {
  int status{-1};
  fs::path dir;
};

CliRun cli_compare(const std::string& cli, const fs::path& root, const std::string& name) {
  CliRun run;
  run.dir = root / name;
  fs::create_directories(run.dir);
  std::ofstream(run.dir / "run.json") << R"({"mode": "compare", "n_laps": 5, "seed": 0, "output_dir": "out"})";
  capture("\"" + cli + "\" compare --config \"" + (run.dir / "run.json").string() + "\" 2>&1",
          &run.status);
  return run;
}

Outcome realtime(const std::string& cli, const CliRun& run) {
  if (run.status != 0) return {false, "cli compare failed"};
  double worst = 0.0;
  std::string shown;
  for (const char* side : {"baseline", "candidate"}) {
    int status = 0;
    const auto out = capture("\"" + cli + "\" report --paper-ref --telemetry \"" +
                                 (run.dir / "out" / side / "telemetry.csv").string() + "\" 2>&1",
                             &status);
    const auto pos = out.find("p95 ");
    if (status != 0 || pos == std::string::npos) return {false, "cli report failed: " + out};
    const double p95 = std::stod(out.substr(pos + 4));
    worst = std::max(worst, p95);
    shown += std::string(" ") + side + fmt(" %.4f s", p95);
  }
  return {worst < 0.05, "p95 solve time from cli report:" + shown};
}

Outcome warm_start() {
  const Track& track = desk_track();
  PlannerConfig cfg;
  const Planner planner(cfg, track);
  const double length = track.centerline.total_length();
  const auto start = track.reference.pose(0.0);
  VehicleState state{start.x, start.y, start.heading, 0.0};
  std::optional<HorizonPlan> warm;
  std::optional<ControlInput> previous;
  std::vector<double> warm_iters, cold_iters;
  double s_prev = 0.0;
  while (state.progress < length) {
    const double wrapped = track.centerline.wrap(s_prev);
    const double s_proj = project_continuous(track.centerline, state.x, state.y, wrapped);
    state.progress = s_prev + std::remainder(s_proj - wrapped, length);
    s_prev = state.progress;
    try {
      const auto cold = planner.solve(state, nullptr, previous);
      const auto next = planner.solve(state, warm ? &*warm : nullptr, previous);
      if (warm) {
        warm_iters.push_back(next.iterations);
        cold_iters.push_back(cold.iterations);
      }
      warm = next;
      previous = next.command();
    } catch (const Error& e) {
      return {false, std::string("solve failed: ") + e.what()};
    }
    state = plant_step(state, *previous, cfg.vehicle, cfg.horizon.t_s);
  }
  const double mw = median(warm_iters), mc = median(cold_iters);
  return {mw <= mc && !warm_iters.empty(),
          fmt("median iterations warm %.1f vs cold %.1f over %.0f cycles", mw, mc,
              static_cast<double>(warm_iters.size()))};
}

Outcome determinism(const CliRun& a, const CliRun& b) {
  if (a.status != 0 || b.status != 0) return {false, "cli compare failed"};
  const auto ja = read_file(a.dir / "out" / "comparison.json");
  const auto jb = read_file(b.dir / "out" / "comparison.json");
  return {!ja.empty() && ja == jb, fmt("comparison.json %.0f bytes, identical: ", ja.size()) +
                                       (ja == jb ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cimpcc-cli>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path root = fs::temp_directory_path() / "cimpcc_acceptance";
  fs::remove_all(root);

  std::optional<CliRun> run_a, run_b;
  auto cli_runs = [&] {
    if (!run_a) {
      run_a = cli_compare(cli, root, "a");
      run_b = cli_compare(cli, root, "b");
    }
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"curvature oracle on circles", curvature_oracle},
      {"mapping endpoints", mapping_endpoints},
      {"RK4 convergence order", integrator_order},
      {"NLP solver analytic fixtures", solver_fixtures},
      {"objective equivalence", objective_equivalence},
      {"desk track lap-time and velocity gain", desk_surrogate},
      {"corridor and bound safety", safety},
      {"real-time solve budget",
       [&] {
         cli_runs();
         return realtime(cli, *run_a);
       }},
      {"warm-start iterations", warm_start},
      {"comparison determinism",
       [&] {
         cli_runs();
         return determinism(*run_a, *run_b);
       }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s [%zu] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  fs::remove_all(root);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
