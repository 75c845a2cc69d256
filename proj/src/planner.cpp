#include "cimpcc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cimpcc {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigurationError(what);
}

bool all_nonnegative(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0 && std::isfinite(x); });
}

double input_component(const ControlInput& u, int j) {
  return j == 0 ? u.v_l : (j == 1 ? u.delta : u.v_p);
}

}  // namespace

std::string_view to_string(PlannerMode mode) {
  return mode == PlannerMode::kMpcc ? "mpcc" : "cimpcc";
}

void PlannerWeights::validate() const {
  require(q_con >= 0.0 && q_lag >= 0.0 && gamma >= 0.0 && slack_weight >= 0.0,
          "weights must be non-negative");
  require(all_nonnegative(r1) && all_nonnegative(r2) && all_nonnegative(r3),
          "weights must be non-negative");
}

PlannerWeights effective_weights(PlannerMode mode, const PlannerWeights& weights) {
  PlannerWeights w = weights;
  if (mode == PlannerMode::kCiMpcc) {
    w.r2[0] = 0.0;
    w.r2[2] = 0.0;
  }
  return w;
}

void HorizonConfig::validate() const {
  require(n_p >= 1 && n_c >= 1, "horizons must be positive");
  require(n_c <= n_p, "control horizon must not exceed prediction horizon");
  require(t_s > 0.0 && std::isfinite(t_s), "stage duration must be positive");
  require(boundary_margin >= 0.0, "boundary margin must be non-negative");
  for (std::size_t i = 0; i < 4; ++i) {
    require(state_lower[i] < state_upper[i], "state bounds must satisfy lower < upper");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    require(input_lower[i] < input_upper[i], "input bounds must satisfy lower < upper");
  }
}

void PlannerConfig::validate() const {
  horizon.validate();
  weights.validate();
  velocity.validate();
  solver.validate();
  require(mapping.alpha > 0.0, "alpha must be positive");
  require(vehicle.wheelbase > 0.0, "wheelbase must be positive");
}

StageError contour_lag_errors(const VehicleState& state, const ReferencePose& ref) {
  const double dx = state.x - ref.x;
  const double dy = state.y - ref.y;
  const double s = std::sin(ref.heading);
  const double c = std::cos(ref.heading);
  return {s * dx - c * dy, -c * dx - s * dy};
}

StageError contour_lag_errors(const VehicleState& state, const ReferencePath& path) {
  return contour_lag_errors(state, path.pose(state.progress));
}

double mpcc_cost(std::span<const StageError> errors, std::span<const ControlInput> inputs,
                 const PlannerWeights& weights, const HorizonConfig& cfg,
                 std::optional<ControlInput> previous) {
  if (errors.size() != static_cast<std::size_t>(cfg.n_p) ||
      inputs.size() != static_cast<std::size_t>(cfg.n_c)) {
    throw DimensionMismatch("expected " + std::to_string(cfg.n_p) + " stage errors and " +
                            std::to_string(cfg.n_c) + " inputs");
  }
  double cost = 0.0;
  for (int k = 0; k < cfg.n_p; ++k) {
    const auto& e = errors[static_cast<std::size_t>(k)];
    cost += weights.q_con * e.con * e.con + weights.q_lag * e.lag * e.lag;
    cost -= weights.gamma * inputs[static_cast<std::size_t>(cfg.input_index(k))].v_p * cfg.t_s;
  }
  auto delta_cost = [&](const ControlInput& a, const ControlInput& b) {
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double d = input_component(a, j) - input_component(b, j);
      sum += weights.r1[static_cast<std::size_t>(j)] * d * d;
    }
    return sum;
  };
  if (weights.anchor_delta_u && previous) cost += delta_cost(inputs[0], *previous);
  for (std::size_t k = 1; k < inputs.size(); ++k) cost += delta_cost(inputs[k], inputs[k - 1]);
  for (const auto& u : inputs) {
    for (int j = 0; j < 3; ++j) {
      const double d = input_component(u, j) - weights.u_ref[static_cast<std::size_t>(j)];
      cost += weights.r2[static_cast<std::size_t>(j)] * d * d;
    }
  }
  return cost;
}

double eval_j_mpcc(const HorizonPlan& plan, const PlannerWeights& weights, const HorizonConfig& cfg,
                   const ReferencePath& path, std::optional<ControlInput> previous) {
  if (plan.states.size() != static_cast<std::size_t>(cfg.n_p + 1)) {
    throw DimensionMismatch("plan has " + std::to_string(plan.states.size()) + " states, expected " +
                            std::to_string(cfg.n_p + 1));
  }
  std::vector<StageError> errors;
  errors.reserve(static_cast<std::size_t>(cfg.n_p));
  for (int k = 1; k <= cfg.n_p; ++k) {
    errors.push_back(contour_lag_errors(plan.states[static_cast<std::size_t>(k)], path));
  }
  return mpcc_cost(errors, plan.inputs, weights, cfg, previous);
}

double eval_j_ci(std::span<const ControlInput> inputs, int n_p, double beta,
                 const VelocityBounds& bounds, const std::array<double, 2>& r3) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (inputs.empty() || n_p < 1) throw DimensionMismatch("empty horizon");
  double cost = 0.0;
  for (int k = 0; k < n_p; ++k) {
    const auto& u = inputs[std::min<std::size_t>(static_cast<std::size_t>(k), inputs.size() - 1)];
    const double sl = u.v_l - bounds.v_under.v_l;
    const double sp = u.v_p - bounds.v_under.v_p;
    const double al = u.v_l - bounds.v_bar.v_l;
    const double ap = u.v_p - bounds.v_bar.v_p;
    cost += (1.0 - beta) * (r3[0] * sl * sl + r3[1] * sp * sp) +
            beta * (r3[0] * al * al + r3[1] * ap * ap);
  }
  return cost;
}

double eval_j_ci(const HorizonPlan& plan, const HorizonConfig& cfg, double beta,
                 const VelocityBounds& bounds, const std::array<double, 2>& r3) {
  if (plan.inputs.size() != static_cast<std::size_t>(cfg.n_c)) {
    throw DimensionMismatch("plan has " + std::to_string(plan.inputs.size()) + " inputs, expected " +
                            std::to_string(cfg.n_c));
  }
  return eval_j_ci(plan.inputs, cfg.n_p, beta, bounds, r3);
}

double slack_penalty(const HorizonPlan& plan, const ReferencePath& path, double weight) {
  if (plan.slacks.size() + 1 != plan.states.size()) {
    throw DimensionMismatch("one slack per predicted stage expected");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < plan.slacks.size(); ++k) {
    const double d = contour_lag_errors(plan.states[k + 1], path).con - plan.slacks[k];
    sum += weight * d * d;
  }
  return sum;
}

// ---------------------------------------------------------------------------

MpccProblem::MpccProblem(const PlannerConfig& config, const Track& track,
                         const VehicleState& current, std::vector<double> stage_beta,
                         std::vector<double> guess_progress, std::optional<ControlInput> previous)
    : cfg_(config),
      weights_(effective_weights(config.mode, config.weights)),
      track_(&track),
      current_(current),
      beta_(std::move(stage_beta)),
      previous_(previous) {
  const auto& h = cfg_.horizon;
  h.validate();
  if (!current.vec().allFinite()) throw ConfigurationError("current state is not finite");
  if (beta_.size() != static_cast<std::size_t>(h.n_p) ||
      guess_progress.size() != static_cast<std::size_t>(h.n_p + 1)) {
    throw ConfigurationError("stage beta / progress guesses do not match the horizon");
  }
  if (!weights_.anchor_delta_u) previous_.reset();

  blocks_ = {h.n_p + 1, 4, h.n_c, 3, h.n_p};
  n_residuals_ = 3 * h.n_p + (previous_ ? 3 : 0) + 3 * (h.n_c - 1) + 3 * h.n_c +
                 (cfg_.mode == PlannerMode::kCiMpcc ? 4 * h.n_p : 0);

  const Eigen::Index n = blocks_.size();
  linear_ = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < h.n_p; ++k) {
    linear_(blocks_.input_offset(h.input_index(k)) + 2) -= weights_.gamma * h.t_s;
  }

  lb_.resize(n);
  ub_.resize(n);
  const double s_lo = current.progress - 1.0;
  const double s_hi = current.progress + std::max(h.input_upper[2], 0.0) * h.t_s * h.n_p + 1.0;
  for (Eigen::Index k = 0; k <= h.n_p; ++k) {
    const Eigen::Index o = blocks_.state_offset(k);
    for (Eigen::Index j = 0; j < 4; ++j) {
      lb_(o + j) = h.state_lower[static_cast<std::size_t>(j)];
      ub_(o + j) = h.state_upper[static_cast<std::size_t>(j)];
    }
    lb_(o + 3) = std::max(lb_(o + 3), s_lo);
    ub_(o + 3) = std::min(ub_(o + 3), s_hi);
  }
  for (Eigen::Index k = 0; k < h.n_c; ++k) {
    const Eigen::Index o = blocks_.input_offset(k);
    for (Eigen::Index j = 0; j < 3; ++j) {
      lb_(o + j) = h.input_lower[static_cast<std::size_t>(j)];
      ub_(o + j) = h.input_upper[static_cast<std::size_t>(j)];
    }
  }
  for (Eigen::Index k = 0; k < h.n_p; ++k) {
    const auto sample = sample_at_s(track.centerline, track.curvature,
                                    guess_progress[static_cast<std::size_t>(k + 1)]);
    lb_(blocks_.extra_offset(k)) = -std::max(sample.half_width_left - h.boundary_margin, 0.0);
    ub_(blocks_.extra_offset(k)) = std::max(sample.half_width_right - h.boundary_margin, 0.0);
  }
}

void MpccProblem::residuals(const Eigen::VectorXd& z, Eigen::VectorXd& r,
                            Eigen::MatrixXd* jac) const {
  const auto& h = cfg_.horizon;
  const auto& w = weights_;
  r.resize(n_residuals_);
  if (jac) jac->setZero(n_residuals_, blocks_.size());

  Eigen::Index row = 0;
  const double sq_con = std::sqrt(w.q_con);
  const double sq_lag = std::sqrt(w.q_lag);
  const double sq_slack = std::sqrt(w.slack_weight);
  for (Eigen::Index k = 1; k <= h.n_p; ++k) {
    const Eigen::Index o = blocks_.state_offset(k);
    const Eigen::Index slack = blocks_.extra_offset(k - 1);
    const auto ref = track_->reference.pose(z(o + 3));
    const double dx = z(o) - ref.x;
    const double dy = z(o + 1) - ref.y;
    const double sn = std::sin(ref.heading);
    const double cs = std::cos(ref.heading);
    const double con = sn * dx - cs * dy;
    const double lag = -cs * dx - sn * dy;
    r(row) = sq_con * con;
    r(row + 1) = sq_lag * lag;
    r(row + 2) = sq_slack * (con - z(slack));
    if (jac) {
      const double t = ref.dheading_ds;
      const double dcon_ds = t * (cs * dx + sn * dy) - sn * ref.dx_ds + cs * ref.dy_ds;
      const double dlag_ds = t * (sn * dx - cs * dy) + cs * ref.dx_ds + sn * ref.dy_ds;
      auto& j = *jac;
      j(row, o) = sq_con * sn;
      j(row, o + 1) = -sq_con * cs;
      j(row, o + 3) = sq_con * dcon_ds;
      j(row + 1, o) = -sq_lag * cs;
      j(row + 1, o + 1) = -sq_lag * sn;
      j(row + 1, o + 3) = sq_lag * dlag_ds;
      j(row + 2, o) = sq_slack * sn;
      j(row + 2, o + 1) = -sq_slack * cs;
      j(row + 2, o + 3) = sq_slack * dcon_ds;
      j(row + 2, slack) = -sq_slack;
    }
    row += 3;
  }

  auto delta_rows = [&](Eigen::Index a, std::optional<Eigen::Index> b, const Eigen::Vector3d& fixed) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double sw = std::sqrt(w.r1[static_cast<std::size_t>(j)]);
      const double other = b ? z(*b + j) : fixed(j);
      r(row) = sw * (z(a + j) - other);
      if (jac) {
        (*jac)(row, a + j) = sw;
        if (b) (*jac)(row, *b + j) = -sw;
      }
      ++row;
    }
  };
  if (previous_) delta_rows(blocks_.input_offset(0), std::nullopt, previous_->vec());
  for (Eigen::Index k = 1; k < h.n_c; ++k) {
    delta_rows(blocks_.input_offset(k), blocks_.input_offset(k - 1), Eigen::Vector3d::Zero());
  }

  for (Eigen::Index k = 0; k < h.n_c; ++k) {
    const Eigen::Index o = blocks_.input_offset(k);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double sw = std::sqrt(w.r2[static_cast<std::size_t>(j)]);
      r(row) = sw * (z(o + j) - w.u_ref[static_cast<std::size_t>(j)]);
      if (jac) (*jac)(row, o + j) = sw;
      ++row;
    }
  }

  if (cfg_.mode == PlannerMode::kCiMpcc) {
    const auto& vb = cfg_.velocity;
    for (int k = 0; k < h.n_p; ++k) {
      const double beta = beta_[static_cast<std::size_t>(k)];
      const Eigen::Index o = blocks_.input_offset(h.input_index(k));
      // (component offset in u, safe target, aggressive target, R3 weight)
      const std::array<std::array<double, 4>, 2> channels{{
          {0.0, vb.v_under.v_l, vb.v_bar.v_l, w.r3[0]},
          {2.0, vb.v_under.v_p, vb.v_bar.v_p, w.r3[1]},
      }};
      for (const auto& ch : channels) {
        const Eigen::Index col = o + static_cast<Eigen::Index>(ch[0]);
        const double s_safe = std::sqrt((1.0 - beta) * ch[3]);
        const double s_aggr = std::sqrt(beta * ch[3]);
        r(row) = s_safe * (z(col) - ch[1]);
        r(row + 1) = s_aggr * (z(col) - ch[2]);
        if (jac) {
          (*jac)(row, col) = s_safe;
          (*jac)(row + 1, col) = s_aggr;
        }
        row += 2;
      }
    }
  }
}

void MpccProblem::constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c,
                              Eigen::MatrixXd* jac) const {
  const auto& h = cfg_.horizon;
  c.resize(num_constraints());
  if (jac) jac->setZero(num_constraints(), blocks_.size());

  c.head<4>() = z.segment<4>(0) - current_.vec();
  if (jac) jac->block<4, 4>(0, 0).setIdentity();

  for (Eigen::Index k = 0; k < h.n_p; ++k) {
    const Eigen::Index xo = blocks_.state_offset(k);
    const Eigen::Index xn = blocks_.state_offset(k + 1);
    const Eigen::Index uo = blocks_.input_offset(h.input_index(static_cast<int>(k)));
    const Eigen::Index row = 4 * (k + 1);
    if (jac) {
      const auto step =
          rk4_linearized(z.segment<4>(xo), z.segment<3>(uo), cfg_.vehicle, h.t_s);
      c.segment<4>(row) = z.segment<4>(xn) - step.next;
      jac->block<4, 4>(row, xn).setIdentity();
      jac->block<4, 4>(row, xo) = -step.d_state;
      jac->block<4, 3>(row, uo) -= step.d_input;
    } else {
      c.segment<4>(row) =
          z.segment<4>(xn) - rk4_raw(z.segment<4>(xo), z.segment<3>(uo), cfg_.vehicle, h.t_s);
    }
  }
}

Eigen::VectorXd MpccProblem::pack(const HorizonPlan& plan) const {
  const auto& h = cfg_.horizon;
  if (plan.states.size() != static_cast<std::size_t>(h.n_p + 1) ||
      plan.inputs.size() != static_cast<std::size_t>(h.n_c) ||
      plan.slacks.size() != static_cast<std::size_t>(h.n_p)) {
    throw DimensionMismatch("plan does not match the horizon");
  }
  Eigen::VectorXd z(blocks_.size());
  for (Eigen::Index k = 0; k <= h.n_p; ++k) {
    z.segment<4>(blocks_.state_offset(k)) = plan.states[static_cast<std::size_t>(k)].vec();
  }
  for (Eigen::Index k = 0; k < h.n_c; ++k) {
    z.segment<3>(blocks_.input_offset(k)) = plan.inputs[static_cast<std::size_t>(k)].vec();
  }
  for (Eigen::Index k = 0; k < h.n_p; ++k) {
    z(blocks_.extra_offset(k)) = plan.slacks[static_cast<std::size_t>(k)];
  }
  return z;
}

HorizonPlan MpccProblem::unpack(const Eigen::VectorXd& z) const {
  const auto& h = cfg_.horizon;
  HorizonPlan plan;
  for (Eigen::Index k = 0; k <= h.n_p; ++k) {
    auto s = VehicleState::from_vec(z.segment<4>(blocks_.state_offset(k)));
    s.heading = normalize_angle(s.heading);
    plan.states.push_back(s);
    plan.errors.push_back(contour_lag_errors(s, track_->reference));
  }
  for (Eigen::Index k = 0; k < h.n_c; ++k) {
    plan.inputs.push_back(ControlInput::from_vec(z.segment<3>(blocks_.input_offset(k))));
  }
  for (Eigen::Index k = 0; k < h.n_p; ++k) plan.slacks.push_back(z(blocks_.extra_offset(k)));
  plan.beta = beta_.front();
  return plan;
}

// ---------------------------------------------------------------------------

Planner::Planner(PlannerConfig config, const Track& track)
    : config_(std::move(config)), track_(&track) {
  config_.validate();
}

double Planner::beta_at(const VehicleState& state, std::optional<double> s_hint) const {
  const auto p = project(track_->centerline, state.x, state.y, s_hint);
  return map_nsc_to_beta(track_->curvature.normalized[p.index], config_.mapping);
}

StageError Planner::lateral_error(const VehicleState& state, double* s_proj) const {
  const double s = project_continuous(track_->centerline, state.x, state.y, state.progress);
  if (s_proj) *s_proj = s;
  return contour_lag_errors(state, track_->reference.pose(s));
}

MpccProblem Planner::build_nlp(const VehicleState& current, double beta,
                               std::optional<ControlInput> previous) const {
  const auto guess = cold_start_guess(current);
  std::vector<double> progress;
  for (const auto& s : guess.states) progress.push_back(s.progress);
  return MpccProblem(config_, *track_, current,
                     std::vector<double>(static_cast<std::size_t>(config_.horizon.n_p), beta),
                     std::move(progress), previous);
}

HorizonPlan Planner::cold_start_guess(const VehicleState& current) const {
  const auto& h = config_.horizon;
  const auto& safe = config_.velocity.v_under;
  HorizonPlan guess;
  guess.states.push_back(current);
  double heading = current.heading;
  for (int k = 1; k <= h.n_p; ++k) {
    const double s = current.progress + k * h.t_s * safe.v_p;
    const auto ref = track_->reference.pose(s);
    heading += normalize_angle(ref.heading - heading);
    guess.states.push_back({ref.x, ref.y, heading, s});
  }
  guess.inputs.assign(static_cast<std::size_t>(h.n_c), ControlInput{safe.v_l, 0.0, safe.v_p});
  guess.slacks.assign(static_cast<std::size_t>(h.n_p), 0.0);
  return guess;
}

HorizonPlan Planner::shifted_guess(const VehicleState& current, const HorizonPlan& previous) const {
  const auto& h = config_.horizon;
  if (previous.states.size() != static_cast<std::size_t>(h.n_p + 1) ||
      previous.inputs.size() != static_cast<std::size_t>(h.n_c) ||
      previous.slacks.size() != static_cast<std::size_t>(h.n_p)) {
    throw DimensionMismatch("warm-start plan does not match the horizon");
  }
  auto shift = [](const auto& v) {
    auto out = v;
    std::rotate(out.begin(), out.begin() + 1, out.end());
    out.back() = v.back();
    return out;
  };
  HorizonPlan guess;
  guess.states = shift(previous.states);
  guess.inputs = shift(previous.inputs);
  guess.slacks = shift(previous.slacks);
  guess.states.front() = current;
  for (std::size_t k = 1; k < guess.states.size(); ++k) {
    const double prev = guess.states[k - 1].heading;
    guess.states[k].heading = prev + normalize_angle(guess.states[k].heading - prev);
  }
  return guess;
}

HorizonPlan Planner::solve(const VehicleState& current, const HorizonPlan* warm,
                           std::optional<ControlInput> previous) const {
  const auto& h = config_.horizon;

  double s_proj = 0.0;
  const StageError lateral = lateral_error(current, &s_proj);
  const auto here = sample_at_s(track_->centerline, track_->curvature, s_proj);
  if (lateral.con < -(here.half_width_left + h.boundary_margin) ||
      lateral.con > here.half_width_right + h.boundary_margin) {
    throw OffTrack("vehicle is " + std::to_string(std::abs(lateral.con)) +
                   " m from the centerline at s = " + std::to_string(s_proj));
  }

  const double beta = beta_at(current, current.progress);
  const HorizonPlan guess = warm ? shifted_guess(current, *warm) : cold_start_guess(current);

  std::vector<double> progress;
  for (const auto& s : guess.states) progress.push_back(s.progress);
  std::vector<double> stage_beta(static_cast<std::size_t>(h.n_p), beta);
  if (config_.per_stage_beta) {
    for (int k = 0; k < h.n_p; ++k) {
      const auto sample = sample_at_s(track_->centerline, track_->curvature,
                                      progress[static_cast<std::size_t>(k)]);
      stage_beta[static_cast<std::size_t>(k)] = map_nsc_to_beta(sample.nsc, config_.mapping);
    }
  }

  const MpccProblem problem(config_, *track_, current, stage_beta, progress, previous);
  const Solution sol = cimpcc::solve(problem, problem.pack(guess), config_.solver);

  HorizonPlan plan = problem.unpack(sol.point);
  for (auto& u : plan.inputs) {
    u.v_l = std::clamp(u.v_l, h.input_lower[0], h.input_upper[0]);
    u.delta = std::clamp(u.delta, h.input_lower[1], h.input_upper[1]);
    u.v_p = std::clamp(u.v_p, h.input_lower[2], h.input_upper[2]);
  }
  plan.beta = beta;
  plan.objective_value = sol.objective_value;
  plan.solve_time = sol.wall_time;
  plan.iterations = sol.iterations;
  plan.kkt_residual = sol.kkt_residual;
  plan.constraint_violation = sol.constraint_violation;
  plan.status = sol.status;

  const bool usable = sol.status == SolverStatus::kConverged ||
                      (sol.status == SolverStatus::kTimeLimit && sol.constraint_violation <= 1e-3);
  if (!usable) {
    throw PlanRejected("solver returned " + std::string(to_string(sol.status)) + " after " +
                           std::to_string(sol.iterations) + " iterations",
                       std::move(plan));
  }
  return plan;
}

HorizonPlan Planner::solve_step(const VehicleState& current) {
  HorizonPlan plan = solve(current, last_plan_ ? &*last_plan_ : nullptr, last_command_);
  last_plan_ = plan;
  last_command_ = plan.command();
  return plan;
}

void Planner::reset() {
  last_plan_.reset();
  last_command_.reset();
}

}  // namespace cimpcc
