#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cimpcc/nlp_solver.hpp"
#include "cimpcc/track.hpp"
#include "cimpcc/vehicle_model.hpp"
#include "cimpcc/velocity_map.hpp"

namespace cimpcc {

enum class PlannerMode { kMpcc, kCiMpcc };

std::string_view to_string(PlannerMode mode);

struct PlannerWeights {
  double q_con{800.0};
  double q_lag{800.0};
  double gamma{40.0};
  std::array<double, 3> r1{10.0, 3500.0, 0.0};
  std::array<double, 3> r2{40.0, 10.0, 40.0};
  std::array<double, 2> r3{40.0, 40.0};
  std::array<double, 3> u_ref{3.3, 0.0, 3.0};
  double slack_weight{1e4};
  /// Penalize the first input against the last applied command as well.
  bool anchor_delta_u{true};

  void validate() const;
};

/// Weights as the objective uses them: CiMPCC drops the velocity entries of
/// R2 because J_Ci takes over velocity tracking.
PlannerWeights effective_weights(PlannerMode mode, const PlannerWeights& weights);

struct HorizonConfig {
  int n_p{10};
  int n_c{10};
  double t_s{0.05};
  std::array<double, 4> state_lower{-1e9, -1e9, -1e9, -1e9};
  std::array<double, 4> state_upper{1e9, 1e9, 1e9, 1e9};
  std::array<double, 3> input_lower{-10.0, -0.35, -10.0};
  std::array<double, 3> input_upper{10.0, 0.35, 10.0};
  double boundary_margin{0.15};

  void validate() const;
  /// Input applied over stage k (move blocking beyond the control horizon).
  int input_index(int stage) const { return stage < n_c ? stage : n_c - 1; }
};

struct StageError {
  double con{};
  double lag{};
};

/// Signed contour and lag errors against a reference pose.
StageError contour_lag_errors(const VehicleState& state, const ReferencePose& ref);
StageError contour_lag_errors(const VehicleState& state, const ReferencePath& path);

struct HorizonPlan {
  std::vector<VehicleState> states;  // n_p + 1, stage 0 is the current state
  std::vector<ControlInput> inputs;  // n_c
  std::vector<double> slacks;        // n_p, corridor slack per stage 1..n_p
  std::vector<StageError> errors;    // n_p + 1
  double beta{1.0};
  double objective_value{};
  double solve_time{};
  int iterations{};
  double kkt_residual{};
  double constraint_violation{};
  SolverStatus status{SolverStatus::kNumericalFailure};

  const ControlInput& command() const { return inputs.front(); }
};

/// MPCC objective from per-stage errors (stages 1..n_p) and the control
/// horizon inputs. previous anchors the first input difference when given and
/// weights.anchor_delta_u is set. Throws DimensionMismatch.
double mpcc_cost(std::span<const StageError> errors, std::span<const ControlInput> inputs,
                 const PlannerWeights& weights, const HorizonConfig& cfg,
                 std::optional<ControlInput> previous = std::nullopt);

/// MPCC objective of a plan, with errors recomputed from its states.
double eval_j_mpcc(const HorizonPlan& plan, const PlannerWeights& weights, const HorizonConfig& cfg,
                   const ReferencePath& path, std::optional<ControlInput> previous = std::nullopt);

/// Curvature-integrated velocity objective over n_p stages of held inputs.
double eval_j_ci(std::span<const ControlInput> inputs, int n_p, double beta,
                 const VelocityBounds& bounds, const std::array<double, 2>& r3);
double eval_j_ci(const HorizonPlan& plan, const HorizonConfig& cfg, double beta,
                 const VelocityBounds& bounds, const std::array<double, 2>& r3);

/// Quadratic penalty on the lateral error escaping its corridor slack.
double slack_penalty(const HorizonPlan& plan, const ReferencePath& path, double weight);

struct PlannerConfig {
  PlannerMode mode{PlannerMode::kCiMpcc};
  HorizonConfig horizon;
  PlannerWeights weights;
  MappingParams mapping;
  VelocityBounds velocity;
  VehicleParams vehicle;
  SolverSettings solver;
  /// Experimental: evaluate beta at each stage's guessed progress instead of
  /// once at the current projection.
  bool per_stage_beta{false};

  void validate() const;
};

/// Multiple-shooting transcription of one receding-horizon problem.
///
/// Decision vector: n_p + 1 states, n_c inputs, n_p corridor slacks. Each
/// slack is bounded to the corridor and the residual (xi_con - slack) carries
/// the soft-constraint penalty, which equals a quadratic penalty on corridor
/// violation at the optimum. Equality rows: initial condition, then one
/// shooting defect per stage.
class MpccProblem final : public NLPProblem {
 public:
  MpccProblem(const PlannerConfig& config, const Track& track, const VehicleState& current,
              std::vector<double> stage_beta, std::vector<double> guess_progress,
              std::optional<ControlInput> previous);

  Eigen::Index dimension() const override { return blocks_.size(); }
  Eigen::Index num_residuals() const override { return n_residuals_; }
  Eigen::Index num_constraints() const override { return 4 * (cfg_.horizon.n_p + 1); }
  void residuals(const Eigen::VectorXd& z, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const override;
  void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c, Eigen::MatrixXd* jac) const override;
  const Eigen::VectorXd& linear_term() const override { return linear_; }
  const Eigen::VectorXd& lower_bounds() const override { return lb_; }
  const Eigen::VectorXd& upper_bounds() const override { return ub_; }
  StageBlocks sparsity() const override { return blocks_; }

  PlannerMode mode() const { return cfg_.mode; }
  const PlannerWeights& weights() const { return weights_; }

  Eigen::VectorXd pack(const HorizonPlan& plan) const;
  /// States, inputs and slacks of a decision vector; diagnostics are filled
  /// from the reference path.
  HorizonPlan unpack(const Eigen::VectorXd& z) const;

 private:
  PlannerConfig cfg_;
  PlannerWeights weights_;
  const Track* track_;
  VehicleState current_;
  std::vector<double> beta_;
  std::optional<ControlInput> previous_;
  StageBlocks blocks_;
  Eigen::Index n_residuals_{};
  Eigen::VectorXd linear_;
  Eigen::VectorXd lb_;
  Eigen::VectorXd ub_;
};

/// Thrown by Planner::solve_step when the solver result is not usable; the
/// rejected plan is kept for telemetry.
class PlanRejected : public SolverFailure {
 public:
  PlanRejected(const std::string& what, HorizonPlan plan)
      : SolverFailure(what), plan_(std::move(plan)) {}
  const HorizonPlan& plan() const { return plan_; }

 private:
  HorizonPlan plan_;
};

class Planner {
 public:
  Planner(PlannerConfig config, const Track& track);

  const PlannerConfig& config() const { return config_; }
  const Track& track() const { return *track_; }

  /// Beta from the NSC at the centerline point nearest to (x, y).
  double beta_at(const VehicleState& state, std::optional<double> s_hint = std::nullopt) const;

  /// Signed lateral offset of the state from the centerline (xi_con at its
  /// continuous projection) and the projected arc length.
  StageError lateral_error(const VehicleState& state, double* s_proj = nullptr) const;

  /// Builds the NLP without solving it.
  MpccProblem build_nlp(const VehicleState& current, double beta,
                        std::optional<ControlInput> previous = std::nullopt) const;

  /// One receding-horizon solve. With a warm plan the guess is that plan
  /// shifted by one stage; otherwise a rollout along the centerline at the
  /// safe velocity. Throws OffTrack or PlanRejected.
  HorizonPlan solve(const VehicleState& current, const HorizonPlan* warm,
                    std::optional<ControlInput> previous) const;

  /// Stateful variant: warm-starts from and anchors to the previous call.
  HorizonPlan solve_step(const VehicleState& current);
  void reset();

  HorizonPlan cold_start_guess(const VehicleState& current) const;
  HorizonPlan shifted_guess(const VehicleState& current, const HorizonPlan& previous) const;

 private:
  PlannerConfig config_;
  const Track* track_;
  std::optional<HorizonPlan> last_plan_;
  std::optional<ControlInput> last_command_;
};

}  // namespace cimpcc
