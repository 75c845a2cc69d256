#pragma once

#include <Eigen/Core>
#include <functional>
#include <string_view>
#include <vector>

#include "cimpcc/errors.hpp"

namespace cimpcc {

/// Block layout of a multiple-shooting decision vector:
/// [states 0..n_states-1 | inputs 0..n_inputs-1 | extra scalars].
struct StageBlocks {
  Eigen::Index n_states{};
  Eigen::Index state_dim{};
  Eigen::Index n_inputs{};
  Eigen::Index input_dim{};
  Eigen::Index n_extra{};

  Eigen::Index state_offset(Eigen::Index k) const { return k * state_dim; }
  Eigen::Index input_offset(Eigen::Index k) const { return n_states * state_dim + k * input_dim; }
  Eigen::Index extra_offset(Eigen::Index k) const {
    return n_states * state_dim + n_inputs * input_dim + k;
  }
  Eigen::Index size() const { return n_states * state_dim + n_inputs * input_dim + n_extra; }
};

/// Nonlinear program
///
///   min  ||r(z)||^2 + g^T z   s.t.  c(z) = 0,  lb <= z <= ub
///
/// The sum-of-squares objective carries a natural Gauss-Newton Hessian
/// 2 J_r^T J_r; g is a constant linear term.
class NLPProblem {
 public:
  virtual ~NLPProblem() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Eigen::Index num_residuals() const = 0;
  virtual Eigen::Index num_constraints() const = 0;

  /// Fills r and, when jac is non-null, its dense Jacobian.
  virtual void residuals(const Eigen::VectorXd& z, Eigen::VectorXd& r,
                         Eigen::MatrixXd* jac) const = 0;
  virtual void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c,
                           Eigen::MatrixXd* jac) const = 0;

  virtual const Eigen::VectorXd& linear_term() const = 0;
  virtual const Eigen::VectorXd& lower_bounds() const = 0;
  virtual const Eigen::VectorXd& upper_bounds() const = 0;

  /// Stage structure of the decision vector, when it has one.
  virtual StageBlocks sparsity() const { return {0, 0, 0, 0, dimension()}; }

  double objective(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
};

/// Problem assembled from callables; handy for small analytic programs.
class FunctionProblem final : public NLPProblem {
 public:
  using Residuals = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)>;

  FunctionProblem(Eigen::Index dimension, Eigen::Index n_residuals, Residuals residuals,
                  Eigen::Index n_constraints = 0, Residuals constraints = {});

  FunctionProblem& set_linear_term(Eigen::VectorXd g);
  FunctionProblem& set_bounds(Eigen::VectorXd lb, Eigen::VectorXd ub);

  Eigen::Index dimension() const override { return n_; }
  Eigen::Index num_residuals() const override { return n_residuals_; }
  Eigen::Index num_constraints() const override { return n_constraints_; }
  void residuals(const Eigen::VectorXd& z, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const override;
  void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c, Eigen::MatrixXd* jac) const override;
  const Eigen::VectorXd& linear_term() const override { return linear_; }
  const Eigen::VectorXd& lower_bounds() const override { return lb_; }
  const Eigen::VectorXd& upper_bounds() const override { return ub_; }

 private:
  Eigen::Index n_;
  Eigen::Index n_residuals_;
  Eigen::Index n_constraints_;
  Residuals residuals_;
  Residuals constraints_;
  Eigen::VectorXd linear_;
  Eigen::VectorXd lb_;
  Eigen::VectorXd ub_;
};

enum class HessianStrategy { kGaussNewton, kExactDiagonalRegularized };

struct SolverSettings {
  double kkt_tolerance{1e-6};
  int max_iterations{100};
  double max_wall_time{0.05};  // seconds
  HessianStrategy hessian_strategy{HessianStrategy::kGaussNewton};
  double levenberg{1e-8};

  void validate() const;
};

enum class SolverStatus { kConverged, kIterationLimit, kTimeLimit, kNumericalFailure };

std::string_view to_string(SolverStatus status);

struct Solution {
  Eigen::VectorXd point;
  Eigen::VectorXd multipliers;  // equality multipliers, L = f - lambda^T c
  double objective_value{};
  double kkt_residual{};
  double constraint_violation{};
  int iterations{};
  double wall_time{};
  SolverStatus status{SolverStatus::kNumericalFailure};
  /// l1 merit before and after every accepted step (same penalty weight).
  struct MeritStep {
    double before;
    double after;
  };
  std::vector<MeritStep> merit_steps;
};

struct KktResidual {
  double stationarity{};
  double violation{};
  Eigen::VectorXd multipliers;
};

/// Projected Lagrangian gradient (least-squares multipliers over the free
/// variables, max-norm scaled by max(1, |grad f|_inf)) and max-norm
/// infeasibility at a candidate point.
KktResidual kkt_residual(const NLPProblem& problem, const Eigen::VectorXd& candidate);

/// SQP with a Gauss-Newton model, bounds enforced on the step through an
/// active-set QP, and an l1 exact-penalty line search.
/// Throws DimensionMismatch for a wrongly sized guess.
Solution solve(const NLPProblem& problem, const Eigen::VectorXd& guess,
               const SolverSettings& settings = {});

/// Box- and equality-constrained convex QP used for the SQP step:
///   min 1/2 d^T H d + g^T d  s.t.  A d = b,  lo <= d <= hi.
/// Returns false when the active-set iteration did not settle; the step is
/// then clipped to the box.
struct QpResult {
  Eigen::VectorXd step;
  Eigen::VectorXd multipliers;
  bool settled{};
};
QpResult solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, const Eigen::MatrixXd& a,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi);

}  // namespace cimpcc
