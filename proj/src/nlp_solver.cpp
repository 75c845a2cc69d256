#include "cimpcc/nlp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace cimpcc {

double NLPProblem::objective(const Eigen::VectorXd& z) const {
  Eigen::VectorXd r(num_residuals());
  residuals(z, r, nullptr);
  return r.squaredNorm() + linear_term().dot(z);
}

Eigen::VectorXd NLPProblem::gradient(const Eigen::VectorXd& z) const {
  Eigen::VectorXd r(num_residuals());
  Eigen::MatrixXd jr(num_residuals(), dimension());
  residuals(z, r, &jr);
  return 2.0 * jr.transpose() * r + linear_term();
}

FunctionProblem::FunctionProblem(Eigen::Index dimension, Eigen::Index n_residuals,
                                 Residuals residuals, Eigen::Index n_constraints,
                                 Residuals constraints)
    : n_(dimension),
      n_residuals_(n_residuals),
      n_constraints_(n_constraints),
      residuals_(std::move(residuals)),
      constraints_(std::move(constraints)),
      linear_(Eigen::VectorXd::Zero(dimension)),
      lb_(Eigen::VectorXd::Constant(dimension, -std::numeric_limits<double>::infinity())),
      ub_(Eigen::VectorXd::Constant(dimension, std::numeric_limits<double>::infinity())) {}

FunctionProblem& FunctionProblem::set_linear_term(Eigen::VectorXd g) {
  if (g.size() != n_) throw DimensionMismatch("linear term size");
  linear_ = std::move(g);
  return *this;
}

FunctionProblem& FunctionProblem::set_bounds(Eigen::VectorXd lb, Eigen::VectorXd ub) {
  if (lb.size() != n_ || ub.size() != n_) throw DimensionMismatch("bounds size");
  lb_ = std::move(lb);
  ub_ = std::move(ub);
  return *this;
}

void FunctionProblem::residuals(const Eigen::VectorXd& z, Eigen::VectorXd& r,
                                Eigen::MatrixXd* jac) const {
  r.resize(n_residuals_);
  if (jac) jac->setZero(n_residuals_, n_);
  residuals_(z, r, jac);
}

void FunctionProblem::constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c,
                                  Eigen::MatrixXd* jac) const {
  c.resize(n_constraints_);
  if (jac) jac->setZero(n_constraints_, n_);
  if (n_constraints_ > 0) constraints_(z, c, jac);
}

void SolverSettings::validate() const {
  if (!(kkt_tolerance > 0.0) || max_iterations <= 0 || !(max_wall_time > 0.0) ||
      !(levenberg >= 0.0)) {
    throw ConfigurationError("solver tolerance and budgets must be positive");
  }
}

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged:
      return "converged";
    case SolverStatus::kIterationLimit:
      return "iteration_limit";
    case SolverStatus::kTimeLimit:
      return "time_limit";
    case SolverStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double bound_tolerance(double bound) { return 1e-10 * std::max(1.0, std::abs(bound)); }

// Classifies each variable as free (0), at its lower bound (-1) or at its
// upper bound (+1).
std::vector<int> bound_activity(const Eigen::VectorXd& z, const Eigen::VectorXd& lb,
                                const Eigen::VectorXd& ub) {
  std::vector<int> act(static_cast<std::size_t>(z.size()), 0);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::isfinite(lb(i)) && z(i) <= lb(i) + bound_tolerance(lb(i))) {
      act[static_cast<std::size_t>(i)] = -1;
    } else if (std::isfinite(ub(i)) && z(i) >= ub(i) - bound_tolerance(ub(i))) {
      act[static_cast<std::size_t>(i)] = 1;
    }
  }
  return act;
}

KktResidual kkt_from_parts(const Eigen::VectorXd& grad, const Eigen::MatrixXd& jc,
                           const Eigen::VectorXd& c, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
  const auto act = bound_activity(z, lb, ub);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (act[static_cast<std::size_t>(i)] == 0) free.push_back(i);
  }

  KktResidual out;
  out.multipliers = Eigen::VectorXd::Zero(c.size());
  if (c.size() > 0 && !free.empty()) {
    const Eigen::MatrixXd jft = jc(Eigen::all, free).transpose();
    const Eigen::VectorXd gf = grad(free);
    out.multipliers = jft.colPivHouseholderQr().solve(gf);
  }
  const Eigen::VectorXd rl = grad - jc.transpose() * out.multipliers;

  double stat = 0.0;
  double viol = c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const int a = act[static_cast<std::size_t>(i)];
    double comp = std::abs(rl(i));
    if (a == -1) comp = std::max(0.0, -rl(i));
    if (a == 1) comp = std::max(0.0, rl(i));
    stat = std::max(stat, comp);
    viol = std::max({viol, lb(i) - z(i), z(i) - ub(i)});
  }
  // Scaled by the objective gradient so the tolerance is dimensionless.
  out.stationarity = stat / std::max(1.0, grad.cwiseAbs().maxCoeff());
  out.violation = std::max(viol, 0.0);
  return out;
}

struct Evaluation {
  Eigen::VectorXd r;
  Eigen::MatrixXd jr;
  Eigen::VectorXd c;
  Eigen::MatrixXd jc;
  Eigen::VectorXd grad;
  double objective{};
};

void evaluate(const NLPProblem& p, const Eigen::VectorXd& z, Evaluation& e) {
  p.residuals(z, e.r, &e.jr);
  p.constraints(z, e.c, &e.jc);
  e.grad = 2.0 * e.jr.transpose() * e.r + p.linear_term();
  e.objective = e.r.squaredNorm() + p.linear_term().dot(z);
}

double merit(const NLPProblem& p, const Eigen::VectorXd& z, double rho, double* objective) {
  Eigen::VectorXd r(p.num_residuals());
  Eigen::VectorXd c(p.num_constraints());
  p.residuals(z, r, nullptr);
  p.constraints(z, c, nullptr);
  const double f = r.squaredNorm() + p.linear_term().dot(z);
  if (objective) *objective = f;
  return f + rho * c.lpNorm<1>();
}

// Finite-difference Hessian of the Lagrangian from analytic gradients,
// shifted along the diagonal until it is positive definite.
Eigen::MatrixXd regularized_exact_hessian(const NLPProblem& p, const Eigen::VectorXd& z,
                                          const Eigen::VectorXd& lambda,
                                          const Evaluation& base) {
  const Eigen::Index n = z.size();
  auto lagrangian_grad = [&](const Eigen::VectorXd& x, Evaluation& e) {
    evaluate(p, x, e);
    return Eigen::VectorXd(e.grad - e.jc.transpose() * lambda);
  };
  const Eigen::VectorXd g0 = base.grad - base.jc.transpose() * lambda;
  Eigen::MatrixXd h(n, n);
  Evaluation e;
  Eigen::VectorXd x = z;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double step = 1e-7 * std::max(1.0, std::abs(z(j)));
    x(j) = z(j) + step;
    h.col(j) = (lagrangian_grad(x, e) - g0) / step;
    x(j) = z(j);
  }
  Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  double shift = 0.0;
  const double scale = std::max(1.0, sym.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 30; ++attempt) {
    Eigen::MatrixXd trial = sym;
    trial.diagonal().array() += shift;
    if (Eigen::LLT<Eigen::MatrixXd>(trial).info() == Eigen::Success) return trial;
    shift = shift == 0.0 ? 1e-8 * scale : shift * 10.0;
  }
  return base.jr.transpose() * base.jr * 2.0;
}

}  // namespace

QpResult solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, const Eigen::MatrixXd& a,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
  const Eigen::Index n = g.size();
  const Eigen::Index m = b.size();
  std::vector<int> act(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lo(i) >= hi(i)) act[static_cast<std::size_t>(i)] = -1;
  }
  const double mu_tol = 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff());

  QpResult out;
  out.step = Eigen::VectorXd::Zero(n);
  out.multipliers = Eigen::VectorXd::Zero(m);

  constexpr int kMaxActiveSetIterations = 40;
  for (int it = 0; it < kMaxActiveSetIterations; ++it) {
    std::vector<Eigen::Index> free, fixed;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int s = act[static_cast<std::size_t>(i)];
      if (s == 0) {
        free.push_back(i);
      } else {
        fixed.push_back(i);
        d(i) = s < 0 ? lo(i) : hi(i);
      }
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nf + m, nf + m);
    Eigen::VectorXd rhs(nf + m);
    const Eigen::VectorXd d_fixed = d(fixed);
    k.topLeftCorner(nf, nf) = h(free, free);
    k.topRightCorner(nf, m) = a(Eigen::all, free).transpose();
    k.bottomLeftCorner(m, nf) = a(Eigen::all, free);
    rhs.head(nf) = -g(free) - h(free, fixed) * d_fixed;
    rhs.tail(m) = b - a(Eigen::all, fixed) * d_fixed;

    Eigen::VectorXd sol = k.partialPivLu().solve(rhs);
    if (!sol.allFinite()) {
      const double reg = 1e-10 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
      k.topLeftCorner(nf, nf).diagonal().array() += reg;
      k.bottomRightCorner(m, m).diagonal().array() -= reg;
      sol = k.fullPivLu().solve(rhs);
    }
    d(free) = sol.head(nf);
    const Eigen::VectorXd lambda = -sol.tail(m);
    const Eigen::VectorXd mu = h * d + g - a.transpose() * lambda;

    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& s = act[static_cast<std::size_t>(i)];
      if (lo(i) >= hi(i)) continue;
      if (s == 0) {
        if (d(i) < lo(i) - bound_tolerance(lo(i))) {
          s = -1;
          changed = true;
        } else if (d(i) > hi(i) + bound_tolerance(hi(i))) {
          s = 1;
          changed = true;
        }
      } else if ((s < 0 && mu(i) < -mu_tol) || (s > 0 && mu(i) > mu_tol)) {
        s = 0;
        changed = true;
      }
    }
    out.step = d;
    out.multipliers = lambda;
    if (!changed) {
      out.settled = true;
      return out;
    }
  }
  out.step = out.step.cwiseMax(lo).cwiseMin(hi);
  return out;
}

KktResidual kkt_residual(const NLPProblem& problem, const Eigen::VectorXd& candidate) {
  if (candidate.size() != problem.dimension()) {
    throw DimensionMismatch("candidate has " + std::to_string(candidate.size()) +
                            " entries, problem has " + std::to_string(problem.dimension()));
  }
  Evaluation e;
  evaluate(problem, candidate, e);
  return kkt_from_parts(e.grad, e.jc, e.c, candidate, problem.lower_bounds(),
                        problem.upper_bounds());
}

Solution solve(const NLPProblem& problem, const Eigen::VectorXd& guess,
               const SolverSettings& settings) {
  settings.validate();
  const auto start = Clock::now();
  const Eigen::Index n = problem.dimension();
  if (guess.size() != n) {
    throw DimensionMismatch("guess has " + std::to_string(guess.size()) +
                            " entries, problem has " + std::to_string(n));
  }
  const Eigen::VectorXd& lb = problem.lower_bounds();
  const Eigen::VectorXd& ub = problem.upper_bounds();

  Solution sol;
  Eigen::VectorXd z = guess.cwiseMax(lb).cwiseMin(ub);
  double rho = 1.0;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(problem.num_constraints());
  Evaluation e;

  auto finish = [&](SolverStatus status, const KktResidual& kkt) {
    sol.point = z;
    sol.objective_value = e.objective;
    sol.kkt_residual = kkt.stationarity;
    sol.constraint_violation = kkt.violation;
    sol.multipliers = kkt.multipliers;
    sol.status = status;
    sol.wall_time = seconds_since(start);
    return sol;
  };

  for (int iter = 0;; ++iter) {
    evaluate(problem, z, e);
    if (!e.r.allFinite() || !e.c.allFinite() || !e.jr.allFinite() || !e.jc.allFinite()) {
      return finish(SolverStatus::kNumericalFailure,
                    {std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), lambda});
    }
    const KktResidual kkt = kkt_from_parts(e.grad, e.jc, e.c, z, lb, ub);
    if (iter == 0) lambda = kkt.multipliers;
    if (kkt.stationarity <= settings.kkt_tolerance && kkt.violation <= settings.kkt_tolerance) {
      return finish(SolverStatus::kConverged, kkt);
    }
    if (iter >= settings.max_iterations) return finish(SolverStatus::kIterationLimit, kkt);
    if (seconds_since(start) >= settings.max_wall_time) {
      return finish(SolverStatus::kTimeLimit, kkt);
    }

    Eigen::MatrixXd h;
    if (settings.hessian_strategy == HessianStrategy::kExactDiagonalRegularized) {
      h = regularized_exact_hessian(problem, z, lambda, e);
    } else {
      h = 2.0 * e.jr.transpose() * e.jr;
    }
    h.diagonal().array() += settings.levenberg;

    const QpResult qp = solve_box_qp(h, e.grad, e.jc, -e.c, lb - z, ub - z);
    const Eigen::VectorXd& d = qp.step;
    if (!d.allFinite()) return finish(SolverStatus::kNumericalFailure, kkt);
    lambda = qp.multipliers;

    const double lambda_norm = lambda.size() > 0 ? lambda.cwiseAbs().maxCoeff() : 0.0;
    if (rho < 1.1 * lambda_norm) rho = 1.5 * lambda_norm + 1.0;

    const double c_norm = e.c.lpNorm<1>();
    const double phi0 = e.objective + rho * c_norm;
    // Directional derivative of the l1 merit along a step that satisfies the
    // linearized constraints.
    const double slope = e.grad.dot(d) - rho * c_norm;

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double phi = phi0;
    const double roundoff = 1e-13 * std::max(1.0, std::abs(phi0));
    while (alpha >= 1e-10) {
      trial = (z + alpha * d).cwiseMax(lb).cwiseMin(ub);
      phi = merit(problem, trial, rho, nullptr);
      if (std::isfinite(phi) && phi <= phi0 + 1e-4 * alpha * std::min(slope, 0.0) + roundoff) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return finish(SolverStatus::kNumericalFailure, kkt);
    z = trial;
    sol.merit_steps.push_back({phi0, phi});
    sol.iterations = iter + 1;
  }
}

}  // namespace cimpcc
