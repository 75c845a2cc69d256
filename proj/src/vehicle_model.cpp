#include "cimpcc/vehicle_model.hpp"

#include <cmath>
#include <numbers>

namespace cimpcc {
namespace {

void check_steering(double delta) {
  if (!(std::abs(delta) < 0.5 * std::numbers::pi)) {
    throw SteeringSingularity("steering angle must satisfy |delta| < pi/2");
  }
}

Eigen::Vector4d rate(const Eigen::Vector4d& x, const Eigen::Vector3d& u, double wheelbase) {
  return {std::cos(x(2)) * u(0), std::sin(x(2)) * u(0), std::tan(u(1)) / wheelbase * u(0), u(2)};
}

// Jacobians of rate() with respect to state and input.
void rate_jacobians(const Eigen::Vector4d& x, const Eigen::Vector3d& u, double wheelbase,
                    Eigen::Matrix4d& a, Eigen::Matrix<double, 4, 3>& b) {
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const double cd = std::cos(u(1));
  a.setZero();
  a(0, 2) = -s * u(0);
  a(1, 2) = c * u(0);
  b.setZero();
  b(0, 0) = c;
  b(1, 0) = s;
  b(2, 0) = std::tan(u(1)) / wheelbase;
  b(2, 1) = u(0) / (wheelbase * cd * cd);
  b(3, 2) = 1.0;
}

}  // namespace

StateRate dynamics(const VehicleState& state, const ControlInput& input,
                   const VehicleParams& params) {
  check_steering(input.delta);
  return rate(state.vec(), input.vec(), params.wheelbase);
}

double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

Eigen::Vector4d rk4_raw(const Eigen::Vector4d& x, const Eigen::Vector3d& u,
                        const VehicleParams& params, double dt) {
  check_steering(u(1));
  const double l = params.wheelbase;
  const Eigen::Vector4d k1 = rate(x, u, l);
  const Eigen::Vector4d k2 = rate(x + 0.5 * dt * k1, u, l);
  const Eigen::Vector4d k3 = rate(x + 0.5 * dt * k2, u, l);
  const Eigen::Vector4d k4 = rate(x + dt * k3, u, l);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VehicleState rk4_step(const VehicleState& state, const ControlInput& input,
                      const VehicleParams& params, double dt) {
  auto next = VehicleState::from_vec(rk4_raw(state.vec(), input.vec(), params, dt));
  next.heading = normalize_angle(next.heading);
  return next;
}

LinearizedStep rk4_linearized(const Eigen::Vector4d& x, const Eigen::Vector3d& u,
                              const VehicleParams& params, double dt) {
  check_steering(u(1));
  const double l = params.wheelbase;
  Eigen::Matrix4d a;
  Eigen::Matrix<double, 4, 3> b;

  const Eigen::Vector4d k1 = rate(x, u, l);
  rate_jacobians(x, u, l, a, b);
  const Eigen::Matrix4d k1x = a;
  const Eigen::Matrix<double, 4, 3> k1u = b;

  const Eigen::Vector4d x2 = x + 0.5 * dt * k1;
  const Eigen::Vector4d k2 = rate(x2, u, l);
  rate_jacobians(x2, u, l, a, b);
  const Eigen::Matrix4d k2x = a * (Eigen::Matrix4d::Identity() + 0.5 * dt * k1x);
  const Eigen::Matrix<double, 4, 3> k2u = a * (0.5 * dt * k1u) + b;

  const Eigen::Vector4d x3 = x + 0.5 * dt * k2;
  const Eigen::Vector4d k3 = rate(x3, u, l);
  rate_jacobians(x3, u, l, a, b);
  const Eigen::Matrix4d k3x = a * (Eigen::Matrix4d::Identity() + 0.5 * dt * k2x);
  const Eigen::Matrix<double, 4, 3> k3u = a * (0.5 * dt * k2u) + b;

  const Eigen::Vector4d x4 = x + dt * k3;
  const Eigen::Vector4d k4 = rate(x4, u, l);
  rate_jacobians(x4, u, l, a, b);
  const Eigen::Matrix4d k4x = a * (Eigen::Matrix4d::Identity() + dt * k3x);
  const Eigen::Matrix<double, 4, 3> k4u = a * (dt * k3u) + b;

  LinearizedStep out;
  out.next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.d_state = Eigen::Matrix4d::Identity() + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.d_input = dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  return out;
}

ControlInput Disturbance::perturb(const ControlInput& input) {
  ControlInput out = input;
  if (v_l_std_ > 0.0) out.v_l += std::normal_distribution<double>(0.0, v_l_std_)(rng_);
  if (delta_std_ > 0.0) out.delta += std::normal_distribution<double>(0.0, delta_std_)(rng_);
  return out;
}

VehicleState plant_step(const VehicleState& state, const ControlInput& input,
                        const VehicleParams& params, double dt, Disturbance* disturbance) {
  const ControlInput applied =
      (disturbance != nullptr && disturbance->active()) ? disturbance->perturb(input) : input;
  const double h = dt / kPlantSubsteps;
  Eigen::Vector4d x = state.vec();
  const Eigen::Vector3d u = applied.vec();
  for (int i = 0; i < kPlantSubsteps; ++i) x = rk4_raw(x, u, params, h);
  auto next = VehicleState::from_vec(x);
  next.heading = normalize_angle(next.heading);
  return next;
}

}  // namespace cimpcc
