#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

#include "cimpcc/errors.hpp"

namespace cimpcc {

/// Pose of the rear-axle center plus progress along the centerline.
struct VehicleState {
  double x{};
  double y{};
  double heading{};
  double progress{};

  Eigen::Vector4d vec() const { return {x, y, heading, progress}; }
  static VehicleState from_vec(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }
};

struct ControlInput {
  double v_l{};    // body velocity, m/s
  double delta{};  // steering angle, rad
  double v_p{};    // progress velocity, m/s

  Eigen::Vector3d vec() const { return {v_l, delta, v_p}; }
  static ControlInput from_vec(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

struct VehicleParams {
  double wheelbase{0.324};
};

using StateRate = Eigen::Vector4d;

/// Augmented kinematic bicycle model. Throws SteeringSingularity for
/// |delta| >= pi/2.
StateRate dynamics(const VehicleState& state, const ControlInput& input,
                   const VehicleParams& params);

/// Wraps into (-pi, pi].
double normalize_angle(double a);

/// One classical RK4 step with the input held over dt. The returned heading is
/// normalized.
VehicleState rk4_step(const VehicleState& state, const ControlInput& input,
                      const VehicleParams& params, double dt);

/// RK4 step on raw vectors together with its Jacobians. The heading is left
/// unwrapped so shooting defects stay continuous.
struct LinearizedStep {
  Eigen::Vector4d next;
  Eigen::Matrix4d d_state;
  Eigen::Matrix<double, 4, 3> d_input;
};
LinearizedStep rk4_linearized(const Eigen::Vector4d& state, const Eigen::Vector3d& input,
                              const VehicleParams& params, double dt);
Eigen::Vector4d rk4_raw(const Eigen::Vector4d& state, const Eigen::Vector3d& input,
                        const VehicleParams& params, double dt);

/// Zero-mean Gaussian actuation noise; a zero standard deviation disables the
/// channel entirely. Each simulation owns its own stream.
class Disturbance {
 public:
  Disturbance(double v_l_std, double delta_std, std::uint64_t seed)
      : v_l_std_(v_l_std), delta_std_(delta_std), rng_(seed) {}

  ControlInput perturb(const ControlInput& input);
  bool active() const { return v_l_std_ > 0.0 || delta_std_ > 0.0; }

 private:
  double v_l_std_;
  double delta_std_;
  std::mt19937_64 rng_;
};

inline constexpr int kPlantSubsteps = 10;

/// Simulated vehicle: RK4 at dt / kPlantSubsteps with optional input noise.
VehicleState plant_step(const VehicleState& state, const ControlInput& input,
                        const VehicleParams& params, double dt,
                        Disturbance* disturbance = nullptr);

}  // namespace cimpcc
