#pragma once

#include "cimpcc/errors.hpp"

namespace cimpcc {

struct MappingParams {
  double alpha{3.0};  // sensitivity, > 0
};

/// Overall velocity (body speed v_l, progress speed v_p), m/s.
struct OverallVelocity {
  double v_l{};
  double v_p{};
};

/// Aggressive (v_bar) and safe (v_under) overall velocities.
struct VelocityBounds {
  OverallVelocity v_bar{4.18, 3.8};
  OverallVelocity v_under{2.72, 2.47};

  /// Throws InvalidFactor unless 0 < v_under < v_bar componentwise.
  void validate() const;
};

/// Blending coefficient beta = exp(-alpha * nsc^2) in [exp(-alpha), 1].
///
/// nsc within 1e-9 outside [0, 1] is clamped; farther out throws DomainError.
/// Throws DomainError for alpha <= 0.
double map_nsc_to_beta(double nsc, const MappingParams& params);

/// Aggressive bound from the expert lap progress speed, body speed scaled by
/// body_factor; safe bound discounted componentwise.
VelocityBounds derive_velocity_bounds(double expert_vp, double body_factor, double discount);

}  // namespace cimpcc
