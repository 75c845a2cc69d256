#include "cimpcc/velocity_map.hpp"

#include <cmath>
#include <string>

namespace cimpcc {

void VelocityBounds::validate() const {
  auto ok = [](double lo, double hi) { return lo > 0.0 && lo < hi && std::isfinite(hi); };
  if (!ok(v_under.v_l, v_bar.v_l) || !ok(v_under.v_p, v_bar.v_p)) {
    throw InvalidFactor("velocity bounds must satisfy 0 < v_under < v_bar componentwise");
  }
}

double map_nsc_to_beta(double nsc, const MappingParams& params) {
  constexpr double kTol = 1e-9;
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) {
    throw DomainError("alpha must be positive");
  }
  if (!(nsc >= -kTol && nsc <= 1.0 + kTol)) {
    throw DomainError("nsc " + std::to_string(nsc) + " outside [0, 1]");
  }
  const double n = std::fmin(std::fmax(nsc, 0.0), 1.0);
  return std::exp(-params.alpha * n * n);
}

VelocityBounds derive_velocity_bounds(double expert_vp, double body_factor, double discount) {
  if (!(expert_vp > 0.0) || !std::isfinite(expert_vp)) {
    throw InvalidFactor("expert progress velocity must be positive");
  }
  if (!(body_factor >= 1.0) || !std::isfinite(body_factor)) {
    throw InvalidFactor("body factor must be >= 1");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw InvalidFactor("discount must lie in (0, 1)");
  }
  VelocityBounds b;
  b.v_bar = {expert_vp * body_factor, expert_vp};
  b.v_under = {b.v_bar.v_l * discount, b.v_bar.v_p * discount};
  return b;
}

}  // namespace cimpcc
