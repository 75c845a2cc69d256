#pragma once

#include <vector>

#include "cimpcc/track_model.hpp"

namespace cimpcc {

/// Reference pose on the path together with its derivatives in s.
struct ReferencePose {
  double x{};
  double y{};
  double heading{};
  double dx_ds{};
  double dy_ds{};
  double dheading_ds{};
};

/// Periodic cubic spline through the centerline points, parameterized by the
/// centerline arc-length table. Position is C2 and heading C1 in s, which keeps
/// the contouring residuals differentiable for the NLP.
class ReferencePath {
 public:
  explicit ReferencePath(const Centerline& cl);

  /// s is wrapped modulo total_length().
  ReferencePose pose(double s) const;
  double total_length() const { return total_length_; }

 private:
  struct Axis {
    std::vector<double> value;
    std::vector<double> second;  // spline second derivatives at the knots
  };

  static Axis fit(const std::vector<double>& knots, double period, std::vector<double> values);

  std::vector<double> knots_;
  double total_length_{};
  Axis x_;
  Axis y_;
};

}  // namespace cimpcc
