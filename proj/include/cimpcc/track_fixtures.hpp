#pragma once

#include <vector>

#include "cimpcc/track_model.hpp"

namespace cimpcc::fixtures {

/// Piece of a closed circuit: a straight (curvature 0) or a constant-radius
/// arc, positive curvature turning left.
struct Piece {
  double length{};
  double curvature{};
};

/// Samples a piecewise circuit starting at the origin heading along +x, at
/// n = round(total / spacing) uniformly spaced arc lengths. Throws
/// DegenerateTrack when the pieces do not close.
Centerline build_circuit(const std::vector<Piece>& pieces, double half_width, double spacing);

/// Circle of radius r through n uniformly spaced points.
Centerline circle(double radius, std::size_t n, double half_width = 0.5);

/// Two straights joined by semicircular U-turns.
Centerline stadium(double straight, double radius, double half_width = 0.75,
                   double spacing = 0.1);

/// Desk-scale default circuit (about 45 m): a rounded rectangle with four
/// sharp 90 degree corners and a gentle chicane on the back straight.
Centerline stadium_chicane(double spacing = 0.1);

}  // namespace cimpcc::fixtures
