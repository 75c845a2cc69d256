#include "cimpcc/track_fixtures.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cimpcc::fixtures {
namespace {

struct Pose {
  double x{};
  double y{};
  double heading{};
};

Pose advance(const Pose& p, double length, double curvature) {
  if (std::abs(curvature) < 1e-12) {
    return {p.x + length * std::cos(p.heading), p.y + length * std::sin(p.heading), p.heading};
  }
  const double h1 = p.heading + curvature * length;
  return {p.x + (std::sin(h1) - std::sin(p.heading)) / curvature,
          p.y - (std::cos(h1) - std::cos(p.heading)) / curvature, h1};
}

}  // namespace

Centerline build_circuit(const std::vector<Piece>& pieces, double half_width, double spacing) {
  double total = 0.0;
  for (const auto& piece : pieces) total += piece.length;
  if (!(spacing > 0.0) || total <= 0.0) throw DegenerateTrack("empty circuit");

  Pose end;
  for (const auto& piece : pieces) end = advance(end, piece.length, piece.curvature);
  const double gap = std::hypot(end.x, end.y);
  if (gap > 1e-6 || std::abs(std::remainder(end.heading, 2.0 * std::numbers::pi)) > 1e-6) {
    throw DegenerateTrack("circuit does not close (gap " + std::to_string(gap) + " m)");
  }

  const auto n = static_cast<std::size_t>(std::max(8.0, std::round(total / spacing)));
  const double step = total / static_cast<double>(n);
  std::vector<TrackPoint> points;
  points.reserve(n);
  Pose start;
  double piece_start = 0.0;
  std::size_t current = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) * step;
    while (current + 1 < pieces.size() && s >= piece_start + pieces[current].length) {
      start = advance(start, pieces[current].length, pieces[current].curvature);
      piece_start += pieces[current].length;
      ++current;
    }
    const Pose p = advance(start, s - piece_start, pieces[current].curvature);
    points.push_back({p.x, p.y, half_width, half_width});
  }
  return Centerline::from_points(std::move(points));
}

Centerline circle(double radius, std::size_t n, double half_width) {
  std::vector<TrackPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    points.push_back({radius * std::cos(t), radius * std::sin(t), half_width, half_width});
  }
  return Centerline::from_points(std::move(points));
}

Centerline stadium(double straight, double radius, double half_width, double spacing) {
  const double u = std::numbers::pi * radius;
  return build_circuit({{straight, 0.0}, {u, 1.0 / radius}, {straight, 0.0}, {u, 1.0 / radius}},
                       half_width, spacing);
}

Centerline stadium_chicane(double spacing) {
  constexpr double kCorner = 1.2;
  constexpr double kChicane = 4.0;
  constexpr double kLong = 13.75;
  constexpr double kShort = 5.0;
  const double quarter = std::numbers::pi / 2.0 * kCorner;
  const double a = std::numbers::pi / 6.0;
  // The chicane (left a, right 2a, left a) has no net lateral offset and spans
  // 4 R sin(a) along the back straight.
  const double lead = (kLong - 4.0 * kChicane * std::sin(a)) / 2.0;
  const double k = 1.0 / kChicane;
  return build_circuit(
      {
          {kLong, 0.0},
          {quarter, 1.0 / kCorner},
          {kShort, 0.0},
          {quarter, 1.0 / kCorner},
          {lead, 0.0},
          {kChicane * a, k},
          {kChicane * 2.0 * a, -k},
          {kChicane * a, k},
          {lead, 0.0},
          {quarter, 1.0 / kCorner},
          {kShort, 0.0},
          {quarter, 1.0 / kCorner},
      },
      0.75, spacing);
}

}  // namespace cimpcc::fixtures
