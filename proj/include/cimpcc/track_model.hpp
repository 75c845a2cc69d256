#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cimpcc/errors.hpp"

namespace cimpcc {

struct Point2 {
  double x{};
  double y{};
};

/// One row of a track file: a centerline point and its distances to the
/// left and right boundaries (meters, both strictly positive).
struct TrackPoint {
  double x{};
  double y{};
  double half_width_left{};
  double half_width_right{};
};

/// Closed racetrack centerline with its cumulative arc-length table.
///
/// Immutable after construction. arc_lengths()[i] is the distance from point
/// 0 to point i along the polyline; total_length() also includes the closing
/// segment from the last point back to point 0.
class Centerline {
 public:
  static constexpr std::size_t kMinPoints = 8;
  static constexpr double kMinSegment = 1e-9;

  /// Validates and builds. Throws DegenerateTrack.
  static Centerline from_points(std::vector<TrackPoint> points);

  std::size_t size() const { return points_.size(); }
  const std::vector<TrackPoint>& points() const { return points_; }
  const TrackPoint& point(std::size_t i) const { return points_[i]; }
  const std::vector<double>& arc_lengths() const { return arc_lengths_; }
  double total_length() const { return total_length_; }
  bool closed() const { return true; }

  /// Wraps s into [0, total_length).
  double wrap(double s) const;
  /// Index i of the segment (i, i+1 mod N) containing the wrapped s.
  std::size_t segment_index(double s) const;
  /// Length of segment (i, i+1 mod N).
  double segment_length(std::size_t i) const;

 private:
  Centerline() = default;

  std::vector<TrackPoint> points_;
  std::vector<double> arc_lengths_;
  double total_length_{};
};

struct LoadOptions {
  /// When set, the polyline is resampled to uniform spacing close to this
  /// value (meters) before anything else uses it.
  std::optional<double> resample_spacing;
};

/// Parses track CSV content. Throws ParseError or DegenerateTrack.
Centerline load_centerline(std::string_view content, const LoadOptions& options = {});
Centerline load_centerline_file(const std::filesystem::path& path,
                                const LoadOptions& options = {});

/// Uniform arc-length resampling of a closed centerline. Half-widths are
/// linearly interpolated.
Centerline resample(const Centerline& cl, double spacing);

/// Serializes to the track CSV format.
std::string to_csv(const Centerline& cl);

struct CurvatureProfile {
  std::vector<double> raw;
  std::vector<double> smoothed;
  std::vector<double> normalized;
  int window{1};
  double k_min{};
  double k_max{};
};

enum class Boundary { kClosed, kOpen };

/// Discrete curvature from backward first and second differences. On an open
/// polyline the first two entries have no history and are reported as 0.
/// Throws NumericalDegeneracy when a difference vector is (nearly) zero.
std::vector<double> raw_curvature(std::span<const Point2> points,
                                  Boundary boundary = Boundary::kClosed);
std::vector<double> compute_raw_curvature(const Centerline& cl);

/// Centered moving average with circular wrap. Throws InvalidWindow unless w
/// is odd and 1 <= w <= raw.size().
std::vector<double> smooth_curvature(std::span<const double> raw, int w);

/// Min-max normalization into [0, 1]. A constant sequence maps to all zeros.
std::vector<double> normalize_curvature(std::span<const double> smoothed);

constexpr int kDefaultMafWindow = 9;
constexpr double kDefaultResampleSpacing = 0.1;

CurvatureProfile make_curvature_profile(const Centerline& cl, int window = kDefaultMafWindow);

struct PoseSample {
  double x{};
  double y{};
  double heading{};  // (-pi, pi]
  double nsc{};
  double s{};
  double half_width_left{};
  double half_width_right{};
};

/// Linear view of the centerline at arc length s (wrapped first). The heading
/// is the direction of the bracketing segment.
PoseSample sample_at_s(const Centerline& cl, const CurvatureProfile& profile, double s);

struct Projection {
  double s{};
  std::size_t index{};
};

constexpr std::size_t kProjectionWindow = 20;

/// Nearest centerline point to (x, y). With a hint, only +-window points
/// around the hinted index are scanned, falling back to a full scan when the
/// windowed minimum lies on the window edge. Ties go to the lowest index.
Projection project(const Centerline& cl, double x, double y,
                   std::optional<double> s_hint = std::nullopt,
                   std::size_t window = kProjectionWindow);

/// Refines a point projection onto the two segments adjacent to the nearest
/// point; returns a continuous arc length in [0, total_length).
double project_continuous(const Centerline& cl, double x, double y,
                          std::optional<double> s_hint = std::nullopt);

}  // namespace cimpcc
