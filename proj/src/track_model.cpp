#include "cimpcc/track_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace cimpcc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric field '" +
                     std::string(field) + "'");
  }
  return value;
}

double segment_between(const TrackPoint& a, const TrackPoint& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

Centerline Centerline::from_points(std::vector<TrackPoint> points) {
  const std::size_t n = points.size();
  if (n < kMinPoints) {
    throw DegenerateTrack("track has " + std::to_string(n) + " points, at least " +
                          std::to_string(kMinPoints) + " required");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = points[i];
    if (!(p.half_width_left > 0.0) || !(p.half_width_right > 0.0)) {
      throw DegenerateTrack("point " + std::to_string(i) + ": half-widths must be positive");
    }
    if (segment_between(p, points[(i + 1) % n]) <= kMinSegment) {
      throw DegenerateTrack("points " + std::to_string(i) + " and " +
                            std::to_string((i + 1) % n) + " coincide");
    }
  }

  Centerline cl;
  cl.points_ = std::move(points);
  cl.arc_lengths_.resize(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cl.arc_lengths_[i] = s;
    s += segment_between(cl.points_[i], cl.points_[(i + 1) % n]);
  }
  cl.total_length_ = s;
  return cl;
}

double Centerline::wrap(double s) const {
  double w = std::fmod(s, total_length_);
  if (w < 0.0) w += total_length_;
  if (w >= total_length_) w = 0.0;
  return w;
}

std::size_t Centerline::segment_index(double s) const {
  const double w = wrap(s);
  auto it = std::upper_bound(arc_lengths_.begin(), arc_lengths_.end(), w);
  return static_cast<std::size_t>(std::distance(arc_lengths_.begin(), it)) - 1;
}

double Centerline::segment_length(std::size_t i) const {
  const std::size_t n = points_.size();
  const double end = (i + 1 == n) ? total_length_ : arc_lengths_[i + 1];
  return end - arc_lengths_[i];
}

Centerline load_centerline(std::string_view content, const LoadOptions& options) {
  static constexpr std::string_view kHeader = "x_m,y_m,w_left_m,w_right_m";

  std::vector<TrackPoint> points;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!content.empty()) {
    const auto eol = content.find('\n');
    std::string_view line = content.substr(0, eol);
    content = eol == std::string_view::npos ? std::string_view{} : content.substr(eol + 1);
    ++line_no;

    line = trim(line);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (line.empty() || line.front() == '#') continue;

    if (!header_seen) {
      std::string compact;
      for (char c : line) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != kHeader) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                         std::string(kHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    points.push_back({parse_field(fields[0], line_no), parse_field(fields[1], line_no),
                      parse_field(fields[2], line_no), parse_field(fields[3], line_no)});
  }
  if (!header_seen) throw ParseError("empty track file");
  if (points.empty()) throw ParseError("track file has no data rows");

  auto cl = Centerline::from_points(std::move(points));
  if (options.resample_spacing) return resample(cl, *options.resample_spacing);
  return cl;
}

Centerline load_centerline_file(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open track file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_centerline(buf.str(), options);
}

Centerline resample(const Centerline& cl, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw DegenerateTrack("resample spacing must be positive");
  }
  const double length = cl.total_length();
  const auto count = std::max<std::size_t>(
      Centerline::kMinPoints, static_cast<std::size_t>(std::llround(length / spacing)));
  const double step = length / static_cast<double>(count);

  std::vector<TrackPoint> out;
  out.reserve(count);
  const std::size_t n = cl.size();
  for (std::size_t k = 0; k < count; ++k) {
    const double s = static_cast<double>(k) * step;
    const std::size_t i = cl.segment_index(s);
    const auto& a = cl.point(i);
    const auto& b = cl.point((i + 1) % n);
    const double t = (s - cl.arc_lengths()[i]) / cl.segment_length(i);
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y),
                   a.half_width_left + t * (b.half_width_left - a.half_width_left),
                   a.half_width_right + t * (b.half_width_right - a.half_width_right)});
  }
  return Centerline::from_points(std::move(out));
}

std::string to_csv(const Centerline& cl) {
  std::ostringstream os;
  os.precision(17);
  os << "x_m,y_m,w_left_m,w_right_m\n";
  for (const auto& p : cl.points()) {
    os << p.x << ',' << p.y << ',' << p.half_width_left << ',' << p.half_width_right << '\n';
  }
  return os.str();
}

std::vector<double> raw_curvature(std::span<const Point2> points, Boundary boundary) {
  const std::size_t n = points.size();
  std::vector<double> kappa(n, 0.0);
  if (n < 3) return kappa;

  const bool closed = boundary == Boundary::kClosed;
  auto at = [&](std::ptrdiff_t i) -> const Point2& {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return points[static_cast<std::size_t>(((i % m) + m) % m)];
  };

  for (std::size_t idx = closed ? 0 : 2; idx < n; ++idx) {
    const auto i = static_cast<std::ptrdiff_t>(idx);
    const double dx = at(i).x - at(i - 1).x;
    const double dy = at(i).y - at(i - 1).y;
    const double dx_prev = at(i - 1).x - at(i - 2).x;
    const double dy_prev = at(i - 1).y - at(i - 2).y;
    const double ddx = dx - dx_prev;
    const double ddy = dy - dy_prev;
    const double norm2 = dx * dx + dy * dy;
    if (norm2 < 1e-12) {
      throw NumericalDegeneracy("zero-length difference at point " + std::to_string(idx));
    }
    kappa[idx] = std::abs(dx * ddy - ddx * dy) / std::pow(norm2, 1.5);
  }
  return kappa;
}

std::vector<double> compute_raw_curvature(const Centerline& cl) {
  std::vector<Point2> pts;
  pts.reserve(cl.size());
  for (const auto& p : cl.points()) pts.push_back({p.x, p.y});
  return raw_curvature(pts, Boundary::kClosed);
}

std::vector<double> smooth_curvature(std::span<const double> raw, int w) {
  const auto n = static_cast<std::ptrdiff_t>(raw.size());
  if (w <= 0 || w % 2 == 0 || w > n) {
    throw InvalidWindow("window must be odd and within [1, " + std::to_string(n) + "], got " +
                        std::to_string(w));
  }
  const std::ptrdiff_t half = (w - 1) / 2;
  std::vector<double> out(raw.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::ptrdiff_t m = i - half; m <= i + half; ++m) {
      sum += raw[static_cast<std::size_t>(((m % n) + n) % n)];
    }
    out[static_cast<std::size_t>(i)] = sum / w;
  }
  return out;
}

std::vector<double> normalize_curvature(std::span<const double> smoothed) {
  std::vector<double> out(smoothed.size(), 0.0);
  if (smoothed.empty()) return out;
  const auto [lo, hi] = std::minmax_element(smoothed.begin(), smoothed.end());
  const double range = *hi - *lo;
  // A range at roundoff level is a constant-curvature track.
  if (range <= 1e-9 * std::max(1.0, std::abs(*hi))) return out;
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    out[i] = std::clamp((smoothed[i] - *lo) / range, 0.0, 1.0);
  }
  return out;
}

CurvatureProfile make_curvature_profile(const Centerline& cl, int window) {
  CurvatureProfile p;
  p.raw = compute_raw_curvature(cl);
  p.smoothed = smooth_curvature(p.raw, window);
  p.normalized = normalize_curvature(p.smoothed);
  p.window = window;
  const auto [lo, hi] = std::minmax_element(p.smoothed.begin(), p.smoothed.end());
  p.k_min = *lo;
  p.k_max = *hi;
  return p;
}

PoseSample sample_at_s(const Centerline& cl, const CurvatureProfile& profile, double s) {
  const std::size_t n = cl.size();
  const double w = cl.wrap(s);
  const std::size_t i = cl.segment_index(w);
  const std::size_t j = (i + 1) % n;
  const auto& a = cl.point(i);
  const auto& b = cl.point(j);
  const double t = (w - cl.arc_lengths()[i]) / cl.segment_length(i);

  PoseSample out;
  out.x = a.x + t * (b.x - a.x);
  out.y = a.y + t * (b.y - a.y);
  out.heading = wrap_angle(std::atan2(b.y - a.y, b.x - a.x));
  if (profile.normalized.size() == n) {
    out.nsc = profile.normalized[i] + t * (profile.normalized[j] - profile.normalized[i]);
  }
  out.s = w;
  out.half_width_left = a.half_width_left + t * (b.half_width_left - a.half_width_left);
  out.half_width_right = a.half_width_right + t * (b.half_width_right - a.half_width_right);
  return out;
}

Projection project(const Centerline& cl, double x, double y, std::optional<double> s_hint,
                   std::size_t window) {
  const std::size_t n = cl.size();
  auto dist2 = [&](std::size_t i) {
    const auto& p = cl.point(i);
    return (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
  };
  auto full_scan = [&] {
    std::size_t best = 0;
    double best_d = dist2(0);
    for (std::size_t i = 1; i < n; ++i) {
      const double d = dist2(i);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return Projection{cl.arc_lengths()[best], best};
  };

  if (!s_hint || 2 * window + 1 >= n) return full_scan();

  const double w = cl.wrap(*s_hint);
  std::size_t center = cl.segment_index(w);
  if (w - cl.arc_lengths()[center] > 0.5 * cl.segment_length(center)) center = (center + 1) % n;

  const auto half = static_cast<std::ptrdiff_t>(window);
  std::size_t best = n;
  std::ptrdiff_t best_offset = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t off = -half; off <= half; ++off) {
    const auto i = static_cast<std::size_t>(
        (static_cast<std::ptrdiff_t>(center) + off + static_cast<std::ptrdiff_t>(n)) %
        static_cast<std::ptrdiff_t>(n));
    const double d = dist2(i);
    if (d < best_d || (d == best_d && i < best)) {
      best_d = d;
      best = i;
      best_offset = off;
    }
  }
  if (best_offset == -half || best_offset == half) return full_scan();
  return Projection{cl.arc_lengths()[best], best};
}

double project_continuous(const Centerline& cl, double x, double y, std::optional<double> s_hint) {
  const std::size_t n = cl.size();
  const auto nearest = project(cl, x, y, s_hint);
  double best_s = nearest.s;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t seg : {(nearest.index + n - 1) % n, nearest.index}) {
    const auto& a = cl.point(seg);
    const auto& b = cl.point((seg + 1) % n);
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    const double t = std::clamp(((x - a.x) * ex + (y - a.y) * ey) / len2, 0.0, 1.0);
    const double px = a.x + t * ex - x;
    const double py = a.y + t * ey - y;
    const double d = px * px + py * py;
    if (d < best_d) {
      best_d = d;
      best_s = cl.arc_lengths()[seg] + t * cl.segment_length(seg);
    }
  }
  return cl.wrap(best_s);
}

}  // namespace cimpcc
