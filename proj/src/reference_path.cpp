#include "cimpcc/reference_path.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace cimpcc {

ReferencePath::ReferencePath(const Centerline& cl)
    : knots_(cl.arc_lengths()), total_length_(cl.total_length()) {
  std::vector<double> xs, ys;
  xs.reserve(cl.size());
  ys.reserve(cl.size());
  for (const auto& p : cl.points()) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  x_ = fit(knots_, total_length_, std::move(xs));
  y_ = fit(knots_, total_length_, std::move(ys));
}

ReferencePath::Axis ReferencePath::fit(const std::vector<double>& knots, double period,
                                       std::vector<double> values) {
  const auto n = static_cast<Eigen::Index>(knots.size());
  auto h = [&](Eigen::Index i) {
    const auto k = static_cast<std::size_t>(i);
    return (k + 1 == knots.size() ? period : knots[k + 1]) - knots[k];
  };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(3 * n));
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index prev = (i + n - 1) % n;
    const Eigen::Index next = (i + 1) % n;
    const double hp = h(prev);
    const double hi = h(i);
    triplets.emplace_back(i, prev, hp);
    triplets.emplace_back(i, i, 2.0 * (hp + hi));
    triplets.emplace_back(i, next, hi);
    const auto vi = values[static_cast<std::size_t>(i)];
    rhs(i) = 6.0 * ((values[static_cast<std::size_t>(next)] - vi) / hi -
                    (vi - values[static_cast<std::size_t>(prev)]) / hp);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  const Eigen::VectorXd m = lu.solve(rhs);

  Axis axis;
  axis.value = std::move(values);
  axis.second.assign(m.data(), m.data() + n);
  return axis;
}

ReferencePose ReferencePath::pose(double s) const {
  double w = std::fmod(s, total_length_);
  if (w < 0.0) w += total_length_;
  if (w >= total_length_) w = 0.0;

  const std::size_t n = knots_.size();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), w);
  const auto i = static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
  const std::size_t j = (i + 1) % n;
  const double s_lo = knots_[i];
  const double s_hi = (i + 1 == n) ? total_length_ : knots_[i + 1];
  const double hseg = s_hi - s_lo;
  const double a = s_hi - w;
  const double b = w - s_lo;

  struct Eval {
    double v, d1, d2;
  };
  auto eval = [&](const Axis& ax) {
    const double mi = ax.second[i];
    const double mj = ax.second[j];
    const double ci = ax.value[i] / hseg - mi * hseg / 6.0;
    const double cj = ax.value[j] / hseg - mj * hseg / 6.0;
    return Eval{mi * a * a * a / (6.0 * hseg) + mj * b * b * b / (6.0 * hseg) + ci * a + cj * b,
                -mi * a * a / (2.0 * hseg) + mj * b * b / (2.0 * hseg) - ci + cj,
                (mi * a + mj * b) / hseg};
  };
  const Eval ex = eval(x_);
  const Eval ey = eval(y_);

  ReferencePose p;
  p.x = ex.v;
  p.y = ey.v;
  p.dx_ds = ex.d1;
  p.dy_ds = ey.d1;
  p.heading = std::atan2(ey.d1, ex.d1);
  p.dheading_ds = (ex.d1 * ey.d2 - ey.d1 * ex.d2) / (ex.d1 * ex.d1 + ey.d1 * ey.d1);
  return p;
}

}  // namespace cimpcc
