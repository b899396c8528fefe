#include "alab/chart.hpp"

#include <cmath>
#include <random>

#include "alab/error.hpp"

namespace alab {

ChartDomain::ChartDomain(std::string name, std::vector<Interval> box, std::vector<std::string> coordinates)
    : name_(std::move(name)), box_(std::move(box)), coordinates_(std::move(coordinates)) {
  if (dim() > kMaxDim) {
    fail(ErrorKind::InvalidChart, "chart '" + name_ + "' has dimension " + std::to_string(dim()) + " > " +
                                      std::to_string(kMaxDim));
  }
  for (const auto& iv : box_) {
    if (!(std::isfinite(iv.lower) && std::isfinite(iv.upper) && iv.lower < iv.upper)) {
      fail(ErrorKind::InvalidChart, "chart '" + name_ + "' has an empty or unbounded interval");
    }
  }
  if (coordinates_.empty()) {
    for (int i = 0; i < dim(); ++i) coordinates_.push_back("x" + std::to_string(i + 1));
  } else if (static_cast<int>(coordinates_.size()) != dim()) {
    fail(ErrorKind::InvalidChart, "chart '" + name_ + "' coordinate names do not match its dimension");
  }
}

bool ChartDomain::contains(std::span<const double> point, double slack) const {
  if (static_cast<int>(point.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    double v = point[static_cast<std::size_t>(i)];
    if (!(v >= box_[static_cast<std::size_t>(i)].lower - slack && v <= box_[static_cast<std::size_t>(i)].upper + slack)) {
      return false;
    }
  }
  return true;
}

double ChartDomain::radius() const {
  double s = 0.0;
  for (const auto& iv : box_) s += (iv.upper - iv.lower) * (iv.upper - iv.lower);
  return 0.5 * std::sqrt(s);
}

Chart make_chart(std::string name, std::vector<Interval> box, std::vector<std::string> coordinates) {
  return std::make_shared<const ChartDomain>(std::move(name), std::move(box), std::move(coordinates));
}

Chart make_cube(std::string name, int dim, double lower, double upper) {
  if (dim < 0) fail(ErrorKind::InvalidChart, "negative dimension");
  return make_chart(std::move(name), std::vector<Interval>(static_cast<std::size_t>(dim), Interval{lower, upper}));
}

Chart make_point_chart(std::string name) { return make_chart(std::move(name), {}); }

Chart product_chart(const Chart& a, const Chart& b) {
  std::vector<Interval> box = a->box();
  box.insert(box.end(), b->box().begin(), b->box().end());
  std::vector<std::string> names;
  for (int i = 0; i < static_cast<int>(box.size()); ++i) names.push_back("x" + std::to_string(i + 1));
  return make_chart(a->name() + "x" + b->name(), std::move(box), std::move(names));
}

bool same_chart(const Chart& a, const Chart& b) {
  if (a == b) return true;
  if (!a || !b || a->dim() != b->dim() || a->name() != b->name()) return false;
  for (int i = 0; i < a->dim(); ++i) {
    const auto& x = a->box()[static_cast<std::size_t>(i)];
    const auto& y = b->box()[static_cast<std::size_t>(i)];
    if (x.lower != y.lower || x.upper != y.upper) return false;
  }
  return true;
}

void require_same_chart(const Chart& a, const Chart& b, const std::string& what) {
  if (!same_chart(a, b)) {
    fail(ErrorKind::ChartMismatch, what + ": chart '" + (a ? a->name() : "?") + "' vs '" + (b ? b->name() : "?") + "'");
  }
}

std::vector<Point> sample_points(const Chart& chart, int count, std::uint64_t seed) {
  if (chart->dim() == 0) return {Point{}};
  if (count < 1) fail(ErrorKind::InvalidArgument, "sample count must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    Point p;
    for (const auto& iv : chart->box()) {
      // 53 random bits -> [0,1); avoids implementation-defined distributions.
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p.push_back(iv.lower + u * (iv.upper - iv.lower));
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace alab
