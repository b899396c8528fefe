#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace alab {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// A box-shaped coordinate chart. Dimension 0 is allowed and stands for a
/// single point (the base of a rank-0 algebroid over a point).
class ChartDomain {
 public:
  static constexpr int kMaxDim = 8;

  ChartDomain(std::string name, std::vector<Interval> box, std::vector<std::string> coordinates = {});

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(box_.size()); }
  const std::vector<Interval>& box() const { return box_; }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  bool contains(std::span<const double> point, double slack = 0.0) const;
  /// Half the box diagonal.
  double radius() const;

 private:
  std::string name_;
  std::vector<Interval> box_;
  std::vector<std::string> coordinates_;
};

using Chart = std::shared_ptr<const ChartDomain>;
using Point = std::vector<double>;

Chart make_chart(std::string name, std::vector<Interval> box, std::vector<std::string> coordinates = {});
/// Chart [lo,hi]^dim.
Chart make_cube(std::string name, int dim, double lower, double upper);
Chart make_point_chart(std::string name = "pt");
/// Cartesian product; coordinates of `b` follow those of `a`.
Chart product_chart(const Chart& a, const Chart& b);

bool same_chart(const Chart& a, const Chart& b);
/// Throws ChartMismatch naming `what`.
void require_same_chart(const Chart& a, const Chart& b, const std::string& what);

/// Deterministic uniform samples in the box. A point chart yields a single
/// empty point regardless of `count`.
std::vector<Point> sample_points(const Chart& chart, int count, std::uint64_t seed);

}  // namespace alab
