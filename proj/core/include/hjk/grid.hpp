#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hjk {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  int points = 2;
};

/// Cartesian product of uniformly sampled intervals, both endpoints included.
/// Enumeration order: the last coordinate varies fastest.
class SampleGrid {
 public:
  SampleGrid() = default;
  explicit SampleGrid(std::vector<Interval> axes);

  /// Same interval on every one of `dim` coordinates.
  static SampleGrid uniform(int dim, Interval axis);

  /// Parses "a:b:m".
  static Interval parse_axis(std::string_view text);

  int dim() const noexcept { return static_cast<int>(axes_.size()); }
  std::size_t size() const noexcept { return size_; }
  const std::vector<Interval>& axes() const noexcept { return axes_; }

  Eigen::VectorXd point(std::size_t flat_index) const;
  std::vector<Eigen::VectorXd> points() const;

 private:
  std::vector<Interval> axes_;
  std::size_t size_ = 0;
};

/// The k-th of m uniformly spaced points on [lo, hi]; the endpoints are exact.
double axis_value(const Interval& axis, int k);

}  // namespace hjk
