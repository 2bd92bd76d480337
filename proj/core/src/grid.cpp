#include "hjk/grid.hpp"

#include <charconv>
#include <string>

#include "hjk/error.hpp"

namespace hjk {

namespace {

void validate(const Interval& a) {
  if (!(a.lo < a.hi)) throw InputError("grid interval needs lo < hi");
  if (a.points < 2) throw InputError("grid axis needs at least 2 points");
}

double parse_double(std::string_view s, std::string_view whole) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("malformed grid specification '" + std::string(whole) + "'");
  }
  return x;
}

}  // namespace

SampleGrid::SampleGrid(std::vector<Interval> axes) : axes_(std::move(axes)), size_(axes_.empty() ? 0 : 1) {
  for (const auto& a : axes_) {
    validate(a);
    size_ *= static_cast<std::size_t>(a.points);
  }
}

SampleGrid SampleGrid::uniform(int dim, Interval axis) {
  return SampleGrid(std::vector<Interval>(static_cast<std::size_t>(dim), axis));
}

Interval SampleGrid::parse_axis(std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
    throw InputError("grid specification must be a:b:m, got '" + std::string(text) + "'");
  }
  Interval a;
  a.lo = parse_double(text.substr(0, c1), text);
  a.hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1), text);
  const auto m = text.substr(c2 + 1);
  auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), a.points);
  if (ec != std::errc() || ptr != m.data() + m.size()) {
    throw InputError("malformed point count in '" + std::string(text) + "'");
  }
  validate(a);
  return a;
}

double axis_value(const Interval& axis, int k) {
  if (k == axis.points - 1) return axis.hi;
  const double t = static_cast<double>(k) / static_cast<double>(axis.points - 1);
  return axis.lo + t * (axis.hi - axis.lo);
}

Eigen::VectorXd SampleGrid::point(std::size_t flat_index) const {
  Eigen::VectorXd x(dim());
  for (int d = dim() - 1; d >= 0; --d) {
    const auto& a = axes_[static_cast<std::size_t>(d)];
    const auto m = static_cast<std::size_t>(a.points);
    x[d] = axis_value(a, static_cast<int>(flat_index % m));
    flat_index /= m;
  }
  return x;
}

std::vector<Eigen::VectorXd> SampleGrid::points() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(point(i));
  return out;
}

}  // namespace hjk
