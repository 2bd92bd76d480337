#include "hjk/phase.hpp"

#include <vector>

namespace hjk {

TangentPoint::TangentPoint(Vector q_, Vector v_) : q(std::move(q_)), v(std::move(v_)) {
  if (q.size() != v.size() || q.size() < 1) throw InputError("tangent point needs q and v of equal length >= 1");
}

CotangentPoint::CotangentPoint(Vector q_, Vector p_) : q(std::move(q_)), p(std::move(p_)) {
  if (q.size() != p.size() || q.size() < 1) throw InputError("cotangent point needs q and p of equal length >= 1");
}

namespace {

template <class T>
Binding<T> bind(Family fibre, std::span<const T> q, std::span<const T> y) {
  Binding<T> b;
  b.q = q;
  if (fibre == Family::v) {
    b.v = y;
  } else if (fibre == Family::p) {
    b.p = y;
  }
  return b;
}

template <class T>
std::vector<T> stack_seed(const Vector& q, const Vector& y) {
  const Eigen::Index n = q.size();
  const Eigen::Index m = n + y.size();
  std::vector<T> vars;
  vars.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < n; ++i) vars.push_back(T::variable(q[i], m, i));
  for (Eigen::Index i = 0; i < y.size(); ++i) vars.push_back(T::variable(y[i], m, n + i));
  return vars;
}

}  // namespace

double phase_value(const Expr& e, Family fibre, const Vector& q, const Vector& y) {
  const std::span<const double> qs(q.data(), static_cast<std::size_t>(q.size()));
  const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
  return e.eval<double>(bind<double>(fibre, qs, ys));
}

PhaseGrad phase_grad(const Expr& e, Family fibre, const Vector& q, const Vector& y) {
  const auto vars = stack_seed<ad::Dual1>(q, y);
  const std::span<const ad::Dual1> all(vars);
  const auto n = static_cast<std::size_t>(q.size());
  const ad::Dual1 r = e.eval<ad::Dual1>(bind<ad::Dual1>(fibre, all.first(n), all.subspan(n)));
  return {r.value(), r.grad().head(q.size()), r.grad().tail(y.size())};
}

PhaseJet phase_jet(const Expr& e, Family fibre, const Vector& q, const Vector& y) {
  const auto vars = stack_seed<ad::Dual2>(q, y);
  const std::span<const ad::Dual2> all(vars);
  const auto n = static_cast<std::size_t>(q.size());
  const ad::Dual2 r = e.eval<ad::Dual2>(bind<ad::Dual2>(fibre, all.first(n), all.subspan(n)));
  const Matrix h = 0.5 * (r.hess() + r.hess().transpose());
  const Eigen::Index nq = q.size();
  const Eigen::Index ny = y.size();
  PhaseJet jet;
  jet.value = r.value();
  jet.dx = r.grad().head(nq);
  jet.dy = r.grad().tail(ny);
  jet.xx = h.topLeftCorner(nq, nq);
  jet.yx = h.bottomLeftCorner(ny, nq);
  jet.yy = h.bottomRightCorner(ny, ny);
  return jet;
}

double config_value(const Expr& e, const Vector& q) {
  Binding<double> b;
  b.q = std::span<const double>(q.data(), static_cast<std::size_t>(q.size()));
  return e.eval<double>(b);
}

ConfigGrad config_grad(const Expr& e, const Vector& q) {
  const auto vars = ad::seed1(q);
  Binding<ad::Dual1> b;
  b.q = std::span<const ad::Dual1>(vars);
  const ad::Dual1 r = e.eval<ad::Dual1>(b);
  return {r.value(), r.grad()};
}

}  // namespace hjk
