#pragma once

// Forward-mode automatic differentiation over a fixed set of m active variables.
//
// Dual1 carries a value and its gradient; Dual2 additionally carries a dense
// symmetric Hessian. Both are closed under + - * / pow sin cos exp log sqrt.
// The value channel of every operation is computed with exactly the same
// double-precision expression that the plain-double overloads use, so
// evaluating an expression over doubles and over duals gives bit-identical
// values.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hjk/error.hpp"

namespace hjk::ad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Dual1 {
 public:
  Dual1() = default;
  Dual1(double value, Eigen::Index num_vars) : value_(value), grad_(Vector::Zero(num_vars)) {}
  Dual1(double value, Vector grad) : value_(value), grad_(std::move(grad)) {}

  static Dual1 variable(double value, Eigen::Index num_vars, Eigen::Index index) {
    Dual1 d(value, num_vars);
    d.grad_[index] = 1.0;
    return d;
  }

  double value() const noexcept { return value_; }
  const Vector& grad() const noexcept { return grad_; }
  Eigen::Index num_vars() const noexcept { return grad_.size(); }

  /// Constant with the same number of active variables as *this.
  Dual1 constant(double c) const { return Dual1(c, num_vars()); }

  /// f(*this) given f, f' at value().
  Dual1 chain(double f, double df) const { return Dual1(f, df * grad_); }

  Dual1 operator-() const { return Dual1(-value_, -grad_); }

  friend Dual1 operator+(const Dual1& a, const Dual1& b) { return Dual1(a.value_ + b.value_, a.grad_ + b.grad_); }
  friend Dual1 operator-(const Dual1& a, const Dual1& b) { return Dual1(a.value_ - b.value_, a.grad_ - b.grad_); }
  friend Dual1 operator*(const Dual1& a, const Dual1& b) {
    return Dual1(a.value_ * b.value_, a.value_ * b.grad_ + b.value_ * a.grad_);
  }
  friend Dual1 operator/(const Dual1& a, const Dual1& b) {
    if (b.value_ == 0.0) throw DomainError("division by zero");
    const double q = a.value_ / b.value_;
    return Dual1(q, (a.grad_ - q * b.grad_) / b.value_);
  }

  friend Dual1 operator+(const Dual1& a, double b) { return Dual1(a.value_ + b, a.grad_); }
  friend Dual1 operator+(double a, const Dual1& b) { return Dual1(a + b.value_, b.grad_); }
  friend Dual1 operator-(const Dual1& a, double b) { return Dual1(a.value_ - b, a.grad_); }
  friend Dual1 operator-(double a, const Dual1& b) { return Dual1(a - b.value_, -b.grad_); }
  friend Dual1 operator*(const Dual1& a, double b) { return Dual1(a.value_ * b, b * a.grad_); }
  friend Dual1 operator*(double a, const Dual1& b) { return Dual1(a * b.value_, a * b.grad_); }
  friend Dual1 operator/(const Dual1& a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return Dual1(a.value_ / b, a.grad_ / b);
  }
  friend Dual1 operator/(double a, const Dual1& b) { return b.constant(a) / b; }

 private:
  double value_ = 0.0;
  Vector grad_;
};

class Dual2 {
 public:
  Dual2() = default;
  Dual2(double value, Eigen::Index num_vars)
      : value_(value), grad_(Vector::Zero(num_vars)), hess_(Matrix::Zero(num_vars, num_vars)) {}
  Dual2(double value, Vector grad, Matrix hess)
      : value_(value), grad_(std::move(grad)), hess_(std::move(hess)) {}

  static Dual2 variable(double value, Eigen::Index num_vars, Eigen::Index index) {
    Dual2 d(value, num_vars);
    d.grad_[index] = 1.0;
    return d;
  }

  double value() const noexcept { return value_; }
  const Vector& grad() const noexcept { return grad_; }
  const Matrix& hess() const noexcept { return hess_; }
  Eigen::Index num_vars() const noexcept { return grad_.size(); }

  Dual2 constant(double c) const { return Dual2(c, num_vars()); }

  /// f(*this) given f, f', f'' at value().
  Dual2 chain(double f, double df, double d2f) const {
    return Dual2(f, df * grad_, df * hess_ + d2f * (grad_ * grad_.transpose()));
  }

  Dual2 operator-() const { return Dual2(-value_, -grad_, -hess_); }

  friend Dual2 operator+(const Dual2& a, const Dual2& b) {
    return Dual2(a.value_ + b.value_, a.grad_ + b.grad_, a.hess_ + b.hess_);
  }
  friend Dual2 operator-(const Dual2& a, const Dual2& b) {
    return Dual2(a.value_ - b.value_, a.grad_ - b.grad_, a.hess_ - b.hess_);
  }
  friend Dual2 operator*(const Dual2& a, const Dual2& b) {
    Matrix cross = a.grad_ * b.grad_.transpose();
    return Dual2(a.value_ * b.value_, a.value_ * b.grad_ + b.value_ * a.grad_,
                 a.value_ * b.hess_ + b.value_ * a.hess_ + cross + cross.transpose());
  }
  friend Dual2 operator/(const Dual2& a, const Dual2& b) {
    if (b.value_ == 0.0) throw DomainError("division by zero");
    const double q = a.value_ / b.value_;
    Vector dq = (a.grad_ - q * b.grad_) / b.value_;
    Matrix cross = dq * b.grad_.transpose();
    Matrix h = (a.hess_ - cross - cross.transpose() - q * b.hess_) / b.value_;
    return Dual2(q, std::move(dq), std::move(h));
  }

  friend Dual2 operator+(const Dual2& a, double b) { return Dual2(a.value_ + b, a.grad_, a.hess_); }
  friend Dual2 operator+(double a, const Dual2& b) { return Dual2(a + b.value_, b.grad_, b.hess_); }
  friend Dual2 operator-(const Dual2& a, double b) { return Dual2(a.value_ - b, a.grad_, a.hess_); }
  friend Dual2 operator-(double a, const Dual2& b) { return Dual2(a - b.value_, -b.grad_, -b.hess_); }
  friend Dual2 operator*(const Dual2& a, double b) { return Dual2(a.value_ * b, b * a.grad_, b * a.hess_); }
  friend Dual2 operator*(double a, const Dual2& b) { return Dual2(a * b.value_, a * b.grad_, a * b.hess_); }
  friend Dual2 operator/(const Dual2& a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return Dual2(a.value_ / b, a.grad_ / b, a.hess_ / b);
  }
  friend Dual2 operator/(double a, const Dual2& b) { return b.constant(a) / b; }

 private:
  double value_ = 0.0;
  Vector grad_;
  Matrix hess_;
};

// ---------------------------------------------------------------------------
// Checked primitives. The double overloads enforce the same domain rules as
// the dual ones so that every scalar kind fails at the same inputs.

inline double value_of(double x) noexcept { return x; }
inline double value_of(const Dual1& x) noexcept { return x.value(); }
inline double value_of(const Dual2& x) noexcept { return x.value(); }

namespace detail {

inline void require_positive_log(double x) {
  if (!(x > 0.0)) throw DomainError("log of non-positive argument " + std::to_string(x));
}

inline void require_nonnegative_sqrt(double x) {
  if (!(x >= 0.0)) throw DomainError("sqrt of negative argument " + std::to_string(x));
}

inline bool is_integer(double c) { return std::isfinite(c) && std::floor(c) == c; }

inline void require_real_power(double base, double exponent) {
  if (base < 0.0 && !is_integer(exponent)) {
    throw DomainError("non-integer power " + std::to_string(exponent) + " of negative base " +
                      std::to_string(base));
  }
  if (base == 0.0 && exponent < 0.0) throw DomainError("negative power of zero");
}

// Derivatives of x^c need x^(c-1) and x^(c-2); at x = 0 they blow up unless c is
// a non-negative integer or large enough.
inline void require_differentiable_power(double base, double exponent, int order) {
  require_real_power(base, exponent);
  if (base == 0.0 && !is_integer(exponent) && exponent < order) {
    throw DomainError("power " + std::to_string(exponent) + " not differentiable at zero");
  }
}

}  // namespace detail

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) {
  detail::require_positive_log(x);
  return std::log(x);
}
inline double sqrt(double x) {
  detail::require_nonnegative_sqrt(x);
  return std::sqrt(x);
}
inline double pow(double x, double c) {
  detail::require_real_power(x, c);
  return std::pow(x, c);
}
inline double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

inline Dual1 sin(const Dual1& x) { return x.chain(std::sin(x.value()), std::cos(x.value())); }
inline Dual1 cos(const Dual1& x) { return x.chain(std::cos(x.value()), -std::sin(x.value())); }
inline Dual1 exp(const Dual1& x) {
  const double e = std::exp(x.value());
  return x.chain(e, e);
}
inline Dual1 log(const Dual1& x) {
  detail::require_positive_log(x.value());
  return x.chain(std::log(x.value()), 1.0 / x.value());
}
inline Dual1 sqrt(const Dual1& x) {
  detail::require_nonnegative_sqrt(x.value());
  if (x.value() == 0.0) throw DomainError("sqrt not differentiable at zero");
  const double s = std::sqrt(x.value());
  return x.chain(s, 0.5 / s);
}
inline Dual1 pow(const Dual1& x, double c) {
  detail::require_differentiable_power(x.value(), c, 1);
  const double dc = c == 0.0 ? 0.0 : c * std::pow(x.value(), c - 1.0);
  return x.chain(std::pow(x.value(), c), dc);
}

inline Dual2 sin(const Dual2& x) {
  const double s = std::sin(x.value());
  return x.chain(s, std::cos(x.value()), -s);
}
inline Dual2 cos(const Dual2& x) {
  const double c = std::cos(x.value());
  return x.chain(c, -std::sin(x.value()), -c);
}
inline Dual2 exp(const Dual2& x) {
  const double e = std::exp(x.value());
  return x.chain(e, e, e);
}
inline Dual2 log(const Dual2& x) {
  detail::require_positive_log(x.value());
  const double inv = 1.0 / x.value();
  return x.chain(std::log(x.value()), inv, -inv * inv);
}
inline Dual2 sqrt(const Dual2& x) {
  detail::require_nonnegative_sqrt(x.value());
  if (x.value() == 0.0) throw DomainError("sqrt not differentiable at zero");
  const double s = std::sqrt(x.value());
  return x.chain(s, 0.5 / s, -0.25 / (s * x.value()));
}
inline Dual2 pow(const Dual2& x, double c) {
  detail::require_differentiable_power(x.value(), c, 2);
  const double v = x.value();
  const double dc = c == 0.0 ? 0.0 : c * std::pow(v, c - 1.0);
  const double d2c = (c == 0.0 || c == 1.0) ? 0.0 : c * (c - 1.0) * std::pow(v, c - 2.0);
  return x.chain(std::pow(v, c), dc, d2c);
}

inline Dual1 replace_value(const Dual1& d, double v) { return Dual1(v, d.grad()); }
inline Dual2 replace_value(const Dual2& d, double v) { return Dual2(v, d.grad(), d.hess()); }

/// x^y with an active exponent. Falls back to the constant-exponent rule when
/// y carries no derivative information.
template <class D>
D pow(const D& x, const D& y) {
  if (y.grad().isZero(0.0)) return pow(x, y.value());
  if (!(x.value() > 0.0)) throw DomainError("variable exponent requires a positive base");
  D r = exp(y * log(x));
  // Keep the value channel identical to the plain-double path.
  return replace_value(r, std::pow(x.value(), y.value()));
}

template <class D>
D divide(const D& a, const D& b) {
  return a / b;
}

// ---------------------------------------------------------------------------
// Drivers.

struct GradResult {
  double value = 0.0;
  Vector gradient;
};

struct HessResult {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

inline std::vector<Dual1> seed1(const Vector& x) {
  std::vector<Dual1> vars;
  vars.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) vars.push_back(Dual1::variable(x[i], x.size(), i));
  return vars;
}

inline std::vector<Dual2> seed2(const Vector& x) {
  std::vector<Dual2> vars;
  vars.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) vars.push_back(Dual2::variable(x[i], x.size(), i));
  return vars;
}

/// Value and gradient of f at x. f is invoked with a std::vector<Dual1>.
template <class F>
GradResult eval_grad(F&& f, const Vector& x) {
  const Dual1 r = f(seed1(x));
  return {r.value(), r.grad()};
}

/// Value, gradient and Hessian of f at x. The Hessian is symmetric bit for bit.
template <class F>
HessResult eval_hess(F&& f, const Vector& x) {
  const Dual2 r = f(seed2(x));
  Matrix h = 0.5 * (r.hess() + r.hess().transpose());
  return {r.value(), r.grad(), std::move(h)};
}

}  // namespace hjk::ad
