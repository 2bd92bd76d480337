#pragma once

// Points of TQ and T*Q, and derivative bundles of scalar expressions over them.

#include <Eigen/Dense>

#include "hjk/expr.hpp"

namespace hjk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point (q, v) of TQ.
struct TangentPoint {
  Vector q;
  Vector v;

  TangentPoint() = default;
  TangentPoint(Vector q_, Vector v_);
  int dof() const noexcept { return static_cast<int>(q.size()); }
};

/// A point (q, p) of T*Q.
struct CotangentPoint {
  Vector q;
  Vector p;

  CotangentPoint() = default;
  CotangentPoint(Vector q_, Vector p_);
  int dof() const noexcept { return static_cast<int>(q.size()); }
};

/// First derivatives of f(x, y) where x = q and y is the fibre coordinate (v or p).
struct PhaseGrad {
  double value = 0.0;
  Vector dx;
  Vector dy;
};

/// Value, gradient and Hessian blocks of f(x, y).
/// yx(i, j) = d2f / dy^i dx^j.
struct PhaseJet {
  double value = 0.0;
  Vector dx;
  Vector dy;
  Matrix xx;
  Matrix yx;
  Matrix yy;
};

/// Plain value of an expression over (q, fibre), fibre bound to family `fibre`.
double phase_value(const Expr& e, Family fibre, const Vector& q, const Vector& y);
PhaseGrad phase_grad(const Expr& e, Family fibre, const Vector& q, const Vector& y);
PhaseJet phase_jet(const Expr& e, Family fibre, const Vector& q, const Vector& y);

/// Value and gradient of an expression over q alone.
struct ConfigGrad {
  double value = 0.0;
  Vector dq;
};
double config_value(const Expr& e, const Vector& q);
ConfigGrad config_grad(const Expr& e, const Vector& q);

}  // namespace hjk
