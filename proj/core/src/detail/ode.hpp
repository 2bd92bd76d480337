#pragma once

#include <Eigen/Dense>

#include "hjk/kappa.hpp"

namespace hjk::detail {

/// One explicit step of z' = f(t, z).
template <class F>
Eigen::VectorXd step(F&& f, double t, const Eigen::VectorXd& z, double h, Method method) {
  if (method == Method::euler) return z + h * f(t, z);
  const Eigen::VectorXd k1 = f(t, z);
  const Eigen::VectorXd k2 = f(t + 0.5 * h, z + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * h, z + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(t + h, z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void require_step(double h, int steps) {
  if (!(h > 0.0)) throw InputError("step size must be positive");
  if (steps < 0) throw InputError("step count must be non-negative");
}

}  // namespace hjk::detail
