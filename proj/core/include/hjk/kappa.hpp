#pragma once

// The time-evolution operator K : TQ -> T(T*Q), a vector field along the
// Legendre map with local expression
//   K(q, v) = v^i d/dq^i + dL/dq^i d/dp_i   at FL(q, v),
// together with integrators for its integral curves and the residual checks
// that tie it to the Lagrangian and Hamiltonian vector fields.

#include <string_view>
#include <vector>

#include "hjk/geometry.hpp"

namespace hjk {

struct EvolutionVector {
  CotangentPoint base;
  Vector dq_comp;
  Vector dp_comp;
};

EvolutionVector evaluate_K(const LagrangianSystem& sys, const TangentPoint& pt);

/// Max-norm over the 2n coordinate directions w of (i(K) omega)(w) - dE_L(w),
/// with (i(K) omega)(w) = omega(K, T(FL) w). Vanishes identically.
double dynamical_identity_residual(const LagrangianSystem& sys, const TangentPoint& pt);

enum class Method { rk4, euler };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);

template <class Point>
struct Trajectory {
  std::vector<double> times;
  std::vector<Point> states;
  double step = 0.0;
  Method method = Method::rk4;
};

using LagrangianTrajectory = Trajectory<TangentPoint>;
using HamiltonianTrajectory = Trajectory<CotangentPoint>;

/// Condition number of W beyond which the regular dynamics refuses to step.
inline constexpr double kMaxHessianCondition = 1e12;

/// Acceleration of the regular Euler-Lagrange flow: W^{-1} (Lq - Lvq v).
/// Throws SingularHessianError (with `time`) if W is too ill conditioned.
Vector lagrangian_acceleration(const LagrangianSystem& sys, const TangentPoint& pt, double time = 0.0);

LagrangianTrajectory integrate_regular(const LagrangianSystem& sys, const TangentPoint& start, double h, int steps,
                                       Method method = Method::rk4);

/// Hamilton's equations q' = dH/dp, p' = -dH/dq.
HamiltonianTrajectory integrate_hamiltonian(const LagrangianSystem& sys, const CotangentPoint& start, double h,
                                            int steps, Method method = Method::rk4);

/// Max-norm difference between T(FL) X_L(pt) and K(pt).
double pushforward_relation_residual(const LagrangianSystem& sys, const TangentPoint& pt);

/// Max over interior samples of |psi' - K(T pi psi')|, psi' by central differences.
/// The base-point mismatch |FL(q, q') - psi| is included in the norm.
double hamiltonian_curve_residual(const LagrangianSystem& sys, const HamiltonianTrajectory& traj);

}  // namespace hjk
