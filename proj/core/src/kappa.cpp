#include "hjk/kappa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "detail/ode.hpp"

namespace hjk {

EvolutionVector evaluate_K(const LagrangianSystem& sys, const TangentPoint& pt) {
  const PhaseGrad g = phase_grad(sys.lagrangian(), Family::v, pt.q, pt.v);
  return {CotangentPoint(pt.q, g.dy), pt.v, g.dx};
}

double dynamical_identity_residual(const LagrangianSystem& sys, const TangentPoint& pt) {
  const int n = sys.dof();
  const LagrangianJet jet = lagrangian_jet(sys, pt);

  Vector k(2 * n);
  k << pt.v, jet.Lq;
  const Matrix tfl = legendre_jacobian(jet);

  // dE_L from the Hessian blocks: E_L = v . Lv - L.
  Vector dE(2 * n);
  dE.head(n) = jet.Lvq.transpose() * pt.v - jet.Lq;
  dE.tail(n) = jet.W.transpose() * pt.v;

  double worst = 0.0;
  for (int a = 0; a < 2 * n; ++a) {
    const double lhs = canonical_omega(k, tfl.col(a));
    worst = std::max(worst, std::abs(lhs - dE[a]));
  }
  return worst;
}

Method parse_method(std::string_view name) {
  if (name == "rk4") return Method::rk4;
  if (name == "euler") return Method::euler;
  throw InputError("unknown integration method '" + std::string(name) + "' (expected rk4 or euler)");
}

std::string_view method_name(Method m) { return m == Method::rk4 ? "rk4" : "euler"; }

Vector lagrangian_acceleration(const LagrangianSystem& sys, const TangentPoint& pt, double time) {
  const LagrangianJet jet = lagrangian_jet(sys, pt);
  const Eigen::JacobiSVD<Matrix> svd(jet.W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s.maxCoeff() : 0.0;
  const double smin = s.size() > 0 ? s.minCoeff() : 0.0;
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxHessianCondition)) {
    throw SingularHessianError("velocity Hessian is singular (condition " + std::to_string(cond) + ") at t=" +
                                   std::to_string(time),
                               time);
  }
  return svd.solve(jet.Lq - jet.Lvq * pt.v);
}

LagrangianTrajectory integrate_regular(const LagrangianSystem& sys, const TangentPoint& start, double h, int steps,
                                       Method method) {
  detail::require_step(h, steps);
  const int n = sys.dof();
  if (start.dof() != n) throw InputError("start point dimension does not match the system");

  auto rhs = [&](double t, const Vector& z) {
    const TangentPoint pt(z.head(n), z.tail(n));
    Vector dz(2 * n);
    dz << pt.v, lagrangian_acceleration(sys, pt, t);
    return dz;
  };

  LagrangianTrajectory traj;
  traj.step = h;
  traj.method = method;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);

  Vector z(2 * n);
  z << start.q, start.v;
  traj.times.push_back(0.0);
  traj.states.push_back(start);
  for (int k = 0; k < steps; ++k) {
    z = detail::step(rhs, k * h, z, h, method);
    traj.times.push_back((k + 1) * h);
    traj.states.emplace_back(z.head(n), z.tail(n));
  }
  return traj;
}

HamiltonianTrajectory integrate_hamiltonian(const LagrangianSystem& sys, const CotangentPoint& start, double h,
                                            int steps, Method method) {
  detail::require_step(h, steps);
  const Expr& ham = sys.require_hamiltonian();
  const int n = sys.dof();
  if (start.dof() != n) throw InputError("start point dimension does not match the system");

  auto rhs = [&](double, const Vector& z) {
    const PhaseGrad g = phase_grad(ham, Family::p, z.head(n), z.tail(n));
    Vector dz(2 * n);
    dz << g.dy, -g.dx;
    return dz;
  };

  HamiltonianTrajectory traj;
  traj.step = h;
  traj.method = method;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);

  Vector z(2 * n);
  z << start.q, start.p;
  traj.times.push_back(0.0);
  traj.states.push_back(start);
  for (int k = 0; k < steps; ++k) {
    z = detail::step(rhs, k * h, z, h, method);
    traj.times.push_back((k + 1) * h);
    traj.states.emplace_back(z.head(n), z.tail(n));
  }
  return traj;
}

double pushforward_relation_residual(const LagrangianSystem& sys, const TangentPoint& pt) {
  const int n = sys.dof();
  const LagrangianJet jet = lagrangian_jet(sys, pt);
  Vector xl(2 * n);
  xl << pt.v, lagrangian_acceleration(sys, pt);
  const Vector pushed = legendre_jacobian(jet) * xl;
  const EvolutionVector k = evaluate_K(sys, pt);
  const double dq = (pushed.head(n) - k.dq_comp).cwiseAbs().maxCoeff();
  const double dp = (pushed.tail(n) - k.dp_comp).cwiseAbs().maxCoeff();
  return std::max(dq, dp);
}

double hamiltonian_curve_residual(const LagrangianSystem& sys, const HamiltonianTrajectory& traj) {
  sys.require_hamiltonian();
  if (traj.states.size() < 3) throw InputError("trajectory too short: need at least 3 samples");
  const double two_h = 2.0 * traj.step;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.states.size(); ++k) {
    const auto& prev = traj.states[k - 1];
    const auto& here = traj.states[k];
    const auto& next = traj.states[k + 1];
    const Vector qdot = (next.q - prev.q) / two_h;
    const Vector pdot = (next.p - prev.p) / two_h;
    const EvolutionVector kv = evaluate_K(sys, TangentPoint(here.q, qdot));
    worst = std::max(worst, (kv.base.p - here.p).cwiseAbs().maxCoeff());
    worst = std::max(worst, (kv.dq_comp - qdot).cwiseAbs().maxCoeff());
    worst = std::max(worst, (kv.dp_comp - pdot).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace hjk
