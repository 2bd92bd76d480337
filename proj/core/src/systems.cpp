#include "hjk/systems.hpp"

#include <cmath>

#include "hjk/error.hpp"

namespace hjk {

namespace {

double level_velocity(double kinetic, int branch) {
  if (kinetic < 0.0) throw DomainError("energy below the potential at this q");
  return (branch < 0 ? -1.0 : 1.0) * std::sqrt(2.0 * kinetic);
}

BuiltinSystem make(std::string name, int dof, std::string_view lagrangian, std::optional<std::string_view> hamiltonian,
                   std::vector<std::string> constraints = {}) {
  BuiltinSystem b{name, LagrangianSystem::parse(dof, lagrangian, hamiltonian, constraints, name), {}, {}, {},
                  SampleGrid::uniform(dof, {-0.9, 0.9, 21}), SampleGrid::uniform(2 * dof, {-1.0, 1.0, 5})};
  return b;
}

BuiltinSystem build(std::string_view name) {
  if (name == "free_particle_1d") {
    auto b = make("free_particle_1d", 1, "0.5*v1^2", "0.5*p1^2");
    b.flow = AnalyticFlow{[](const TangentPoint& s, double t) { return TangentPoint(s.q + t * s.v, s.v); },
                          "q(t) = q0 + v0 t"};
    b.hj = AnalyticHJ{[](const Vector&, double e, int branch) { return Vector::Constant(1, level_velocity(e, branch)); },
                      "X = +-sqrt(2E)"};
    return b;
  }
  if (name == "oscillator_1d" || name == "oscillator_2d") {
    const bool two = name == "oscillator_2d";
    auto b = two ? make("oscillator_2d", 2, "0.5*v1^2+0.5*v2^2-0.5*q1^2-0.5*q2^2", "0.5*p1^2+0.5*p2^2+0.5*q1^2+0.5*q2^2")
                 : make("oscillator_1d", 1, "0.5*v1^2-0.5*q1^2", "0.5*p1^2+0.5*q1^2");
    b.flow = AnalyticFlow{[](const TangentPoint& s, double t) {
                            const double c = std::cos(t);
                            const double sn = std::sin(t);
                            return TangentPoint(c * s.q + sn * s.v, c * s.v - sn * s.q);
                          },
                          "q(t) = q0 cos t + v0 sin t, componentwise"};
    if (!two) {
      b.hj = AnalyticHJ{[](const Vector& q, double e, int branch) {
                          return Vector::Constant(1, level_velocity(e - 0.5 * q[0] * q[0], branch));
                        },
                        "X_E(q) = +-sqrt(2E - q^2)"};
    }
    return b;
  }
  if (name == "pendulum_1d") {
    auto b = make("pendulum_1d", 1, "0.5*v1^2+cos(q1)", "0.5*p1^2-cos(q1)");
    b.hj = AnalyticHJ{[](const Vector& q, double e, int branch) {
                        return Vector::Constant(1, level_velocity(e + std::cos(q[0]), branch));
                      },
                      "p(q) = +-sqrt(2(E + cos q)), and X = p since W = 1"};
    return b;
  }
  if (name == "singular_affine") {
    auto b = make("singular_affine", 2, "0.5*v1^2+q1*v2", std::nullopt, {"p2 - q1"});
    b.flow = AnalyticFlow{[](const TangentPoint& s, double) { return s; },
                          "Euler-Lagrange forces v1 = 0 and v2 = 0, so consistent states are at rest"};
    b.chain = AnalyticChain{{"(p2 - q1)", "(-v1)", "(-v2)"},
                            "p2 = q1 transports to -v1; its time derivative is -v2; then nothing new"};
    return b;
  }
  if (name == "singular_gauge") {
    auto b = make("singular_gauge", 2, "0.5*(v1-v2)^2", std::nullopt, {"p1 + p2"});
    b.chain = AnalyticChain{{"(p1 + p2)"}, "p1 + p2 transports to 0 since L does not depend on q"};
    return b;
  }
  throw InputError("unknown builtin system '" + std::string(name) + "'");
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"free_particle_1d", "oscillator_1d", "oscillator_2d",
                                              "pendulum_1d",      "singular_affine", "singular_gauge"};
  return names;
}

BuiltinSystem builtin(std::string_view name) {
  BuiltinSystem b = build(name);
  if (b.system.hamiltonian()) {
    const double defect = projectability_defect(b.system, b.tq_grid);
    if (!(defect <= 1e-10)) {
      throw NumericalError("builtin " + b.name + " fails the projectability self-check (" + format_number(defect) +
                           ")");
    }
  }
  return b;
}

}  // namespace hjk
