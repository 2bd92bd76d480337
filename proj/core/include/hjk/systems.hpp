#pragma once

// Builtin reference systems with closed-form data for tests and examples.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hjk/geometry.hpp"
#include "hjk/grid.hpp"

namespace hjk {

struct AnalyticFlow {
  /// State at time t of the Euler-Lagrange flow started at `start`.
  std::function<TangentPoint(const TangentPoint& start, double t)> eval;
  std::string note;
};

struct AnalyticHJ {
  /// Velocity X_E(q) of the level-set solution with energy E on branch sign(X) = branch.
  std::function<Vector(const Vector& q, double energy, int branch)> eval;
  std::string note;
};

struct AnalyticChain {
  /// Expected constraint chain, one printed expression per generation.
  std::vector<std::string> expected;
  std::string note;
};

struct BuiltinSystem {
  std::string name;
  LagrangianSystem system;
  std::optional<AnalyticFlow> flow;
  std::optional<AnalyticHJ> hj;
  std::optional<AnalyticChain> chain;
  SampleGrid q_grid;   // on Q
  SampleGrid tq_grid;  // on TQ, coordinates (q, v)
};

const std::vector<std::string>& builtin_names();

/// Throws InputError for an unknown name.
BuiltinSystem builtin(std::string_view name);

}  // namespace hjk
