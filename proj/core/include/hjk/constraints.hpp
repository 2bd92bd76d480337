#pragma once

// Singular Lagrangians: degeneracy of the velocity Hessian, primary
// Hamiltonian constraints, their transport xi -> i(K) d xi to Lagrangian
// constraints, and stabilization toward the final constraint submanifold.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hjk/geometry.hpp"
#include "hjk/grid.hpp"

namespace hjk {

enum class ConstraintSide { hamiltonian, lagrangian };

/// declared: supplied by the user. transported: i(K) d xi of a Hamiltonian
/// constraint. flow_differenced: numerical time derivative of a Lagrangian
/// constraint along K-consistent motion (an approximation, see stabilize()).
enum class Provenance { declared, transported, flow_differenced };

std::string_view side_name(ConstraintSide s);
std::string_view provenance_name(Provenance p);

class ConstraintFunction {
 public:
  using Evaluator = std::function<double(const TangentPoint&)>;

  /// xi(q, p) given as an expression over the q/p families.
  static ConstraintFunction hamiltonian(Expr xi, int generation = 0, Provenance provenance = Provenance::declared);
  /// chi(q, v) given as an expression over the q/v families.
  static ConstraintFunction lagrangian(Expr chi, int generation = 0, Provenance provenance = Provenance::declared);
  /// chi(q, v) given by an evaluator.
  static ConstraintFunction lagrangian(Evaluator chi, std::string description, int generation,
                                       Provenance provenance);

  ConstraintSide side() const noexcept { return side_; }
  int generation() const noexcept { return generation_; }
  Provenance provenance() const noexcept { return provenance_; }
  const std::string& description() const noexcept { return description_; }

  /// The Hamiltonian-side expression; Error on a Lagrangian-side constraint.
  const Expr& expression() const;

  /// xi at a point of T*Q (Hamiltonian side only).
  double at(const CotangentPoint& pt) const;
  /// chi(q, v) for the Lagrangian side, xi(FL(q, v)) for the Hamiltonian side.
  double on_tangent(const LagrangianSystem& sys, const TangentPoint& pt) const;

 private:
  ConstraintFunction() = default;

  ConstraintSide side_ = ConstraintSide::hamiltonian;
  int generation_ = 0;
  Provenance provenance_ = Provenance::declared;
  std::string description_;
  Expr expr_;
  Evaluator eval_;
};

enum class StabilizationStatus { converged, max_iterations, inconsistent };

std::string_view status_name(StabilizationStatus s);

struct ConstraintSet {
  std::vector<ConstraintFunction> constraints;
  SampleGrid grid;  // on TQ, coordinates (q, v)
  StabilizationStatus status = StabilizationStatus::converged;
  int iterations = 0;
  /// feasible[k]: grid point k satisfies every Lagrangian-side constraint within tol.
  std::vector<bool> feasible;
};

struct Degeneracy {
  int min_rank = 0;
  int dof = 0;
  Vector representative;  // (q, v) of the first minimizing grid point
  Matrix null_basis;      // orthonormal columns spanning ker W there
};

/// Rank of W over a TQ grid. Null vectors are sign-normalized so their first
/// non-negligible entry is positive.
Degeneracy detect_degeneracy(const LagrangianSystem& sys, const SampleGrid& tq_grid);

/// max over the grid of |xi(FL(q, v))|.
double primary_constraint_residual(const LagrangianSystem& sys, const ConstraintFunction& xi,
                                   const SampleGrid& tq_grid);

/// chi(q, v) = v^i dxi/dq^i + dL/dq^i dxi/dp_i, both partials taken at (q, FL(q, v)).
ConstraintFunction transport_constraint(const LagrangianSystem& sys, const ConstraintFunction& xi);

/// Forward-difference step used when differentiating Lagrangian-side constraints
/// along K-consistent motion.
inline constexpr double kFlowDifferenceStep = 1e-4;

/// Runs the constraint algorithm from the given primaries.
///
/// Hamiltonian-side constraints are transported exactly with i(K) d xi.
/// Lagrangian-side constraints chi are propagated numerically: at each point,
/// K-consistent accelerations are a = W^+ (Lq - Lvq v) + N lambda with N
/// spanning ker W, the time derivatives of all current Lagrangian constraints
/// are forward-differenced along (v, a), and lambda is chosen by least squares
/// to annihilate them. What cannot be annihilated is a new constraint.
ConstraintSet stabilize(const LagrangianSystem& sys, const std::vector<ConstraintFunction>& primaries,
                        const SampleGrid& tq_grid, double tol, int max_iter);

struct AdmissibilityEntry {
  std::string description;
  double residual = 0.0;
  bool pass = false;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityEntry> entries;
  bool admissible = true;
};

/// max over a Q grid of |chi(q, X(q))| (Lagrangian side) and |xi(FL(q, X(q)))|
/// (Hamiltonian side), per constraint of a converged set.
AdmissibilityReport check_X_admissible(const LagrangianSystem& sys, const SectionX& x, const ConstraintSet& final_set,
                                       const SampleGrid& q_grid, double tol);

}  // namespace hjk
