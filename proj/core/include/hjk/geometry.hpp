#pragma once

// Lagrangian systems and their basic geometric objects in coordinates:
// Legendre map, energy, velocity Hessian, the 2-form omega_L, and the
// pullbacks of theta_L and omega_L by a section X : Q -> TQ.
//
// 2-form convention (used everywhere): a 2-form beta on an m-dimensional space
// is stored as the antisymmetric matrix B with
//   beta = sum_{a<b} B_ab dz^a ^ dz^b,   B_ab = beta(e_a, e_b),
// so that contraction reads (i(X) beta)_b = sum_a X^a B_ab.
// On T*Q the canonical form is omega = sum_i dq^i ^ dp_i, i.e.
//   omega(a, b) = a_q . b_p - a_p . b_q.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjk/grid.hpp"
#include "hjk/phase.hpp"

namespace hjk {

class LagrangianSystem {
 public:
  /// Validates that L references only q/v and that H and every constraint
  /// reference only q/p.
  LagrangianSystem(int dof, Expr lagrangian, std::optional<Expr> hamiltonian = std::nullopt,
                   std::vector<Expr> constraints = {}, std::string name = {});

  static LagrangianSystem parse(int dof, std::string_view lagrangian,
                                std::optional<std::string_view> hamiltonian = std::nullopt,
                                const std::vector<std::string>& constraints = {}, std::string name = {});

  int dof() const noexcept { return dof_; }
  const std::string& name() const noexcept { return name_; }
  const Expr& lagrangian() const noexcept { return lagrangian_; }
  const std::optional<Expr>& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<Expr>& constraints() const noexcept { return constraints_; }

  /// The Hamiltonian, or PreconditionError if none was declared.
  const Expr& require_hamiltonian() const;

 private:
  int dof_;
  Expr lagrangian_;
  std::optional<Expr> hamiltonian_;
  std::vector<Expr> constraints_;
  std::string name_;
};

/// All first and second derivatives of L at (q, v).
/// Lvq(i, j) = d2L / dv^i dq^j, W = Lvv.
struct LagrangianJet {
  double value = 0.0;
  Vector Lq;
  Vector Lv;
  Matrix Lqq;
  Matrix Lvq;
  Matrix W;
};

LagrangianJet lagrangian_jet(const LagrangianSystem& sys, const TangentPoint& pt);

CotangentPoint legendre_map(const LagrangianSystem& sys, const TangentPoint& pt);

/// E_L = v . dL/dv - L.
double lagrangian_energy(const LagrangianSystem& sys, const TangentPoint& pt);

/// Hamiltonian value at a cotangent point.
double hamiltonian_value(const LagrangianSystem& sys, const CotangentPoint& pt);

/// Singular values at or below 1e-8 * max(largest, 1e-12) count as zero.
int numerical_rank(const Vector& singular_values);

struct VelocityHessian {
  Matrix W;
  Vector singular_values;
  int rank = 0;
  bool regular = false;
};

VelocityHessian velocity_hessian(const LagrangianSystem& sys, const TangentPoint& pt);

/// Jacobian of FL : (q, v) -> (q, dL/dv), as the 2n x 2n block matrix [I 0; Lvq W].
Matrix legendre_jacobian(const LagrangianJet& jet);

/// omega_L = -d theta_L at (q, v) as a 2n x 2n antisymmetric matrix over (dq, dv).
Matrix omega_L(const LagrangianSystem& sys, const TangentPoint& pt);

/// Canonical symplectic pairing on T*Q for vectors laid out as (dq, dp).
double canonical_omega(const Vector& a, const Vector& b);

/// max |H(FL(q, v)) - E_L(q, v)| over a grid on TQ (coordinates q then v).
double projectability_defect(const LagrangianSystem& sys, const SampleGrid& tq_grid);

// ---------------------------------------------------------------------------
// Sections X : Q -> TQ

struct SectionJet {
  Vector value;
  Matrix jacobian;  // (i, j) = dX^i / dq^j
};

class SectionX {
 public:
  virtual ~SectionX() = default;
  virtual int dof() const = 0;
  virtual Vector value(const Vector& q) const = 0;
  virtual SectionJet jet(const Vector& q) const = 0;
  /// Whether q lies in the region where the section is defined.
  virtual bool contains(const Vector& q) const {
    (void)q;
    return true;
  }
};

/// A section given by one expression over q per component.
class ExprSection final : public SectionX {
 public:
  explicit ExprSection(std::vector<Expr> components);
  static ExprSection parse(const std::vector<std::string>& components, int dof);

  int dof() const override { return static_cast<int>(components_.size()); }
  Vector value(const Vector& q) const override;
  SectionJet jet(const Vector& q) const override;

  const std::vector<Expr>& components() const noexcept { return components_; }

 private:
  std::vector<Expr> components_;
};

/// A 2-form on Q at a base point, stored antisymmetric.
class Form2OnQ {
 public:
  Form2OnQ(Vector base, const Matrix& components);

  const Vector& base() const noexcept { return base_; }
  const Matrix& components() const noexcept { return components_; }

  /// (i(X) beta)_j = sum_i X^i B_ij.
  Vector contract(const Vector& x) const;

 private:
  Vector base_;
  Matrix components_;
};

/// Components of X* theta_L, which equal alpha = FL o X: alpha_i = dL/dv^i (q, X(q)).
Vector pullback_theta(const LagrangianSystem& sys, const SectionX& x, const Vector& q);

/// X* omega_L computed as P^T omega_L P with P = [I; DX].
Form2OnQ pullback_omega_L(const LagrangianSystem& sys, const SectionX& x, const Vector& q);

}  // namespace hjk
