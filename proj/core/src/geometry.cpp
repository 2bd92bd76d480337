#include "hjk/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hjk {

namespace {

void require_families(const Expr& e, bool allow_v, bool allow_p, const std::string& what) {
  const FamilySet f = e.families();
  if ((f.v && !allow_v) || (f.p && !allow_p)) {
    throw InputError(what + " references a forbidden variable family: " + e.print());
  }
}

}  // namespace

LagrangianSystem::LagrangianSystem(int dof, Expr lagrangian, std::optional<Expr> hamiltonian,
                                   std::vector<Expr> constraints, std::string name)
    : dof_(dof),
      lagrangian_(std::move(lagrangian)),
      hamiltonian_(std::move(hamiltonian)),
      constraints_(std::move(constraints)),
      name_(std::move(name)) {
  if (dof_ < 1) throw InputError("dof must be at least 1");
  if (lagrangian_.empty()) throw InputError("lagrangian is required");
  require_families(lagrangian_, true, false, "lagrangian");
  if (hamiltonian_) require_families(*hamiltonian_, false, true, "hamiltonian");
  for (const auto& c : constraints_) require_families(c, false, true, "constraint");
}

LagrangianSystem LagrangianSystem::parse(int dof, std::string_view lagrangian,
                                         std::optional<std::string_view> hamiltonian,
                                         const std::vector<std::string>& constraints, std::string name) {
  std::optional<Expr> h;
  if (hamiltonian) h = Expr::parse(*hamiltonian, dof);
  std::vector<Expr> cs;
  cs.reserve(constraints.size());
  for (const auto& c : constraints) cs.push_back(Expr::parse(c, dof));
  return LagrangianSystem(dof, Expr::parse(lagrangian, dof), std::move(h), std::move(cs), std::move(name));
}

const Expr& LagrangianSystem::require_hamiltonian() const {
  if (!hamiltonian_) throw PreconditionError("system '" + name_ + "' declares no hamiltonian");
  return *hamiltonian_;
}

LagrangianJet lagrangian_jet(const LagrangianSystem& sys, const TangentPoint& pt) {
  const PhaseJet j = phase_jet(sys.lagrangian(), Family::v, pt.q, pt.v);
  return {j.value, j.dx, j.dy, j.xx, j.yx, j.yy};
}

CotangentPoint legendre_map(const LagrangianSystem& sys, const TangentPoint& pt) {
  const PhaseGrad g = phase_grad(sys.lagrangian(), Family::v, pt.q, pt.v);
  return CotangentPoint(pt.q, g.dy);
}

double lagrangian_energy(const LagrangianSystem& sys, const TangentPoint& pt) {
  const PhaseGrad g = phase_grad(sys.lagrangian(), Family::v, pt.q, pt.v);
  return pt.v.dot(g.dy) - g.value;
}

double hamiltonian_value(const LagrangianSystem& sys, const CotangentPoint& pt) {
  return phase_value(sys.require_hamiltonian(), Family::p, pt.q, pt.p);
}

int numerical_rank(const Vector& singular_values) {
  if (singular_values.size() == 0) return 0;
  const double threshold = 1e-8 * std::max(singular_values.maxCoeff(), 1e-12);
  return static_cast<int>((singular_values.array() > threshold).count());
}

VelocityHessian velocity_hessian(const LagrangianSystem& sys, const TangentPoint& pt) {
  VelocityHessian out;
  out.W = phase_jet(sys.lagrangian(), Family::v, pt.q, pt.v).yy;
  out.singular_values = Eigen::JacobiSVD<Matrix>(out.W).singularValues();
  out.rank = numerical_rank(out.singular_values);
  out.regular = out.rank == sys.dof();
  return out;
}

Matrix legendre_jacobian(const LagrangianJet& jet) {
  const Eigen::Index n = jet.Lv.size();
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topLeftCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = jet.Lvq;
  j.bottomRightCorner(n, n) = jet.W;
  return j;
}

Matrix omega_L(const LagrangianSystem& sys, const TangentPoint& pt) {
  // theta_L = Lv_i dq^i, so -d theta_L has
  //   dq^k ^ dq^i coefficient  Lvq(k,i) - Lvq(i,k)  (k<i handled by antisymmetry)
  //   dq^i ^ dv^k coefficient  W_ik
  const LagrangianJet jet = lagrangian_jet(sys, pt);
  const Eigen::Index n = jet.Lv.size();
  Matrix om = Matrix::Zero(2 * n, 2 * n);
  om.topLeftCorner(n, n) = jet.Lvq - jet.Lvq.transpose();
  om.topRightCorner(n, n) = jet.W;
  om.bottomLeftCorner(n, n) = -jet.W.transpose();
  return om;
}

double canonical_omega(const Vector& a, const Vector& b) {
  const Eigen::Index n = a.size() / 2;
  return a.head(n).dot(b.tail(n)) - a.tail(n).dot(b.head(n));
}

double projectability_defect(const LagrangianSystem& sys, const SampleGrid& tq_grid) {
  const int n = sys.dof();
  if (tq_grid.dim() != 2 * n) throw InputError("projectability grid must cover (q, v)");
  double worst = 0.0;
  for (std::size_t k = 0; k < tq_grid.size(); ++k) {
    const Vector z = tq_grid.point(k);
    const TangentPoint pt(z.head(n), z.tail(n));
    const double defect = std::abs(hamiltonian_value(sys, legendre_map(sys, pt)) - lagrangian_energy(sys, pt));
    worst = std::max(worst, defect);
  }
  return worst;
}

// ---------------------------------------------------------------------------

ExprSection::ExprSection(std::vector<Expr> components) : components_(std::move(components)) {
  if (components_.empty()) throw InputError("section needs at least one component");
  for (const auto& c : components_) {
    if (c.dof() != static_cast<int>(components_.size())) {
      throw InputError("section has " + std::to_string(components_.size()) + " components but expression dof is " +
                       std::to_string(c.dof()));
    }
    const FamilySet f = c.families();
    if (f.v || f.p) throw InputError("section components may reference only q: " + c.print());
  }
}

ExprSection ExprSection::parse(const std::vector<std::string>& components, int dof) {
  if (static_cast<int>(components.size()) != dof) {
    throw InputError("section needs " + std::to_string(dof) + " components, got " + std::to_string(components.size()));
  }
  std::vector<Expr> es;
  es.reserve(components.size());
  for (const auto& c : components) es.push_back(Expr::parse(c, dof));
  return ExprSection(std::move(es));
}

Vector ExprSection::value(const Vector& q) const {
  Vector x(dof());
  for (int i = 0; i < dof(); ++i) x[i] = config_value(components_[static_cast<std::size_t>(i)], q);
  return x;
}

SectionJet ExprSection::jet(const Vector& q) const {
  SectionJet out{Vector(dof()), Matrix(dof(), dof())};
  for (int i = 0; i < dof(); ++i) {
    const ConfigGrad g = config_grad(components_[static_cast<std::size_t>(i)], q);
    out.value[i] = g.value;
    out.jacobian.row(i) = g.dq.transpose();
  }
  return out;
}

Form2OnQ::Form2OnQ(Vector base, const Matrix& components)
    : base_(std::move(base)), components_(0.5 * (components - components.transpose())) {}

Vector Form2OnQ::contract(const Vector& x) const { return components_.transpose() * x; }

Vector pullback_theta(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  return legendre_map(sys, TangentPoint(q, x.value(q))).p;
}

Form2OnQ pullback_omega_L(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  const SectionJet sj = x.jet(q);
  const Matrix om = omega_L(sys, TangentPoint(q, sj.value));
  const Eigen::Index n = q.size();
  Matrix push(2 * n, n);
  push.topRows(n).setIdentity();
  push.bottomRows(n) = sj.jacobian;
  return Form2OnQ(q, push.transpose() * om * push);
}

}  // namespace hjk
