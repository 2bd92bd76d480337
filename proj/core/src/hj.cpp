#include "hjk/hj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "detail/ode.hpp"

namespace hjk {

namespace {

std::string format_point(const Vector& q) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (i) s += ", ";
    s += format_number(q[i]);
  }
  return s + ")";
}

double max_abs(const Vector& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const Matrix& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

// Runs `body` on every grid point, re-raising numerical errors with the point attached.
template <class Body>
void for_each_point(const SampleGrid& grid, Body&& body) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vector q = grid.point(k);
    try {
      body(q);
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at q=" + format_point(q));
    }
  }
}

struct SectionState {
  SectionJet x;
  LagrangianJet l;
};

SectionState section_state(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  SectionJet sj = x.jet(q);
  LagrangianJet lj = lagrangian_jet(sys, TangentPoint(q, sj.value));
  return {std::move(sj), std::move(lj)};
}

Matrix alpha_jacobian_from(const SectionState& s) { return s.l.Lvq + s.l.W * s.x.jacobian; }

Vector energy_gradient_from(const SectionState& s) {
  const Vector& v = s.x.value;
  const Vector dE_dq = s.l.Lvq.transpose() * v - s.l.Lq;
  const Vector dE_dv = s.l.W.transpose() * v;
  return dE_dq + s.x.jacobian.transpose() * dE_dv;
}

}  // namespace

// ---------------------------------------------------------------------------

OneFormAlpha OneFormAlpha::induced(const LagrangianSystem& sys, const SectionX& x) {
  if (x.dof() != sys.dof()) throw InputError("section dimension does not match the system");
  OneFormAlpha a;
  a.dof_ = sys.dof();
  a.sys_ = &sys;
  a.section_ = &x;
  return a;
}

OneFormAlpha OneFormAlpha::direct(std::vector<Expr> components) {
  if (components.empty()) throw InputError("1-form needs at least one component");
  const int n = static_cast<int>(components.size());
  for (const auto& c : components) {
    if (c.dof() != n) throw InputError("1-form component dof does not match its component count");
    const FamilySet f = c.families();
    if (f.v || f.p) throw InputError("1-form components may reference only q: " + c.print());
  }
  OneFormAlpha a;
  a.dof_ = n;
  a.components_ = std::move(components);
  return a;
}

OneFormAlpha OneFormAlpha::parse(const std::vector<std::string>& components, int dof) {
  if (static_cast<int>(components.size()) != dof) {
    throw InputError("1-form needs " + std::to_string(dof) + " components, got " + std::to_string(components.size()));
  }
  std::vector<Expr> es;
  for (const auto& c : components) es.push_back(Expr::parse(c, dof));
  return direct(std::move(es));
}

Vector OneFormAlpha::value(const Vector& q) const {
  if (section_) return pullback_theta(*sys_, *section_, q);
  Vector a(dof_);
  for (int i = 0; i < dof_; ++i) a[i] = config_value(components_[static_cast<std::size_t>(i)], q);
  return a;
}

Matrix OneFormAlpha::jacobian(const Vector& q) const {
  if (section_) return alpha_jacobian(*sys_, *section_, q);
  Matrix j(dof_, dof_);
  for (int i = 0; i < dof_; ++i) j.row(i) = config_grad(components_[static_cast<std::size_t>(i)], q).dq.transpose();
  return j;
}

Matrix alpha_jacobian(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  return alpha_jacobian_from(section_state(sys, x, q));
}

Matrix closedness_matrix(const OneFormAlpha& alpha, const Vector& q) {
  const Matrix j = alpha.jacobian(q);
  return j.transpose() - j;
}

Vector energy_pullback_gradient(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  return energy_gradient_from(section_state(sys, x, q));
}

double condition3_residual(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  const SectionState s = section_state(sys, x, q);
  // Only the dp-components can differ; the dq-components are X on both sides.
  return max_abs(Vector(alpha_jacobian_from(s) * s.x.value - s.l.Lq));
}

double condition4_residual(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  const SectionState s = section_state(sys, x, q);
  const Matrix j = alpha_jacobian_from(s);
  const Matrix c = j.transpose() - j;
  return max_abs(Vector(c.transpose() * s.x.value + energy_gradient_from(s)));
}

double condition5_residual(const LagrangianSystem& sys, const SectionX& x, const Vector& q) {
  const Form2OnQ pulled = pullback_omega_L(sys, x, q);
  const Vector g = energy_pullback_gradient(sys, x, q);
  return max_abs(Vector(pulled.contract(x.value(q)) - g));
}

double lift_and_compare(const LagrangianSystem& sys, const SectionX& x, const Vector& q0, double horizon, double h) {
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  const int steps = static_cast<int>(std::llround(horizon / h));
  detail::require_step(h, steps);
  if (!x.contains(q0)) throw DomainExitError("initial point lies outside the section domain", 0.0);

  const LagrangianTrajectory lifted = integrate_regular(sys, TangentPoint(q0, x.value(q0)), h, steps);

  auto flow = [&x](double t, const Vector& q) -> Vector {
    if (!x.contains(q)) throw DomainExitError("flow of X left the section domain at t=" + std::to_string(t), t);
    try {
      return x.value(q);
    } catch (const DomainError& e) {
      throw DomainExitError(std::string("flow of X left the section domain at t=") + std::to_string(t) + ": " +
                                e.what(),
                            t);
    }
  };

  Vector gamma = q0;
  double worst = 0.0;
  for (int k = 0;; ++k) {
    const auto& s = lifted.states[static_cast<std::size_t>(k)];
    const double dev = max_abs(Vector(s.q - gamma)) + max_abs(Vector(s.v - flow(k * h, gamma)));
    worst = std::max(worst, dev);
    if (k == steps) break;
    gamma = detail::step(flow, k * h, gamma, h, Method::rk4);
  }
  return worst;
}

// ---------------------------------------------------------------------------

std::vector<HJReport::Entry> HJReport::entries() const {
  std::vector<Entry> out;
  auto add = [&](const char* name, const std::optional<double>& r) {
    if (r) out.push_back({name, *r, *r <= tol});
  };
  add("cond1_lift", cond1_lift);
  add("cond3_operator", cond3_operator);
  add("cond4_form", cond4_form);
  add("cond5_pullback", cond5_pullback);
  add("closedness", closedness);
  add("energy_variation", energy_variation);
  return out;
}

bool HJReport::all_pass() const {
  const auto es = entries();
  return std::all_of(es.begin(), es.end(), [](const Entry& e) { return e.pass; });
}

std::string describe(const SampleGrid& grid) {
  std::ostringstream os;
  for (std::size_t i = 0; i < grid.axes().size(); ++i) {
    const auto& a = grid.axes()[i];
    if (i) os << " x ";
    os << '[' << format_number(a.lo) << ", " << format_number(a.hi) << "]:" << a.points;
  }
  return os.str();
}

HJReport check_standard_hj(const LagrangianSystem& sys, const SectionX& x, const SampleGrid& grid, double tol,
                           bool generalized) {
  if (grid.dim() != sys.dof()) throw InputError("grid dimension does not match the system");
  if (x.dof() != sys.dof()) throw InputError("section dimension does not match the system");

  HJReport r;
  r.tol = tol;
  r.samples = grid.size();
  r.domain = describe(grid);
  r.rows.reserve(grid.size());

  double c3 = 0.0, c4 = 0.0, c5 = 0.0, closed = 0.0;
  double emin = std::numeric_limits<double>::infinity();
  double emax = -emin;

  for_each_point(grid, [&](const Vector& q) {
    const SectionState s = section_state(sys, x, q);
    const Matrix j = alpha_jacobian_from(s);
    const Matrix c = j.transpose() - j;
    const Vector g = energy_gradient_from(s);

    HJRow row;
    row.q = q;
    row.cond3 = max_abs(Vector(j * s.x.value - s.l.Lq));
    row.cond4 = max_abs(Vector(c.transpose() * s.x.value + g));
    row.cond5 = condition5_residual(sys, x, q);
    row.closedness = max_abs(c);
    row.energy = s.x.value.dot(s.l.Lv) - s.l.value;

    c3 = std::max(c3, row.cond3);
    c4 = std::max(c4, row.cond4);
    c5 = std::max(c5, row.cond5);
    closed = std::max(closed, row.closedness);
    emin = std::min(emin, row.energy);
    emax = std::max(emax, row.energy);
    r.rows.push_back(std::move(row));
  });

  r.cond3_operator = c3;
  r.cond4_form = c4;
  r.cond5_pullback = c5;
  if (!generalized) {
    r.closedness = closed;
    r.energy_variation = emax - emin;
  }
  return r;
}

namespace {

struct HamiltonianState {
  Vector alpha;
  Matrix c;
  double h = 0.0;
  Vector x;
  Vector dh;  // gradient over q of H(q, alpha(q))
};

HamiltonianState hamiltonian_state(const Expr& ham, const OneFormAlpha& alpha, const Vector& q) {
  HamiltonianState s;
  s.alpha = alpha.value(q);
  const Matrix j = alpha.jacobian(q);
  s.c = j.transpose() - j;
  const PhaseGrad g = phase_grad(ham, Family::p, q, s.alpha);
  s.h = g.value;
  s.x = g.dy;
  s.dh = g.dx + j.transpose() * g.dy;
  return s;
}

}  // namespace

HJReport check_hamiltonian_generalized(const LagrangianSystem& sys, const OneFormAlpha& alpha, const SampleGrid& grid,
                                       double tol) {
  const Expr& ham = sys.require_hamiltonian();
  if (grid.dim() != sys.dof() || alpha.dof() != sys.dof()) throw InputError("dimension mismatch");

  HJReport r;
  r.tol = tol;
  r.samples = grid.size();
  r.domain = describe(grid);
  double worst = 0.0;
  for_each_point(grid, [&](const Vector& q) {
    const HamiltonianState s = hamiltonian_state(ham, alpha, q);
    HJRow row;
    row.q = q;
    row.cond3 = std::numeric_limits<double>::quiet_NaN();
    row.cond5 = std::numeric_limits<double>::quiet_NaN();
    row.cond4 = max_abs(Vector(s.c.transpose() * s.x + s.dh));
    row.closedness = max_abs(s.c);
    row.energy = s.h;
    worst = std::max(worst, row.cond4);
    r.rows.push_back(std::move(row));
  });
  r.cond4_form = worst;
  return r;
}

HJReport check_hamiltonian_hj(const LagrangianSystem& sys, const OneFormAlpha& alpha, const SampleGrid& grid,
                              double tol) {
  const Expr& ham = sys.require_hamiltonian();
  if (grid.dim() != sys.dof() || alpha.dof() != sys.dof()) throw InputError("dimension mismatch");

  HJReport r;
  r.tol = tol;
  r.samples = grid.size();
  r.domain = describe(grid);
  double closed = 0.0;
  double hmin = std::numeric_limits<double>::infinity();
  double hmax = -hmin;
  for_each_point(grid, [&](const Vector& q) {
    const HamiltonianState s = hamiltonian_state(ham, alpha, q);
    Eigen::Index i = 0, j = 0;
    const double worst_entry = s.c.cwiseAbs().maxCoeff(&i, &j);
    if (worst_entry > tol) {
      throw PreconditionError("1-form is not closed: |d alpha(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                              ")| = " + format_number(worst_entry) + " at q=" + format_point(q));
    }
    HJRow row;
    row.q = q;
    row.cond3 = std::numeric_limits<double>::quiet_NaN();
    row.cond4 = std::numeric_limits<double>::quiet_NaN();
    row.cond5 = std::numeric_limits<double>::quiet_NaN();
    row.closedness = worst_entry;
    row.energy = s.h;
    closed = std::max(closed, worst_entry);
    hmin = std::min(hmin, s.h);
    hmax = std::max(hmax, s.h);
    r.rows.push_back(std::move(row));
  });
  r.closedness = closed;
  r.energy_variation = hmax - hmin;
  return r;
}

// ---------------------------------------------------------------------------
// Level-set sections

LevelSetSection::LevelSetSection(const LagrangianSystem& sys, double energy, Interval interval, int branch)
    : sys_(sys), use_hamiltonian_(sys.hamiltonian().has_value()), energy_(energy), interval_(interval),
      branch_(branch) {
  if (sys.dof() != 1) throw UnsupportedStructureError("level-set solver needs a 1-dof system");
  if (branch != 1 && branch != -1) throw InputError("branch must be +1 or -1");
  (void)SampleGrid(std::vector<Interval>{interval});  // validates the interval

  const int m = interval.points;
  const double dq = (interval.hi - interval.lo) / (m - 1);
  q_.resize(static_cast<std::size_t>(m));
  y_.resize(q_.size());
  p_.resize(q_.size());
  x_.resize(q_.size());
  w_.resize(q_.size());

  double prev_slope = 0.0;
  for (int k = 0; k < m; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double q = axis_value(interval, k);
    double guess = 0.0;
    if (k == 0) {
      guess = branch * (energy > 0.0 ? std::sqrt(2.0 * energy) : 1.0);
    } else {
      guess = y_[ks - 1];
    }
    const double y = solve(q, guess);
    const Fibre fb = fibre(q, y);
    const double slope = -fb.fq / fb.fy;
    if (k > 0) {
      const double step = std::abs(y - y_[ks - 1]);
      const double expected = std::max(std::abs(slope), std::abs(prev_slope)) * dq;
      if (step > 10.0 * expected + 1e-9 * (1.0 + std::abs(y))) {
        throw BranchJumpError("level set jumped between branches near q=" + format_number(q));
      }
    }
    prev_slope = slope;
    const auto obs = observe(q, y);
    if (obs[0] * branch <= 0.0) {
      throw BranchJumpError("momentum left the requested branch at q=" + format_number(q));
    }
    q_[ks] = q;
    y_[ks] = y;
    p_[ks] = obs[0];
    x_[ks] = obs[1];
  }

  // Composite Simpson with the midpoint momentum solved on the level set.
  w_[0] = 0.0;
  for (std::size_t k = 0; k + 1 < q_.size(); ++k) {
    const double mid = 0.5 * (q_[k] + q_[k + 1]);
    const double pm = observe(mid, solve(mid, 0.5 * (y_[k] + y_[k + 1])))[0];
    w_[k + 1] = w_[k] + (q_[k + 1] - q_[k]) / 6.0 * (p_[k] + 4.0 * pm + p_[k + 1]);
  }
}

LevelSetSection::Fibre LevelSetSection::fibre(double q, double y) const {
  const Vector qv = Vector::Constant(1, q);
  const Vector yv = Vector::Constant(1, y);
  if (use_hamiltonian_) {
    const PhaseGrad g = phase_grad(*sys_.hamiltonian(), Family::p, qv, yv);
    return {g.value, g.dy[0], g.dx[0]};
  }
  const LagrangianJet j = lagrangian_jet(sys_, TangentPoint(qv, yv));
  return {y * j.Lv[0] - j.value, y * j.W(0, 0), y * j.Lvq(0, 0) - j.Lq[0]};
}

double LevelSetSection::fibre_minimum(double q) const {
  if (!use_hamiltonian_) return fibre(q, 0.0).f;  // dE_L/dv = v W vanishes only at v = 0
  const Vector qv = Vector::Constant(1, q);
  double y = 0.0;
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    const PhaseJet j = phase_jet(*sys_.hamiltonian(), Family::p, qv, Vector::Constant(1, y));
    if (j.yy(0, 0) == 0.0) break;
    const double dy = j.dy[0] / j.yy(0, 0);
    y -= dy;
    if (std::abs(dy) <= kNewtonTolerance * (1.0 + std::abs(y))) break;
  }
  return fibre(q, y).f;
}

double LevelSetSection::solve(double q, double guess) const {
  const double scale = std::max(1.0, std::abs(energy_));
  double y = guess;
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    const Fibre fb = fibre(q, y);
    const double r = fb.f - energy_;
    if (std::abs(r) <= kNewtonTolerance * scale) {
      if (std::abs(fb.fy) < 1e-12) break;
      return y;
    }
    if (fb.fy == 0.0 || !std::isfinite(fb.fy)) break;
    const double dy = r / fb.fy;
    y -= dy;
    if (std::abs(dy) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(y))) {
      const Fibre last = fibre(q, y);
      if (std::abs(last.f - energy_) <= 1e-10 * scale && std::abs(last.fy) >= 1e-12) return y;
      break;
    }
  }
  double minimum = std::numeric_limits<double>::quiet_NaN();
  try {
    minimum = fibre_minimum(q);
  } catch (const NumericalError&) {
  }
  if (minimum > energy_) {
    throw BelowFiberMinimumError("energy " + format_number(energy_) + " is below the fibre minimum " +
                                 format_number(minimum) + " at q=" + format_number(q));
  }
  throw TurningPointError("Newton did not converge on the level set (turning point?) at q=" + format_number(q), q);
}

std::array<double, 3> LevelSetSection::observe(double q, double y) const {
  const Vector qv = Vector::Constant(1, q);
  const Vector yv = Vector::Constant(1, y);
  const Fibre fb = fibre(q, y);
  const double dy_dq = -fb.fq / fb.fy;
  if (use_hamiltonian_) {
    const PhaseJet j = phase_jet(*sys_.hamiltonian(), Family::p, qv, yv);
    return {y, j.dy[0], j.yx(0, 0) + j.yy(0, 0) * dy_dq};
  }
  const double p = phase_grad(sys_.lagrangian(), Family::v, qv, yv).dy[0];
  return {p, y, dy_dq};
}

double LevelSetSection::warm_start(double q) const {
  const double t = (q - interval_.lo) / (interval_.hi - interval_.lo);
  const auto last = static_cast<double>(q_.size() - 1);
  const auto idx = static_cast<std::size_t>(std::clamp(std::round(t * last), 0.0, last));
  return y_[idx];
}

double LevelSetSection::momentum(double q) const { return observe(q, solve(q, warm_start(q)))[0]; }

Vector LevelSetSection::value(const Vector& q) const {
  return Vector::Constant(1, observe(q[0], solve(q[0], warm_start(q[0])))[1]);
}

SectionJet LevelSetSection::jet(const Vector& q) const {
  const auto obs = observe(q[0], solve(q[0], warm_start(q[0])));
  return {Vector::Constant(1, obs[1]), Matrix::Constant(1, 1, obs[2])};
}

bool LevelSetSection::contains(const Vector& q) const {
  const double slack = 1e-12 * (interval_.hi - interval_.lo);
  return q.size() == 1 && q[0] >= interval_.lo - slack && q[0] <= interval_.hi + slack;
}

HJSolution1D solve_hj_1dof(const LagrangianSystem& sys, double energy, Interval interval, int branch) {
  auto section = std::make_shared<const LevelSetSection>(sys, energy, interval, branch);
  HJSolution1D out;
  out.q = section->grid_q();
  out.p = section->grid_p();
  out.x = section->grid_x();
  out.w = section->grid_w();
  out.section = std::move(section);
  return out;
}

// ---------------------------------------------------------------------------
// Separable systems

ProductSection::ProductSection(std::vector<std::shared_ptr<const LevelSetSection>> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw InputError("product section needs at least one factor");
}

Vector ProductSection::value(const Vector& q) const {
  Vector x(dof());
  for (int i = 0; i < dof(); ++i) x[i] = factors_[static_cast<std::size_t>(i)]->value(q.segment(i, 1))[0];
  return x;
}

SectionJet ProductSection::jet(const Vector& q) const {
  SectionJet out{Vector(dof()), Matrix::Zero(dof(), dof())};
  for (int i = 0; i < dof(); ++i) {
    const SectionJet f = factors_[static_cast<std::size_t>(i)]->jet(q.segment(i, 1));
    out.value[i] = f.value[0];
    out.jacobian(i, i) = f.jacobian(0, 0);
  }
  return out;
}

bool ProductSection::contains(const Vector& q) const {
  for (int i = 0; i < dof(); ++i) {
    if (!factors_[static_cast<std::size_t>(i)]->contains(q.segment(i, 1))) return false;
  }
  return true;
}

namespace {

// Groups the additive terms of e by the single coordinate index they use.
// Variable-free terms go to coordinate 0.
std::vector<Expr> split_terms(const Expr& e, int n, const char* what) {
  std::vector<std::optional<Expr>> groups(static_cast<std::size_t>(n));
  for (const Expr& term : e.additive_terms()) {
    const std::set<int> idx = term.indices();
    if (idx.size() > 1) {
      throw UnsupportedStructureError(std::string(what) + " is not separable: term " + term.print() +
                                      " couples several coordinates");
    }
    const int k = idx.empty() ? 0 : *idx.begin();
    std::vector<int> map(static_cast<std::size_t>(n), -1);
    map[static_cast<std::size_t>(k)] = 0;
    Expr local = term.reindexed(map, 1);
    auto& g = groups[static_cast<std::size_t>(k)];
    g = g ? *g + local : local;
  }
  std::vector<Expr> out;
  out.reserve(groups.size());
  for (auto& g : groups) out.push_back(g ? *g : Expr::constant(0.0, 1));
  return out;
}

}  // namespace

std::vector<LagrangianSystem> split_separable(const LagrangianSystem& sys) {
  const int n = sys.dof();
  const std::vector<Expr> ls = split_terms(sys.lagrangian(), n, "lagrangian");
  std::vector<Expr> hs;
  if (sys.hamiltonian()) hs = split_terms(*sys.hamiltonian(), n, "hamiltonian");
  std::vector<LagrangianSystem> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::optional<Expr> h;
    if (!hs.empty()) h = hs[static_cast<std::size_t>(k)];
    out.emplace_back(1, ls[static_cast<std::size_t>(k)], std::move(h), std::vector<Expr>{},
                     sys.name() + "[" + std::to_string(k + 1) + "]");
  }
  return out;
}

SeparableSolution solve_hj_separable(const LagrangianSystem& sys, const std::vector<double>& energies,
                                     const std::vector<Interval>& intervals, const std::vector<int>& branches) {
  const auto n = static_cast<std::size_t>(sys.dof());
  if (energies.size() != n || intervals.size() != n || branches.size() != n) {
    throw InputError("separable solve needs one energy, interval and branch per coordinate");
  }
  const std::vector<LagrangianSystem> parts = split_separable(sys);
  SeparableSolution out;
  std::vector<std::shared_ptr<const LevelSetSection>> factors;
  for (std::size_t k = 0; k < n; ++k) {
    out.factors.push_back(solve_hj_1dof(parts[k], energies[k], intervals[k], branches[k]));
    factors.push_back(out.factors.back().section);
  }
  out.section = std::make_shared<const ProductSection>(std::move(factors));
  return out;
}

}  // namespace hjk
