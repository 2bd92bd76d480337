#include "hjk/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjk {

std::string_view side_name(ConstraintSide s) { return s == ConstraintSide::hamiltonian ? "hamiltonian" : "lagrangian"; }

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::declared: return "declared";
    case Provenance::transported: return "transported";
    case Provenance::flow_differenced: return "flow-differenced";
  }
  return "?";
}

std::string_view status_name(StabilizationStatus s) {
  switch (s) {
    case StabilizationStatus::converged: return "converged";
    case StabilizationStatus::max_iterations: return "max-iterations";
    case StabilizationStatus::inconsistent: return "inconsistent";
  }
  return "?";
}

ConstraintFunction ConstraintFunction::hamiltonian(Expr xi, int generation, Provenance provenance) {
  if (xi.families().v) throw InputError("hamiltonian-side constraint references v: " + xi.print());
  ConstraintFunction c;
  c.side_ = ConstraintSide::hamiltonian;
  c.generation_ = generation;
  c.provenance_ = provenance;
  c.description_ = xi.print();
  c.expr_ = std::move(xi);
  return c;
}

ConstraintFunction ConstraintFunction::lagrangian(Expr chi, int generation, Provenance provenance) {
  if (chi.families().p) throw InputError("lagrangian-side constraint references p: " + chi.print());
  std::string description = chi.print();
  Evaluator eval = [chi](const TangentPoint& pt) { return phase_value(chi, Family::v, pt.q, pt.v); };
  return lagrangian(std::move(eval), std::move(description), generation, provenance);
}

ConstraintFunction ConstraintFunction::lagrangian(Evaluator chi, std::string description, int generation,
                                                  Provenance provenance) {
  ConstraintFunction c;
  c.side_ = ConstraintSide::lagrangian;
  c.generation_ = generation;
  c.provenance_ = provenance;
  c.description_ = std::move(description);
  c.eval_ = std::move(chi);
  return c;
}

const Expr& ConstraintFunction::expression() const {
  if (side_ != ConstraintSide::hamiltonian) throw Error("lagrangian-side constraint has no T*Q expression");
  return expr_;
}

double ConstraintFunction::at(const CotangentPoint& pt) const {
  return phase_value(expression(), Family::p, pt.q, pt.p);
}

double ConstraintFunction::on_tangent(const LagrangianSystem& sys, const TangentPoint& pt) const {
  if (side_ == ConstraintSide::hamiltonian) return at(legendre_map(sys, pt));
  return eval_(pt);
}

namespace {

struct SplitHessian {
  Matrix pinv;
  Matrix null_basis;
  int rank = 0;
};

SplitHessian split_hessian(const Matrix& w) {
  const Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  SplitHessian out;
  out.rank = numerical_rank(s);
  const Eigen::Index n = w.rows();
  const Eigen::Index r = out.rank;
  Vector inv = Vector::Zero(n);
  for (Eigen::Index i = 0; i < r; ++i) inv[i] = 1.0 / s[i];
  out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  out.null_basis = svd.matrixV().rightCols(n - r);
  return out;
}

TangentPoint tangent_at(const Vector& z, int n) { return TangentPoint(z.head(n), z.tail(n)); }

// Snapshot of the Lagrangian-side constraints used to build a flow-differenced
// constraint. Shared by all constraints created in the same iteration.
struct FlowContext {
  LagrangianSystem sys;
  std::vector<ConstraintFunction::Evaluator> chis;
};

double flow_residual(const FlowContext& ctx, std::size_t which, const TangentPoint& pt) {
  const LagrangianJet jet = lagrangian_jet(ctx.sys, pt);
  const SplitHessian split = split_hessian(jet.W);
  const Vector accel = split.pinv * (jet.Lq - jet.Lvq * pt.v);
  const double h = kFlowDifferenceStep;

  const auto m = static_cast<Eigen::Index>(ctx.chis.size());
  const Eigen::Index k = split.null_basis.cols();
  Vector a(m);
  Matrix b(m, k);
  const TangentPoint moved(pt.q + h * pt.v, pt.v + h * accel);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& chi = ctx.chis[static_cast<std::size_t>(i)];
    const double base = chi(pt);
    a[i] = (chi(moved) - base) / h;
    for (Eigen::Index j = 0; j < k; ++j) {
      b(i, j) = (chi(TangentPoint(pt.q, pt.v + h * split.null_basis.col(j))) - base) / h;
    }
  }
  Vector r = a;
  if (k > 0) {
    const Vector lambda = b.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(Vector(-a));
    r += b * lambda;
  }
  return r[static_cast<Eigen::Index>(which)];
}

std::vector<double> values_on_grid(const LagrangianSystem& sys, const ConstraintFunction& c,
                                   const std::vector<Vector>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& z : points) out.push_back(c.on_tangent(sys, tangent_at(z, sys.dof())));
  return out;
}

}  // namespace

Degeneracy detect_degeneracy(const LagrangianSystem& sys, const SampleGrid& tq_grid) {
  const int n = sys.dof();
  if (tq_grid.dim() != 2 * n) throw InputError("degeneracy grid must cover (q, v)");
  if (tq_grid.size() == 0) throw InputError("empty grid");
  Degeneracy out;
  out.dof = n;
  out.min_rank = n + 1;
  for (std::size_t k = 0; k < tq_grid.size(); ++k) {
    const Vector z = tq_grid.point(k);
    const VelocityHessian vh = velocity_hessian(sys, tangent_at(z, n));
    if (vh.rank < out.min_rank) {
      out.min_rank = vh.rank;
      out.representative = z;
      Matrix basis = split_hessian(vh.W).null_basis;
      for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        for (Eigen::Index r = 0; r < basis.rows(); ++r) {
          if (std::abs(basis(r, c)) > 1e-12) {
            if (basis(r, c) < 0.0) basis.col(c) *= -1.0;
            break;
          }
        }
      }
      out.null_basis = std::move(basis);
    }
  }
  return out;
}

double primary_constraint_residual(const LagrangianSystem& sys, const ConstraintFunction& xi,
                                   const SampleGrid& tq_grid) {
  if (xi.side() != ConstraintSide::hamiltonian) throw InputError("primary constraints live on T*Q");
  if (tq_grid.dim() != 2 * sys.dof()) throw InputError("constraint grid must cover (q, v)");
  double worst = 0.0;
  for (const auto& z : tq_grid.points()) {
    worst = std::max(worst, std::abs(xi.on_tangent(sys, tangent_at(z, sys.dof()))));
  }
  return worst;
}

ConstraintFunction transport_constraint(const LagrangianSystem& sys, const ConstraintFunction& xi) {
  const Expr& e = xi.expression();
  const Expr lagrangian = sys.lagrangian();
  auto chi = [e, lagrangian](const TangentPoint& pt) {
    const PhaseGrad l = phase_grad(lagrangian, Family::v, pt.q, pt.v);
    const PhaseGrad g = phase_grad(e, Family::p, pt.q, l.dy);
    return pt.v.dot(g.dx) + l.dx.dot(g.dy);
  };
  return ConstraintFunction::lagrangian(std::move(chi), "i(K)d[" + xi.description() + "]", xi.generation() + 1,
                                        Provenance::transported);
}

ConstraintSet stabilize(const LagrangianSystem& sys, const std::vector<ConstraintFunction>& primaries,
                        const SampleGrid& tq_grid, double tol, int max_iter) {
  const int n = sys.dof();
  if (tq_grid.dim() != 2 * n) throw InputError("stabilization grid must cover (q, v)");
  if (tq_grid.size() == 0) throw InputError("empty grid");
  if (max_iter < 0) throw InputError("max_iter must be non-negative");

  const std::vector<Vector> points = tq_grid.points();
  {
    int rank = -1;
    for (const auto& z : points) {
      const int r = velocity_hessian(sys, tangent_at(z, n)).rank;
      if (rank >= 0 && r != rank) {
        throw RankChangeError("velocity Hessian changes rank on the grid (" + std::to_string(rank) + " vs " +
                              std::to_string(r) + ")");
      }
      rank = r;
    }
  }

  for (const auto& c : primaries) {
    if (c.side() != ConstraintSide::hamiltonian) continue;
    const double res = primary_constraint_residual(sys, c, tq_grid);
    if (res > tol) {
      throw PreconditionError("declared primary constraint " + c.description() +
                              " does not vanish on the image of the Legendre map (residual " + format_number(res) +
                              ")");
    }
  }

  ConstraintSet set;
  set.grid = tq_grid;
  std::vector<std::vector<double>> values;  // cached grid values, parallel to set.constraints
  for (const auto& c : primaries) {
    set.constraints.push_back(c);
    values.push_back(values_on_grid(sys, c, points));
  }

  auto feasible_mask = [&] {
    std::vector<bool> mask(points.size(), true);
    for (std::size_t c = 0; c < set.constraints.size(); ++c) {
      if (set.constraints[c].side() != ConstraintSide::lagrangian) continue;
      for (std::size_t k = 0; k < points.size(); ++k) {
        if (std::abs(values[c][k]) > tol) mask[k] = false;
      }
    }
    return mask;
  };

  std::vector<std::size_t> newest(set.constraints.size());
  for (std::size_t i = 0; i < newest.size(); ++i) newest[i] = i;

  set.status = StabilizationStatus::max_iterations;
  set.feasible = feasible_mask();
  if (newest.empty()) set.status = StabilizationStatus::converged;

  while (!newest.empty() && set.iterations < max_iter) {
    if (std::none_of(set.feasible.begin(), set.feasible.end(), [](bool b) { return b; })) {
      set.status = StabilizationStatus::inconsistent;
      break;
    }
    ++set.iterations;

    std::shared_ptr<const FlowContext> flow;
    std::vector<std::size_t> lagrangian_ids;
    for (std::size_t c = 0; c < set.constraints.size(); ++c) {
      if (set.constraints[c].side() == ConstraintSide::lagrangian) lagrangian_ids.push_back(c);
    }

    std::vector<std::size_t> appended;
    for (const std::size_t idx : newest) {
      const ConstraintFunction& source = set.constraints[idx];
      ConstraintFunction candidate = [&]() {
        if (source.side() == ConstraintSide::hamiltonian) {
          ConstraintFunction t = transport_constraint(sys, source);
          return ConstraintFunction::lagrangian(
              [t, sys](const TangentPoint& pt) { return t.on_tangent(sys, pt); }, t.description(), set.iterations,
              Provenance::transported);
        }
        if (!flow) {
          auto ctx = std::make_shared<FlowContext>(FlowContext{sys, {}});
          for (const std::size_t c : lagrangian_ids) {
            const ConstraintFunction f = set.constraints[c];
            ctx->chis.push_back([f, sys](const TangentPoint& pt) { return f.on_tangent(sys, pt); });
          }
          flow = std::move(ctx);
        }
        const auto pos = static_cast<std::size_t>(
            std::find(lagrangian_ids.begin(), lagrangian_ids.end(), idx) - lagrangian_ids.begin());
        return ConstraintFunction::lagrangian(
            [flow, pos](const TangentPoint& pt) { return flow_residual(*flow, pos, pt); },
            "d/dt[" + source.description() + "]", set.iterations, Provenance::flow_differenced);
      }();

      std::vector<double> cand_values = values_on_grid(sys, candidate, points);
      double worst = 0.0;
      for (std::size_t k = 0; k < points.size(); ++k) {
        if (set.feasible[k]) worst = std::max(worst, std::abs(cand_values[k]));
      }
      if (worst <= tol) continue;

      const bool duplicate = std::any_of(values.begin(), values.end(), [&](const std::vector<double>& existing) {
        for (std::size_t k = 0; k < points.size(); ++k) {
          if (std::abs(existing[k] - cand_values[k]) > tol) return false;
        }
        return true;
      });
      if (duplicate) continue;

      set.constraints.push_back(std::move(candidate));
      values.push_back(std::move(cand_values));
      appended.push_back(set.constraints.size() - 1);
    }

    set.feasible = feasible_mask();
    if (appended.empty()) {
      set.status = StabilizationStatus::converged;
      break;
    }
    newest = std::move(appended);
  }

  if (std::none_of(set.feasible.begin(), set.feasible.end(), [](bool b) { return b; })) {
    set.status = StabilizationStatus::inconsistent;
  }
  return set;
}

AdmissibilityReport check_X_admissible(const LagrangianSystem& sys, const SectionX& x, const ConstraintSet& final_set,
                                       const SampleGrid& q_grid, double tol) {
  if (final_set.status != StabilizationStatus::converged) {
    throw PreconditionError("constraint set has not converged (status " +
                            std::string(status_name(final_set.status)) + ")");
  }
  if (q_grid.dim() != sys.dof()) throw InputError("admissibility grid must cover q");
  AdmissibilityReport out;
  const std::vector<Vector> points = q_grid.points();
  for (const auto& c : final_set.constraints) {
    double worst = 0.0;
    for (const auto& q : points) worst = std::max(worst, std::abs(c.on_tangent(sys, TangentPoint(q, x.value(q)))));
    const bool pass = worst <= tol;
    out.entries.push_back({c.description(), worst, pass});
    out.admissible = out.admissible && pass;
  }
  return out;
}

}  // namespace hjk
