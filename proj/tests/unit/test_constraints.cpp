#include <doctest.h>

#include <cmath>

#include "hjk/constraints.hpp"
#include "hjk/error.hpp"
#include "hjk/systems.hpp"
#include "oracles.hpp"

using hjk::ConstraintFunction;
using hjk::ExprSection;
using hjk::LagrangianSystem;
using hjk::SampleGrid;
using hjk::StabilizationStatus;
using hjk::TangentPoint;
using hjk::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

LagrangianSystem sys_of(const char* name) { return hjk::builtin(name).system; }

ConstraintFunction ham(const std::string& text, int n) { return ConstraintFunction::hamiltonian(hjk::Expr::parse(text, n)); }

SampleGrid tq_grid(int n, double half, int m) { return SampleGrid::uniform(2 * n, {-half, half, m}); }

const auto kAffine = LagrangianSystem::parse(2, "0.5*v1^2 + q1*v2");
const auto kGauge = LagrangianSystem::parse(2, "0.5*(v1 - v2)^2");

hjk::ConstraintSet affine_chain() {
  return hjk::stabilize(kAffine, {ham("p2 - q1", 2)}, tq_grid(2, 1, 5), 1e-8, 10);
}

}  // namespace

TEST_SUITE("constraints") {
  TEST_CASE("degeneracy examples") {
    const auto osc = hjk::detect_degeneracy(sys_of("oscillator_1d"), tq_grid(1, 1, 5));
    CHECK(osc.min_rank == 1);
    CHECK(osc.dof == 1);
    CHECK(osc.null_basis.cols() == 0);

    const auto a = hjk::detect_degeneracy(kAffine, tq_grid(2, 1, 3));
    CHECK(a.min_rank == 1);
    CHECK(a.dof == 2);
    REQUIRE(a.null_basis.cols() == 1);
    CHECK(oracle::max_abs(a.null_basis.col(0) - vec({0, 1})) <= 1e-12);

    const auto g = hjk::detect_degeneracy(kGauge, tq_grid(2, 1, 3));
    CHECK(g.min_rank == 1);
    REQUIRE(g.null_basis.cols() == 1);
    CHECK(oracle::max_abs(g.null_basis.col(0) - vec({1, 1}) / std::sqrt(2.0)) <= 1e-12);
    CHECK(g.representative.size() == 4);
  }

  TEST_CASE("null directions annihilate the finite-difference velocity Hessian") {
    const auto sys = LagrangianSystem::parse(3, "0.5*(v1 + q2*v2)^2 + sin(q1)*v3");
    const auto d = hjk::detect_degeneracy(sys, tq_grid(3, 1, 3));
    CHECK(d.min_rank == 1);
    REQUIRE(d.null_basis.cols() == 2);
    const Vector q = d.representative.head(3), v = d.representative.tail(3);
    const auto w = oracle::fd_hessian([&](const Vector& y) { return oracle::eval(sys.lagrangian(), q, y); }, v);
    CHECK(oracle::max_abs(w * d.null_basis) <= 1e-6);
    CHECK(oracle::max_abs(d.null_basis.transpose() * d.null_basis - hjk::Matrix::Identity(2, 2)) <= 1e-12);
  }

  TEST_CASE("primary constraint residual examples") {
    const auto grid = tq_grid(2, 0.8, 5);
    CHECK(hjk::primary_constraint_residual(kAffine, ham("p2 - q1", 2), grid) == 0.0);
    CHECK(hjk::primary_constraint_residual(kAffine, ham("p2", 2), grid) == 0.8);
    CHECK(hjk::primary_constraint_residual(kGauge, ham("p1 + p2", 2), grid) == 0.0);
    CHECK(hjk::primary_constraint_residual(sys_of("oscillator_1d"), ham("p1", 1), tq_grid(1, 0.7, 5)) == 0.7);
  }

  TEST_CASE("constraint function typing") {
    CHECK_THROWS_AS(ham("p1 + v1", 2), hjk::InputError);
    CHECK_THROWS_AS(ConstraintFunction::lagrangian(hjk::Expr::parse("v1 - p2", 2)), hjk::InputError);
    const auto xi = ham("p2 - q1", 2);
    CHECK(xi.side() == hjk::ConstraintSide::hamiltonian);
    CHECK(xi.generation() == 0);
    CHECK(xi.provenance() == hjk::Provenance::declared);
    CHECK(xi.at(hjk::CotangentPoint(vec({1, 0}), vec({0, 3}))) == 2.0);
    CHECK(xi.on_tangent(kAffine, TangentPoint(vec({1, 0}), vec({2, 3}))) == 0.0);
    const auto chi = ConstraintFunction::lagrangian(hjk::Expr::parse("v1*q2", 2));
    CHECK(chi.on_tangent(kAffine, TangentPoint(vec({1, 4}), vec({2, 3}))) == 8.0);
    CHECK_THROWS_AS((void)chi.expression(), hjk::Error);
    CHECK(hjk::side_name(hjk::ConstraintSide::lagrangian) == "lagrangian");
    CHECK(hjk::status_name(StabilizationStatus::max_iterations) == "max-iterations");
  }

  TEST_CASE("transport examples") {
    oracle::Sampler s(20);
    const auto chi = hjk::transport_constraint(kAffine, ham("p2 - q1", 2));
    CHECK(chi.side() == hjk::ConstraintSide::lagrangian);
    CHECK(chi.generation() == 1);
    CHECK(chi.provenance() == hjk::Provenance::transported);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const TangentPoint pt(s.box(2, 3), s.box(2, 3));
      worst = std::max(worst, std::abs(chi.on_tangent(kAffine, pt) + pt.v[0]));
    }
    CHECK(worst <= 1e-12);

    const auto gauge = hjk::transport_constraint(kGauge, ham("p1 + p2", 2));
    for (int k = 0; k < 1000; ++k) CHECK(gauge.on_tangent(kGauge, TangentPoint(s.box(2, 3), s.box(2, 3))) == 0.0);
  }

  TEST_CASE("transport of a constant vanishes") {
    oracle::Sampler s(21);
    for (const auto& name : hjk::builtin_names()) {
      const auto sys = sys_of(name.c_str());
      const int n = sys.dof();
      const auto chi = hjk::transport_constraint(sys, ham("2.5", n));
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        worst = std::max(worst, std::abs(chi.on_tangent(sys, TangentPoint(s.box(n, 2), s.box(n, 2)))));
      }
      INFO(name);
      CHECK(worst == 0.0);
    }
  }

  TEST_CASE("transport against a finite-difference oracle") {
    oracle::Sampler s(22);
    const auto sys = LagrangianSystem::parse(2, "0.5*v1^2*(1+q2^2) + sin(q1)*v2 + 0.3*v1*v2 - q2^4");
    const auto xi_expr = hjk::Expr::parse("sin(q1)*p2 + p1^2 - q2*p1", 2);
    const auto chi = hjk::transport_constraint(sys, ConstraintFunction::hamiltonian(xi_expr));
    for (int k = 0; k < 100; ++k) {
      const Vector q = s.box(2, 1), v = s.box(2, 1);
      const Vector p = oracle::fd_momentum(sys, q, v);
      const Vector xq = oracle::fd_gradient([&](const Vector& y) { return oracle::eval(xi_expr, y, {}, p); }, q);
      const Vector xp = oracle::fd_gradient([&](const Vector& y) { return oracle::eval(xi_expr, q, {}, y); }, p);
      const Vector lq = oracle::fd_gradient([&](const Vector& y) { return oracle::eval(sys.lagrangian(), y, v); }, q);
      CHECK(std::abs(chi.on_tangent(sys, TangentPoint(q, v)) - (v.dot(xq) + lq.dot(xp))) <= 1e-8);
    }
  }

  TEST_CASE("stabilize: the affine system") {
    const auto set = affine_chain();
    CHECK(set.status == StabilizationStatus::converged);
    REQUIRE(set.constraints.size() == 3);
    CHECK(set.constraints[0].provenance() == hjk::Provenance::declared);
    CHECK(set.constraints[1].provenance() == hjk::Provenance::transported);
    CHECK(set.constraints[2].provenance() == hjk::Provenance::flow_differenced);
    for (int g = 0; g < 3; ++g) CHECK(set.constraints[static_cast<std::size_t>(g)].generation() == g);

    // Hand derivation: the primary forces -v1 = 0, and on that surface the
    // v1 equation of motion forces v2 = 0.
    oracle::Sampler s(23);
    for (int k = 0; k < 500; ++k) {
      const TangentPoint pt(s.box(2, 2), s.box(2, 2));
      CHECK(std::abs(set.constraints[1].on_tangent(kAffine, pt) + pt.v[0]) <= 1e-12);
      CHECK(std::abs(set.constraints[2].on_tangent(kAffine, pt) + pt.v[1]) <= 1e-9);
    }

    // Feasible points are exactly those with v = 0.
    std::size_t count = 0;
    for (std::size_t k = 0; k < set.grid.size(); ++k) {
      const Vector z = set.grid.point(k);
      const bool at_rest = z[2] == 0.0 && z[3] == 0.0;
      CHECK(set.feasible[k] == at_rest);
      count += set.feasible[k] ? 1 : 0;
    }
    CHECK(count == 25);
  }

  TEST_CASE("stabilize: gauge and regular systems") {
    const auto g = hjk::stabilize(kGauge, {ham("p1 + p2", 2)}, tq_grid(2, 1, 5), 1e-8, 10);
    CHECK(g.status == StabilizationStatus::converged);
    CHECK(g.iterations == 1);
    CHECK(g.constraints.size() == 1);
    CHECK(std::all_of(g.feasible.begin(), g.feasible.end(), [](bool b) { return b; }));

    const auto r = hjk::stabilize(sys_of("oscillator_1d"), {}, tq_grid(1, 1, 5), 1e-8, 10);
    CHECK(r.status == StabilizationStatus::converged);
    CHECK(r.iterations == 0);
    CHECK(r.constraints.empty());
    CHECK(r.feasible.size() == 25);
  }

  TEST_CASE("stabilize: iteration limit and inconsistency") {
    const auto limited = hjk::stabilize(kAffine, {ham("p2 - q1", 2)}, tq_grid(2, 1, 5), 1e-8, 1);
    CHECK(limited.status == StabilizationStatus::max_iterations);
    CHECK(limited.iterations == 1);
    CHECK(limited.constraints.size() == 2);

    // The transported primary is 1 - v1, which never vanishes for |v1| <= 0.5.
    const auto sys = LagrangianSystem::parse(2, "0.5*v1^2 + q1*v2 + q2");
    const auto bad = hjk::stabilize(sys, {ham("p2 - q1", 2)}, tq_grid(2, 0.5, 5), 1e-8, 10);
    CHECK(bad.status == StabilizationStatus::inconsistent);
    CHECK(std::none_of(bad.feasible.begin(), bad.feasible.end(), [](bool b) { return b; }));
  }

  TEST_CASE("stabilize: errors") {
    CHECK_THROWS_AS(hjk::stabilize(kAffine, {ham("p2", 2)}, tq_grid(2, 1, 3), 1e-8, 10), hjk::PreconditionError);
    // W = q1^2 loses rank on q1 = 0.
    const auto drop = LagrangianSystem::parse(1, "0.5*q1^2*v1^2");
    CHECK_THROWS_AS(hjk::stabilize(drop, {}, tq_grid(1, 1, 5), 1e-8, 10), hjk::RankChangeError);
    CHECK_THROWS_AS(hjk::stabilize(kAffine, {ham("p2 - q1", 2)}, tq_grid(1, 1, 3), 1e-8, 10), hjk::InputError);
  }

  TEST_CASE("stabilize: order of the primaries does not change the feasible set") {
    const auto sys = LagrangianSystem::parse(3, "0.5*v1^2 + q1*v2 + q1*v3");
    const auto grid = tq_grid(3, 1, 3);
    const auto a = hjk::stabilize(sys, {ham("p2 - q1", 3), ham("p3 - q1", 3)}, grid, 1e-8, 10);
    const auto b = hjk::stabilize(sys, {ham("p3 - q1", 3), ham("p2 - q1", 3)}, grid, 1e-8, 10);
    CHECK(a.status == StabilizationStatus::converged);
    CHECK(b.status == StabilizationStatus::converged);
    CHECK(a.feasible == b.feasible);
    // Independent count: v1 = 0 and v2 + v3 = 0.
    std::size_t expected = 0, got = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vector z = grid.point(k);
      const bool ok = z[3] == 0.0 && z[4] + z[5] == 0.0;
      expected += ok ? 1 : 0;
      got += a.feasible[k] ? 1 : 0;
      CHECK(a.feasible[k] == ok);
    }
    CHECK(got == expected);
  }

  TEST_CASE("admissibility") {
    const auto set = affine_chain();
    const auto qg = SampleGrid::uniform(2, {-1, 1, 11});

    const auto drift = hjk::check_X_admissible(kAffine, ExprSection::parse({"0", "sin(q1)"}, 2), set, qg, 1e-8);
    REQUIRE(drift.entries.size() == 3);
    CHECK(drift.entries[0].residual == 0.0);
    CHECK(drift.entries[1].residual == 0.0);
    CHECK(drift.entries[1].pass);

    const auto rest = hjk::check_X_admissible(kAffine, ExprSection::parse({"0", "0"}, 2), set, qg, 1e-8);
    CHECK(rest.admissible);

    const auto moving = hjk::check_X_admissible(kAffine, ExprSection::parse({"1", "0"}, 2), set, qg, 1e-8);
    CHECK(moving.entries[1].residual == 1.0);
    CHECK_FALSE(moving.entries[1].pass);
    CHECK_FALSE(moving.admissible);

    const auto regular = hjk::stabilize(sys_of("oscillator_1d"), {}, tq_grid(1, 1, 3), 1e-8, 10);
    const auto vac = hjk::check_X_admissible(sys_of("oscillator_1d"), ExprSection::parse({"q1^3"}, 1), regular,
                                             SampleGrid::uniform(1, {-1, 1, 5}), 1e-8);
    CHECK(vac.entries.empty());
    CHECK(vac.admissible);

    const auto limited = hjk::stabilize(kAffine, {ham("p2 - q1", 2)}, tq_grid(2, 1, 5), 1e-8, 1);
    CHECK_THROWS_AS(hjk::check_X_admissible(kAffine, ExprSection::parse({"0", "0"}, 2), limited, qg, 1e-8),
                    hjk::PreconditionError);
  }
}
