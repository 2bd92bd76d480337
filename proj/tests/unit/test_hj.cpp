#include <doctest.h>

#include <cmath>

#include "hjk/error.hpp"
#include "hjk/hj.hpp"
#include "hjk/systems.hpp"
#include "oracles.hpp"

using hjk::ExprSection;
using hjk::Interval;
using hjk::LagrangianSystem;
using hjk::Matrix;
using hjk::OneFormAlpha;
using hjk::SampleGrid;
using hjk::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

LagrangianSystem sys_of(const char* name) { return hjk::builtin(name).system; }

ExprSection section(std::vector<std::string> comps) {
  const int n = static_cast<int>(comps.size());
  return ExprSection::parse(comps, n);
}

const ExprSection kCircle = section({"sqrt(1 - q1^2)"});
const ExprSection kPerturbed = section({"sqrt(1 - q1^2) + 0.1"});

SampleGrid grid1(double lo, double hi, int m) { return SampleGrid::uniform(1, {lo, hi, m}); }

// E_L(q, X(q)) by plain evaluation with finite-difference momentum.
double fd_section_energy(const LagrangianSystem& sys, const hjk::SectionX& x, const Vector& q) {
  return oracle::fd_energy(sys, q, x.value(q));
}

}  // namespace

TEST_SUITE("hj") {
  TEST_CASE("alpha_jacobian examples") {
    const auto osc = sys_of("oscillator_1d");
    const Matrix j = hjk::alpha_jacobian(osc, kCircle, vec({0.5}));
    CHECK(j(0, 0) == doctest::Approx(-0.5 / std::sqrt(0.75)).epsilon(1e-14));
    CHECK(j(0, 0) == doctest::Approx(-0.57735).epsilon(1e-5));

    CHECK(hjk::alpha_jacobian(sys_of("free_particle_1d"), section({"2.5"}), vec({0.3})).isZero(0.0));

    const Matrix a = hjk::alpha_jacobian(sys_of("singular_affine"), section({"0", "0"}), vec({0.4, -0.2}));
    CHECK(a(0, 0) == 0.0);
    CHECK(a(0, 1) == 0.0);
    CHECK(a(1, 0) == 1.0);
    CHECK(a(1, 1) == 0.0);
  }

  TEST_CASE("alpha_jacobian matches finite differences of the induced form") {
    oracle::Sampler s(10);
    for (const auto& name : hjk::builtin_names()) {
      const auto sys = sys_of(name.c_str());
      const int n = sys.dof();
      const auto x = ExprSection::parse(oracle::random_section(s, n), n);
      const auto induced = OneFormAlpha::induced(sys, x);
      for (int k = 0; k < 50; ++k) {
        const Vector q = s.box(n, 0.9);
        const Matrix fd = oracle::fd_jacobian(
            [&](const Vector& y) { return oracle::fd_momentum(sys, y, x.value(y)); }, q, 1e-3);
        INFO(name);
        CHECK(oracle::max_abs(hjk::alpha_jacobian(sys, x, q) - fd) <= 1e-6);
        CHECK(oracle::max_abs(induced.value(q) - oracle::fd_momentum(sys, q, x.value(q))) <= 1e-9);
      }
    }
  }

  TEST_CASE("condition 3 examples") {
    const auto osc = sys_of("oscillator_1d");
    CHECK(hjk::condition3_residual(osc, kCircle, vec({0.3})) <= 1e-10);
    const double expected = 0.1 * 0.3 / std::sqrt(0.91);
    CHECK(hjk::condition3_residual(osc, kPerturbed, vec({0.3})) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(hjk::condition3_residual(osc, kPerturbed, vec({0.3})) == doctest::Approx(0.031446).epsilon(1e-5));
    CHECK(hjk::condition3_residual(sys_of("free_particle_1d"), section({"-1.25"}), vec({0.7})) == 0.0);
  }

  TEST_CASE("closedness examples") {
    CHECK(hjk::closedness_matrix(OneFormAlpha::parse({"q1^3 + sin(q1)"}, 1), vec({0.4}))(0, 0) == 0.0);
    const Matrix c = hjk::closedness_matrix(OneFormAlpha::parse({"q2", "0"}, 2), vec({0.1, 0.2}));
    CHECK(c(0, 1) == -1.0);
    CHECK(c(1, 0) == 1.0);
    CHECK(hjk::closedness_matrix(OneFormAlpha::parse({"q2", "q1"}, 2), vec({0.5, -0.7})).isZero(0.0));
    CHECK_THROWS_AS(OneFormAlpha::parse({"v1"}, 1), hjk::InputError);
    CHECK_THROWS_AS(OneFormAlpha::parse({"q1"}, 2), hjk::InputError);
  }

  TEST_CASE("conditions 4 and 5 examples") {
    const auto osc = sys_of("oscillator_1d");
    for (double q : {-0.8, -0.3, 0.0, 0.45, 0.9}) {
      CHECK(hjk::condition4_residual(osc, kCircle, vec({q})) <= 1e-10);
      CHECK(hjk::condition5_residual(osc, kCircle, vec({q})) <= 1e-10);
    }
    const double c3 = hjk::condition3_residual(osc, kPerturbed, vec({0.3}));
    const double c4 = hjk::condition4_residual(osc, kPerturbed, vec({0.3}));
    const double c5 = hjk::condition5_residual(osc, kPerturbed, vec({0.3}));
    CHECK(std::abs(c4 - c3) <= 1e-10);
    CHECK(std::abs(c5 - c4) <= 1e-9);
    CHECK(c5 == c4);
    const auto free = sys_of("free_particle_1d");
    CHECK(hjk::condition4_residual(free, section({"3"}), vec({0.2})) == 0.0);
    CHECK(hjk::condition5_residual(free, section({"3"}), vec({0.2})) == 0.0);
  }

  TEST_CASE("one degree of freedom: condition 4 is the derivative of the pulled-back energy") {
    oracle::Sampler s(11);
    for (const char* name : {"free_particle_1d", "oscillator_1d", "pendulum_1d"}) {
      const auto sys = sys_of(name);
      for (int k = 0; k < 20; ++k) {
        const auto x = ExprSection::parse(oracle::random_section(s, 1), 1);
        const Vector q = s.box(1, 0.9);
        const double fd = oracle::fd_gradient([&](const Vector& y) { return fd_section_energy(sys, x, y); }, q, 1e-3)[0];
        const double c4 = hjk::condition4_residual(sys, x, q);
        CHECK(std::abs(c4 - std::abs(fd)) <= 1e-7);
        CHECK(c4 == std::abs(hjk::energy_pullback_gradient(sys, x, q)[0]));
        CHECK(hjk::condition5_residual(sys, x, q) == c4);
      }
    }
  }

  TEST_CASE("condition 4 and condition 5 agree for arbitrary sections") {
    oracle::Sampler s(12);
    std::vector<LagrangianSystem> systems;
    for (const auto& name : hjk::builtin_names()) systems.push_back(sys_of(name.c_str()));
    systems.push_back(LagrangianSystem::parse(2, "0.5*v1^2*(1+q2^2) + sin(q1)*v2*v1 + exp(0.1*q1*v2) - q2^4"));
    systems.push_back(LagrangianSystem::parse(3, "0.5*(v1^2+v2^2+v3^2) + q3*v1 - q1*v3 + cos(q2)*v2^2"));
    for (const auto& sys : systems) {
      const int n = sys.dof();
      for (int trial = 0; trial < 5; ++trial) {
        const auto x = ExprSection::parse(oracle::random_section(s, n), n);
        for (int k = 0; k < 40; ++k) {
          const Vector q = s.box(n, 0.9);
          INFO(sys.lagrangian().print());
          CHECK(std::abs(hjk::condition4_residual(sys, x, q) - hjk::condition5_residual(sys, x, q)) <= 1e-9);
        }
      }
    }
  }

  TEST_CASE("condition 4 against a finite-difference oracle in several dimensions") {
    // i(X) d alpha + d(X* E_L) with alpha and E_L differenced numerically.
    oracle::Sampler s(13);
    const auto sys = LagrangianSystem::parse(2, "0.5*v1^2*(1+q2^2) + 0.5*v2^2 + sin(q1)*v2 - q2^4");
    for (int trial = 0; trial < 5; ++trial) {
      const auto x = ExprSection::parse(oracle::random_section(s, 2), 2);
      for (int k = 0; k < 20; ++k) {
        const Vector q = s.box(2, 0.9);
        const Matrix j = oracle::fd_jacobian(
            [&](const Vector& y) { return oracle::fd_momentum(sys, y, x.value(y)); }, q, 1e-3);
        const Matrix c = j.transpose() - j;
        const Vector g = oracle::fd_gradient([&](const Vector& y) { return fd_section_energy(sys, x, y); }, q, 1e-3);
        const Vector r = c.transpose() * x.value(q) + g;
        CHECK(std::abs(hjk::condition4_residual(sys, x, q) - r.cwiseAbs().maxCoeff()) <= 1e-6);
      }
    }
  }

  TEST_CASE("lift_and_compare examples") {
    const auto osc = sys_of("oscillator_1d");
    CHECK(hjk::lift_and_compare(osc, kCircle, vec({0}), 1.0, 1e-3) < 1e-7);
    CHECK(hjk::lift_and_compare(sys_of("free_particle_1d"), section({"0.75"}), vec({0}), 1.0, 1e-3) < 1e-12);
    CHECK(hjk::lift_and_compare(osc, kPerturbed, vec({0}), 1.0, 1e-3) > 1e-3);
    CHECK_THROWS_AS(hjk::lift_and_compare(osc, kCircle, vec({0}), 0.0, 1e-3), hjk::InputError);
  }

  TEST_CASE("lift leaving the section domain reports the exit time") {
    const auto osc = sys_of("oscillator_1d");
    const auto sol = hjk::solve_hj_1dof(osc, 0.5, {-0.9, 0.9, 101}, 1);
    try {
      (void)hjk::lift_and_compare(osc, *sol.section, vec({0}), 3.0, 1e-3);
      FAIL("expected DomainExitError");
    } catch (const hjk::DomainExitError& e) {
      CHECK(e.time() >= 1.0);
      CHECK(e.time() <= std::asin(0.9) + 1e-2);
    }
    CHECK_THROWS_AS(hjk::lift_and_compare(osc, *sol.section, vec({0.95}), 1.0, 1e-3), hjk::DomainExitError);
  }

  TEST_CASE("standard HJ check examples") {
    const auto osc = sys_of("oscillator_1d");
    const auto good = hjk::check_standard_hj(osc, kCircle, grid1(-0.9, 0.9, 101), 1e-8);
    CHECK(good.all_pass());
    CHECK(*good.energy_variation < 1e-10);
    CHECK(good.samples == 101);
    CHECK(good.rows.size() == 101);
    CHECK_FALSE(good.cond1_lift.has_value());

    const auto lin = hjk::check_standard_hj(osc, section({"q1"}), grid1(-0.9, 0.9, 101), 1e-8);
    CHECK_FALSE(lin.all_pass());
    CHECK(*lin.energy_variation == doctest::Approx(0.81).epsilon(1e-14));
    CHECK(*lin.cond3_operator == doctest::Approx(1.8).epsilon(1e-14));
    CHECK(*lin.closedness == 0.0);

    const auto free = hjk::check_standard_hj(sys_of("free_particle_1d"), section({"2"}), grid1(-1, 1, 11), 1e-8);
    CHECK(free.all_pass());
    for (const auto& e : free.entries()) CHECK(e.residual == 0.0);

    const auto gen = hjk::check_standard_hj(osc, section({"q1"}), grid1(-0.9, 0.9, 11), 1e-8, true);
    CHECK_FALSE(gen.energy_variation.has_value());
    CHECK_FALSE(gen.closedness.has_value());
    CHECK(gen.entries().size() == 3);

    CHECK_THROWS_AS(hjk::check_standard_hj(osc, kCircle, SampleGrid::uniform(2, {-1, 1, 3}), 1e-8), hjk::InputError);
    CHECK_THROWS_AS(hjk::check_standard_hj(osc, kCircle, grid1(-2, 2, 5), 1e-8), hjk::DomainError);
  }

  TEST_CASE("report rows match the pointwise residuals") {
    const auto sys = sys_of("oscillator_2d");
    const auto x = section({"q2 + 0.3*sin(q1)", "-q1"});
    const auto grid = SampleGrid::uniform(2, {-0.9, 0.9, 7});
    const auto r = hjk::check_standard_hj(sys, x, grid, 1e-8);
    double c3 = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vector q = grid.point(k);
      CHECK(r.rows[k].q == q);
      CHECK(r.rows[k].cond3 == hjk::condition3_residual(sys, x, q));
      CHECK(r.rows[k].cond4 == hjk::condition4_residual(sys, x, q));
      CHECK(r.rows[k].cond5 == hjk::condition5_residual(sys, x, q));
      c3 = std::max(c3, r.rows[k].cond3);
    }
    CHECK(*r.cond3_operator == c3);
  }

  TEST_CASE("negative direction: perturbed sections fail every condition together") {
    struct Case {
      LagrangianSystem sys;
      ExprSection x;
      SampleGrid grid;
    };
    std::vector<Case> cases{
        {sys_of("oscillator_1d"), kPerturbed, grid1(-0.9, 0.9, 101)},
        {sys_of("pendulum_1d"), section({"sqrt(2*(2 + cos(q1))) + 0.1"}), grid1(-1, 1, 101)},
        {sys_of("oscillator_2d"), section({"sqrt(1 - q1^2) + 0.1", "sqrt(1 - q2^2)"}),
         SampleGrid::uniform(2, {-0.9, 0.9, 21})},
    };
    for (const auto& c : cases) {
      const auto r = hjk::check_standard_hj(c.sys, c.x, c.grid, 1e-8, true);
      CHECK(*r.cond3_operator > 1e-3);
      CHECK(*r.cond4_form > 1e-3);
      CHECK(*r.cond5_pullback > 1e-3);
    }
  }

  TEST_CASE("Hamiltonian generalized check examples") {
    const auto osc = sys_of("oscillator_1d");
    const auto a = hjk::check_hamiltonian_generalized(osc, OneFormAlpha::parse({"sqrt(1 - q1^2)"}, 1),
                                                      grid1(-0.9, 0.9, 101), 1e-8);
    CHECK(*a.cond4_form <= 1e-10);
    CHECK(a.all_pass());

    const auto z = hjk::check_hamiltonian_generalized(sys_of("free_particle_1d"), OneFormAlpha::parse({"0"}, 1),
                                                      grid1(-1, 1, 11), 1e-8);
    CHECK(*z.cond4_form == 0.0);

    const auto grid = SampleGrid::uniform(2, {-0.9, 0.9, 19});
    const auto w = hjk::check_hamiltonian_generalized(sys_of("oscillator_2d"), OneFormAlpha::parse({"q2", "q1"}, 2), grid, 1e-8);
    double expected = 0.0;
    for (const auto& q : grid.points()) expected = std::max(expected, 2.0 * q.cwiseAbs().maxCoeff());
    CHECK(*w.cond4_form == doctest::Approx(expected).epsilon(1e-14));
    CHECK_FALSE(w.all_pass());

    CHECK_THROWS_AS(hjk::check_hamiltonian_generalized(sys_of("singular_affine"), OneFormAlpha::parse({"0", "q1"}, 2),
                                                       grid, 1e-8),
                    hjk::PreconditionError);
  }

  TEST_CASE("Hamiltonian generalized check against a finite-difference oracle") {
    oracle::Sampler s(14);
    const auto sys = sys_of("oscillator_2d");
    const auto comps = oracle::random_section(s, 2);
    const auto alpha = OneFormAlpha::parse(comps, 2);
    const auto grid = SampleGrid::uniform(2, {-0.9, 0.9, 5});
    const auto r = hjk::check_hamiltonian_generalized(sys, alpha, grid, 1e-8);
    const auto h = oracle::hamiltonian_fn(sys);
    double worst = 0.0;
    for (const auto& q : grid.points()) {
      const Vector a = alpha.value(q);
      Vector z(4);
      z << q, a;
      const Vector x = oracle::fd_gradient(h, z).tail(2);
      const Matrix j = oracle::fd_jacobian([&](const Vector& y) { return alpha.value(y); }, q);
      const Vector dh = oracle::fd_gradient(
          [&](const Vector& y) {
            Vector zz(4);
            zz << y, alpha.value(y);
            return h(zz);
          },
          q);
      const Vector res = (j.transpose() - j).transpose() * x + dh;
      worst = std::max(worst, res.cwiseAbs().maxCoeff());
    }
    CHECK(*r.cond4_form == doctest::Approx(worst).epsilon(1e-7));
  }

  TEST_CASE("Hamiltonian standard check examples") {
    const auto osc = sys_of("oscillator_1d");
    const auto a = hjk::check_hamiltonian_hj(osc, OneFormAlpha::parse({"sqrt(1 - q1^2)"}, 1), grid1(-0.9, 0.9, 101), 1e-8);
    CHECK(*a.energy_variation < 1e-10);
    CHECK(a.all_pass());

    const auto w = hjk::check_hamiltonian_hj(sys_of("free_particle_1d"), OneFormAlpha::parse({"1"}, 1), grid1(-1, 1, 11), 1e-8);
    CHECK(*w.energy_variation == 0.0);
    for (const auto& row : w.rows) CHECK(row.energy == 0.5);

    const auto grid = grid1(-1, 1, 21);
    const auto b = hjk::check_hamiltonian_hj(osc, OneFormAlpha::parse({"q1"}, 1), grid, 1e-8);
    double lo = 1e300, hi = -1e300;
    for (const auto& q : grid.points()) {
      const double e = q[0] * q[0];
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    CHECK(*b.energy_variation == doctest::Approx(hi - lo).epsilon(1e-14));
    CHECK_FALSE(b.all_pass());

    CHECK_THROWS_AS(hjk::check_hamiltonian_hj(sys_of("oscillator_2d"), OneFormAlpha::parse({"q2", "0"}, 2),
                                              SampleGrid::uniform(2, {-1, 1, 3}), 1e-8),
                    hjk::PreconditionError);
  }

  TEST_CASE("solve_hj_1dof examples") {
    const auto osc = hjk::solve_hj_1dof(sys_of("oscillator_1d"), 0.5, {-0.9, 0.9, 101}, 1);
    for (std::size_t k = 0; k < osc.q.size(); ++k) {
      const double q = osc.q[k];
      CHECK(osc.p[k] == doctest::Approx(std::sqrt(1 - q * q)).epsilon(1e-12));
      CHECK(std::abs(0.5 * osc.p[k] * osc.p[k] + 0.5 * q * q - 0.5) < 1e-12);
    }
    CHECK(osc.p[50] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(osc.section->momentum(0.0) == doctest::Approx(1.0).epsilon(1e-14));

    const auto free = hjk::solve_hj_1dof(sys_of("free_particle_1d"), 0.5, {-2, 3, 11}, 1);
    for (std::size_t k = 0; k < free.q.size(); ++k) {
      CHECK(free.p[k] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(free.x[k] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(free.w[k] == doctest::Approx(free.q[k] + 2.0).epsilon(1e-12));
    }

    const auto pend = hjk::solve_hj_1dof(sys_of("pendulum_1d"), 2.0, {-1, 1, 101}, 1);
    for (std::size_t k = 0; k < pend.q.size(); ++k) {
      const double q = pend.q[k];
      CHECK(std::abs(pend.p[k] - std::sqrt(2 * (2 + std::cos(q)))) < 1e-10);
    }

    const auto back = hjk::solve_hj_1dof(sys_of("oscillator_1d"), 0.5, {-0.9, 0.9, 11}, -1);
    for (std::size_t k = 0; k < back.q.size(); ++k) CHECK(back.p[k] < 0.0);
  }

  TEST_CASE("solver on a Lagrangian without a declared Hamiltonian") {
    // p = v(1 + q^2), E_L = 0.5 v^2 (1 + q^2) + q^2.
    const auto sys = LagrangianSystem::parse(1, "0.5*v1^2*(1 + q1^2) - q1^2");
    const auto sol = hjk::solve_hj_1dof(sys, 1.5, {-1, 1, 41}, 1);
    for (std::size_t k = 0; k < sol.q.size(); ++k) {
      const double q = sol.q[k], v = sol.x[k];
      CHECK(std::abs(0.5 * v * v * (1 + q * q) + q * q - 1.5) <= 1e-10);
      CHECK(sol.p[k] == doctest::Approx(v * (1 + q * q)).epsilon(1e-13));
    }
    const auto r = hjk::check_standard_hj(sys, *sol.section, grid1(-1, 1, 41), 1e-8);
    CHECK(r.all_pass());
  }

  TEST_CASE("solver errors") {
    const auto osc = sys_of("oscillator_1d");
    CHECK_THROWS_AS(hjk::solve_hj_1dof(osc, -1.0, {-0.5, 0.5, 11}, 1), hjk::BelowFiberMinimumError);
    CHECK_THROWS_AS(hjk::solve_hj_1dof(osc, 0.5, {-1.5, 0.5, 11}, 1), hjk::BelowFiberMinimumError);
    CHECK_THROWS_AS(hjk::solve_hj_1dof(osc, 0.5, {-0.5, 0.5, 11}, 0), hjk::InputError);
    CHECK_THROWS_AS(hjk::solve_hj_1dof(osc, 0.5, {0.5, -0.5, 11}, 1), hjk::InputError);
    CHECK_THROWS_AS(hjk::solve_hj_1dof(sys_of("oscillator_2d"), 0.5, {-0.5, 0.5, 11}, 1),
                    hjk::UnsupportedStructureError);

    // Newton cycles between p = 1 and p = -1 on this quartic although the level set is not empty.
    const auto cyc = LagrangianSystem::parse(1, "0.5*v1^2", "p1^4 - 5*p1^2 - 8");
    try {
      (void)hjk::solve_hj_1dof(cyc, 0.0, {0, 1, 5}, 1);
      FAIL("expected TurningPointError");
    } catch (const hjk::TurningPointError& e) {
      CHECK(e.q() == 0.0);
    }
  }

  TEST_CASE("separable solutions") {
    const auto osc2 = sys_of("oscillator_2d");
    const Interval ax{-0.9, 0.9, 21};
    const auto sol = hjk::solve_hj_separable(osc2, {0.5, 0.5}, {ax, ax}, {1, 1});
    const auto r = hjk::check_standard_hj(osc2, *sol.section, SampleGrid::uniform(2, ax), 1e-8);
    CHECK(r.all_pass());
    CHECK(*r.closedness == 0.0);

    const auto mixed = LagrangianSystem::parse(2, "0.5*v1^2 - 0.5*q1^2 + 0.5*v2^2", "0.5*p1^2 + 0.5*q1^2 + 0.5*p2^2");
    const auto sol2 = hjk::solve_hj_separable(mixed, {0.5, 0.5}, {ax, ax}, {1, -1});
    CHECK(hjk::check_standard_hj(mixed, *sol2.section, SampleGrid::uniform(2, ax), 1e-8).all_pass());
    CHECK(sol2.section->value(vec({0.0, 0.3}))[1] == doctest::Approx(-1.0).epsilon(1e-14));

    const auto cross = LagrangianSystem::parse(2, "0.5*v1^2 + 0.5*v2^2 - q1*q2", "0.5*p1^2 + 0.5*p2^2 + q1*q2");
    CHECK_THROWS_AS(hjk::split_separable(cross), hjk::UnsupportedStructureError);
    CHECK_THROWS_AS(hjk::solve_hj_separable(cross, {0.5, 0.5}, {ax, ax}, {1, 1}), hjk::UnsupportedStructureError);
    CHECK_THROWS_AS(hjk::solve_hj_separable(osc2, {0.5}, {ax, ax}, {1, 1}), hjk::InputError);

    const auto parts = hjk::split_separable(osc2);
    REQUIRE(parts.size() == 2);
    for (const auto& p : parts) CHECK(p.dof() == 1);
  }

  TEST_CASE("positive direction: constructed solutions satisfy every condition") {
    struct Case {
      const char* name;
      hjk::SeparableSolution sol;
      Vector q0;
    };
    const Interval unit{-0.9, 0.9, 41};
    std::vector<Case> cases;
    cases.push_back({"free_particle_1d", hjk::solve_hj_separable(sys_of("free_particle_1d"), {0.5}, {{-1, 2, 41}}, {1}), vec({0})});
    cases.push_back({"oscillator_1d", hjk::solve_hj_separable(sys_of("oscillator_1d"), {0.5}, {unit}, {1}), vec({0})});
    cases.push_back({"oscillator_2d", hjk::solve_hj_separable(sys_of("oscillator_2d"), {0.5, 0.3}, {unit, {-0.7, 0.7, 41}}, {1, -1}), vec({0, 0})});
    cases.push_back({"pendulum_1d", hjk::solve_hj_separable(sys_of("pendulum_1d"), {2.0}, {{-1, 3, 81}}, {1}), vec({-1})});
    for (const auto& c : cases) {
      const auto sys = sys_of(c.name);
      std::vector<Interval> axes;
      for (const auto& f : c.sol.section->factors()) axes.push_back(f->interval());
      const auto r = hjk::check_standard_hj(sys, *c.sol.section, SampleGrid(axes), 1e-8);
      INFO(c.name);
      CHECK(*r.cond3_operator <= 1e-8);
      CHECK(*r.cond4_form <= 1e-8);
      CHECK(*r.cond5_pullback <= 1e-8);
      CHECK(*r.energy_variation <= 1e-8);
      CHECK(hjk::lift_and_compare(sys, *c.sol.section, c.q0, 0.9, 1e-3) <= 1e-6);
    }
  }

  TEST_CASE("projection property over a long horizon") {
    const auto pend = sys_of("pendulum_1d");
    const auto sol = hjk::solve_hj_1dof(pend, 2.0, {-1, 14, 301}, 1);
    CHECK(hjk::lift_and_compare(pend, *sol.section, vec({0}), 5.0, 1e-3) <= 1e-6);

    const auto free = sys_of("free_particle_1d");
    const auto fs = hjk::solve_hj_1dof(free, 0.5, {-1, 10, 12}, 1);
    CHECK(hjk::lift_and_compare(free, *fs.section, vec({0}), 5.0, 1e-3) <= 1e-6);

    // Independent check: the projected K trajectory stays on the level set p = sqrt(2(2 + cos q)).
    const auto traj = hjk::integrate_regular(pend, hjk::TangentPoint(vec({0}), sol.section->value(vec({0}))), 1e-3, 5000);
    double worst = 0.0;
    for (const auto& st : traj.states) worst = std::max(worst, std::abs(st.v[0] - std::sqrt(2 * (2 + std::cos(st.q[0])))));
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("level-set residual and quadrature consistency") {
    for (const auto& [name, energy, ax] : std::vector<std::tuple<const char*, double, Interval>>{
             {"oscillator_1d", 0.5, {-0.9, 0.9, 1001}}, {"pendulum_1d", 2.0, {-3, 3, 1001}}, {"free_particle_1d", 1.0, {0, 1, 101}}}) {
      const auto sys = sys_of(name);
      const auto sol = hjk::solve_hj_1dof(sys, energy, ax, 1);
      const auto h = oracle::hamiltonian_fn(sys);
      for (std::size_t k = 0; k < sol.q.size(); ++k) {
        CHECK(std::abs(h(vec({sol.q[k], sol.p[k]})) - energy) <= 1e-10);
      }
      const double dq = sol.q[1] - sol.q[0];
      double worst = 0.0;
      for (std::size_t k = 2; k + 2 < sol.q.size(); ++k) {
        const double d = (-sol.w[k + 2] + 8 * sol.w[k + 1] - 8 * sol.w[k - 1] + sol.w[k - 2]) / (12 * dq);
        worst = std::max(worst, std::abs(d - sol.p[k]));
      }
      INFO(name);
      CHECK(worst <= 1e-6);
    }
  }
}
