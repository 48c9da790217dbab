#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "transposit/dynamics.hpp"
#include "transposit/generators.hpp"

using namespace transposit;

namespace {

double gap(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

DynState ah_state(double vx, double vy, double a) {
    DynState s;
    s.t = 0;
    s.x = Vec::Zero(3);
    s.v = Vec(3);
    s.v << vx, vy, a * std::hypot(vx, vy);
    return s;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("Appell-Hamel: every formulation gives rate g/(1+a^2) and zdd = -a^2 g/(1+a^2)") {
    for (double a : {1.0, 0.5}) {
        const double g = 9.8, rate = g / (1 + a * a), ddz = -a * a * g / (1 + a * a);
        MechModel t1 = support::builtin("appell_hamel_t1", {{"a", a}});
        MechModel t2 = support::builtin("appell_hamel_t2", {{"a", a}});
        DynState s = ah_state(0.6, 0.8, a);
        for (Formulation f : {Formulation::DAlembert, Formulation::MvmT1, Formulation::VoronetsReduced}) {
            AccelSolution sol = solve(f, t1, s);
            CAPTURE(formulation_id(f));
            CHECK(sol.accel(2) == doctest::Approx(ddz).epsilon(1e-12));
            CHECK(std::abs(sol.mult_rate(0)) == doctest::Approx(rate).epsilon(1e-12));
        }
        AccelSolution sol2 = accel_mvm_t2(t2, s);
        CHECK(sol2.accel(2) == doctest::Approx(ddz).epsilon(1e-12));
        CHECK(std::abs(sol2.mult_rate(0)) == doctest::Approx(rate).epsilon(1e-12));
        CHECK(accel_mvm_t1(t1, s).detG == doctest::Approx(1 + a * a).epsilon(1e-12));
    }
}

TEST_CASE("Appell-Hamel horizontal accelerations from the worked example") {
    MechModel t2 = support::builtin("appell_hamel_t2");
    AccelSolution sol = accel_mvm_t2(t2, ah_state(0.6, 0.8, 1.0));
    CHECK(sol.accel(0) == doctest::Approx(-0.6 * 4.9).epsilon(1e-12));
    CHECK(sol.accel(1) == doctest::Approx(-0.8 * 4.9).epsilon(1e-12));
}

TEST_CASE("Appell-Hamel force decomposition, derived form of F1") {
    MechModel t1 = support::builtin("appell_hamel_t1");
    const double a = 1.0;
    DynState s = ah_state(0.6, 0.8, a);
    AccelSolution sol = accel_mvm_t1(t1, s);
    // F1 vanishes at the solved acceleration.
    Forces f = force_decomposition(t1, s, sol);
    CHECK(f.F1.cwiseAbs().maxCoeff() < 1e-13);
    // At an arbitrary acceleration it follows the closed form.
    sol.accel << 0.3, -0.2, 0.1;
    f = force_decomposition(t1, s, sol);
    const double vx = s.v(0), vy = s.v(1), ax = 0.3, ay = -0.2, s2 = vx * vx + vy * vy;
    const double w = vx * ay - vy * ax;
    CHECK(f.F1(0) == doctest::Approx(a * a * vy * w / s2).epsilon(1e-12));
    CHECK(f.F1(1) == doctest::Approx(-a * a * vx * w / s2).epsilon(1e-12));
    CHECK(std::abs(f.F1(2)) < 1e-14);
}

TEST_CASE("Gantmacher multipliers follow the closed form") {
    MechModel m = support::builtin("gantmacher");
    const double g = 9.8;
    Rng rng(42);
    const auto states = random_states(m, rng, 50);
    REQUIRE(states.size() == 50);
    for (const auto& s : states) {
        const double x1 = s.x(0), x2 = s.x(1), r2 = x1 * x1 + x2 * x2;
        const double mu1 = -(s.v(0) * s.v(0) + s.v(1) * s.v(1)) / r2;
        const double mu2 = (s.v(1) * s.v(3) - s.v(0) * s.v(2) + g * x1) / r2;
        AccelSolution sol = accel_dalembert(m, s);
        const double scale = 1 + std::abs(mu1) + std::abs(mu2);
        CHECK(std::abs(sol.mult_rate(0) - mu1) < 1e-10 * scale);
        CHECK(std::abs(sol.mult_rate(1) - mu2) < 1e-10 * scale);
        // T2 rates coincide with the d'Alembert multipliers.
        CHECK(gap(accel_mvm_t2(m, s).mult_rate, sol.mult_rate) < 1e-10 * scale);
        CHECK(gap(accel_mvm_t1(m, s).accel, sol.accel) < 1e-10 * scale);
    }
}

TEST_CASE("linear-constraint builtins: d'Alembert, T1 and T2 agree") {
    for (const char* name : {"holonomic_circle_a", "holonomic_circle_b", "skate", "gantmacher"}) {
        MechModel m = support::builtin(name);
        Rng rng(7);
        for (const auto& s : random_states(m, rng, 25)) {
            AccelSolution da = accel_dalembert(m, s), t1 = accel_mvm_t1(m, s), t2 = accel_mvm_t2(m, s);
            const double scale = 1 + da.accel.cwiseAbs().maxCoeff();
            CAPTURE(name);
            CHECK(gap(da.accel, t1.accel) < 1e-9 * scale);
            CHECK(gap(da.accel, t2.accel) < 1e-9 * scale);
            CHECK(gap(da.mult_rate, t2.mult_rate) < 1e-9 * (1 + da.mult_rate.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("rolling drum: Chaplygin reduction reproduces the reduced equations") {
    MechModel m = support::builtin("rolling_drum");
    const double mm = 1, J = 0.5, a = 0.1, b = 1, rho = 0.1, g = 9.8;
    Rng rng(9);
    for (const auto& s : random_states(m, rng, 30)) {
        const double dy1 = s.v(3), dy2 = s.v(4);
        const double dd1 = a * rho * mm / (b * (mm * rho * rho + J)) * dy1 * dy2;
        const double dd2 = -(mm * a * b * rho * dy1 * dy1 + mm * g * b) / (mm * a * a + mm * b * b);
        AccelSolution ch = accel_chaplygin_reduced(m, s), da = accel_dalembert(m, s);
        CHECK(ch.accel(3) == doctest::Approx(dd1).epsilon(1e-12).scale(1));
        CHECK(ch.accel(4) == doctest::Approx(dd2).epsilon(1e-12));
        CHECK(gap(ch.accel, da.accel) < 1e-10);
        CHECK(gap(accel_mvm_t2(m, s).accel, da.accel) < 1e-10);
    }
}

TEST_CASE("rolling drum: T1 with aux = dy reduces to plain Euler-Lagrange of L*") {
    // Recorded conflict: this frame drops the Chaplygin coupling term, so ydd1 = 0 with m1 = 0.
    MechModel m = support::builtin("rolling_drum");
    DynState s = support::reference("rolling_drum");
    AccelSolution t1 = accel_mvm_t1(m, s), da = accel_dalembert(m, s);
    CHECK(std::abs(t1.accel(3)) < 1e-13);
    CHECK(std::abs(da.accel(3)) > 1e-3);
    CHECK(gap(accel_voronets_reduced(m, s).accel, t1.accel) < 1e-12);
}

TEST_CASE("reduced form detection") {
    ReducedForm drum = reduced_form(support::builtin("rolling_drum"), true);
    CHECK(drum.dependent == std::vector<int>{0, 1, 2});
    CHECK(drum.independent == std::vector<int>{3, 4});
    for (const auto& phi : drum.phi)
        for (const char* x : {"x1", "x2", "x3", "dx1", "dx2", "dx3"}) CHECK_FALSE(mentions(*phi, x));

    ReducedForm ah = reduced_form(support::builtin("appell_hamel_t1"), false);
    CHECK(ah.dependent == std::vector<int>{2});
    CHECK_THROWS_AS(reduced_form(support::builtin("appell_hamel_t1"), true), Error);
    try {
        reduced_form(support::builtin("appell_hamel_t1"), true);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotChaplyginForm);
    }
    try {
        reduced_form(support::builtin("skate"), false);
        FAIL("skate accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotVoronetsForm);
    }
}

TEST_CASE("integrable Voronets constraint gives A = 0 and matches d'Alembert") {
    MechModel m(parse_model_file("model \"parabola\"\ncoords x1 x2\nlagrangian 0.5*(dx1^2 + dx2^2) - 9.8*x1\n"
                                 "constraint dx1 - 2*x2*dx2\naux dx2\n"));
    Rng rng(2);
    for (const auto& s : random_states(m, rng, 20)) {
        AccelSolution t1 = accel_mvm_t1(m, s), vr = accel_voronets_reduced(m, s), da = accel_dalembert(m, s);
        CHECK(t1.A.cwiseAbs().maxCoeff() < 1e-14);
        CHECK(gap(t1.accel, da.accel) < 1e-12);
        CHECK(gap(vr.accel, da.accel) < 1e-12);
    }
}

TEST_CASE("vakonomic right-hand side on the horizontal skate") {
    MechModel m = support::builtin("skate_vakonomic", {{"lambda0", 1.0}});
    DynState s = support::reference("skate_vakonomic", {{"lambda0", 1.0}});
    REQUIRE(s.lambda.size() == 1);
    CHECK(s.lambda(0) == 1.0);
    AccelSolution sol = rhs_vakonomic(m, s);
    CHECK(sol.accel.allFinite());
    // With lambda = 0 and a straight-line start the motion is unforced.
    DynState s0 = support::reference("skate_vakonomic");
    AccelSolution z = rhs_vakonomic(support::builtin("skate_vakonomic"), s0);
    CHECK(z.accel.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("off-manifold states are rejected when admission is required") {
    MechModel m = support::builtin("skate");
    DynState s = support::reference("skate");
    s.v(1) += 1e-3;
    try {
        accel_dalembert(m, s);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OffManifold);
    }
    SolveOptions lax;
    lax.require_on_manifold = false;
    CHECK_NOTHROW(accel_dalembert(m, s, lax));
}

TEST_CASE("determinacy matrix on Appell-Hamel and skate") {
    CHECK(determinacy_matrix(support::builtin("appell_hamel_t1"), ah_state(1, 0, 1)).detG == doctest::Approx(2.0));
    CHECK(determinacy_matrix(support::builtin("skate"), support::reference("skate")).detG == doctest::Approx(1.0));
}

TEST_CASE("formulation ids round-trip") {
    for (Formulation f : all_formulations()) CHECK(parse_formulation(formulation_id(f)) == f);
    CHECK_THROWS_AS(parse_formulation("hamilton"), Error);
}

}  // TEST_SUITE
