#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "transposit/generators.hpp"
#include "transposit/integrate.hpp"

using namespace transposit;

namespace {

IntegratorConfig config(const MechModel& m, double t_end, double dt, bool project = true) {
    IntegratorConfig c = default_config(m);
    c.t_end = t_end;
    c.dt = dt;
    c.project = project;
    return c;
}

double max_residual(const Trajectory& tr) {
    double r = 0;
    for (const auto& s : tr.samples)
        if (s.residuals.size()) r = std::max(r, s.residuals.cwiseAbs().maxCoeff());
    return r;
}

}  // namespace

TEST_SUITE("integrate") {

TEST_CASE("step count snaps to the nearest whole step") {
    CHECK(step_count(0, 6.2832, 1e-3) == 6283);
    CHECK(step_count(0, 1, 0.1) == 10);
    CHECK(step_count(0, 0.3, 0.1) == 3);
    CHECK(step_count(0, 0, 0.1) == 0);
    CHECK(step_count(1, 2, 0.25) == 4);
}

TEST_CASE("free particle is integrated exactly") {
    MechModel m = support::builtin("free_particle");
    DynState s = support::reference("free_particle");
    Trajectory tr = integrate(m, Formulation::DAlembert, s, config(m, 1.0, 0.01));
    REQUIRE(tr.samples.size() == 101);
    CHECK(tr.samples.back().t == 1.0);
    CHECK(tr.samples.back().x(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(tr.samples.back().x(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(tr.completed);
    CHECK(tr.events.empty());
}

TEST_CASE("samples are strictly increasing in time and carry residuals") {
    MechModel m = support::builtin("skate");
    Trajectory tr = integrate(m, Formulation::MvmT1, support::reference("skate"), config(m, 0.5, 0.01));
    for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].t > tr.samples[i - 1].t);
    for (const auto& s : tr.samples) CHECK(s.residuals.size() == 1);
}

TEST_CASE("projection leaves on-manifold states alone") {
    MechModel m = support::builtin("skate");
    Rng rng(3);
    for (const auto& s : random_states(m, rng, 10)) {
        DynState p = project_velocities(m, s);
        CHECK((p.v - s.v).norm() < 1e-14);
        CHECK(p.x == s.x);
    }
}

TEST_CASE("projection corrects along the constraint gradient") {
    MechModel m = support::builtin("skate");
    DynState s = make_state(m);
    s.x(2) = 0.4;
    s.v << std::cos(0.4), std::sin(0.4), 0.5;
    const Vec n(Vec::Map(std::vector<double>{std::sin(0.4), -std::cos(0.4), 0.0}.data(), 3));
    s.v += 1e-3 * n;
    REQUIRE(std::abs(m.constraint_values(s)(0)) == doctest::Approx(1e-3));
    DynState p = project_velocities(m, s);
    CHECK(std::abs(m.constraint_values(p)(0)) < 1e-12);
    const Vec dv = p.v - s.v;
    CHECK(std::abs(std::abs(dv.normalized().dot(n)) - 1.0) < 1e-12);
    CHECK(p.x == s.x);
    CHECK(p.t == s.t);
}

TEST_CASE("Appell-Hamel at rest: projection or evaluation reports the kink") {
    MechModel m = support::builtin("appell_hamel_t1");
    DynState s = make_state(m);
    s.v << 1e-12, 0.0, 0.5;
    bool reported = false;
    try {
        project_velocities(m, s);
    } catch (const Error& e) {
        reported = e.kind() == ErrorKind::ProjectionFailed || e.kind() == ErrorKind::DomainError;
    }
    CHECK(reported);
}

TEST_CASE("off-manifold initial data is refused") {
    MechModel m = support::builtin("skate");
    DynState s = support::reference("skate");
    s.v(1) = 0.1;
    try {
        integrate(m, Formulation::MvmT1, s, config(m, 1, 0.01));
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InitOffManifold);
    }
}

TEST_CASE("RK4 convergence order on the skate") {
    MechModel m = support::builtin("skate");
    DynState s = support::reference("skate");
    const double t_end = 2.0, dt = 0.02;
    Trajectory ref = integrate(m, Formulation::MvmT1, s, config(m, t_end, dt / 10, false));
    auto err = [&](double h) {
        Trajectory tr = integrate(m, Formulation::MvmT1, s, config(m, t_end, h, false));
        return (tr.samples.back().x - ref.samples.back().x).cwiseAbs().maxCoeff();
    };
    const double ratio = err(dt) / err(dt / 2);
    CAPTURE(ratio);
    CHECK(ratio >= 10);
    CHECK(ratio <= 22);
}

TEST_CASE("projection keeps residuals below 1e-10; without it drift is visible but small") {
    MechModel m = support::builtin("skate");
    DynState s = support::reference("skate");
    Trajectory on = integrate(m, Formulation::MvmT1, s, config(m, 10, 0.01, true));
    Trajectory off = integrate(m, Formulation::MvmT1, s, config(m, 10, 0.01, false));
    CHECK(max_residual(on) < 1e-10);
    CHECK(max_residual(off) < 1e-4);
    CHECK(max_residual(off) >= max_residual(on));
}

TEST_CASE("identical inputs give bit-identical trajectories") {
    MechModel m = support::builtin("gantmacher");
    DynState s = support::reference("gantmacher");
    Trajectory a = integrate(m, Formulation::MvmT2, s, config(m, 1, 0.01));
    Trajectory b = integrate(m, Formulation::MvmT2, s, config(m, 1, 0.01));
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].x == b.samples[i].x);
        CHECK(a.samples[i].v == b.samples[i].v);
    }
}

TEST_CASE("constant monitor has zero drift; skate energy is conserved") {
    MechModel m = support::builtin("skate");
    IntegratorConfig c = config(m, 5, 1e-3);
    c.monitors.push_back({"one", make_constant(1)});
    Trajectory tr = integrate(m, Formulation::MvmT1, support::reference("skate"), c);
    auto drifts = monitor_first_integrals(tr);
    REQUIRE(drifts.size() == 2);
    CHECK(drifts[0].name == "energy");
    CHECK(drifts[0].drift < 1e-8);
    CHECK(drifts[1].drift == 0.0);
}

TEST_CASE("monitor domain errors become events and NaN values") {
    MechModel m = support::builtin("free_particle");
    IntegratorConfig c = config(m, 0.1, 0.05);
    c.monitors = {{"bad", parse_expression("ln(x1)", {{"x1", "x2"}, {}})}};
    Trajectory tr = integrate(m, Formulation::DAlembert, make_state(m), c);
    CHECK(std::isnan(tr.samples[0].monitors(0)));
    CHECK_FALSE(tr.events.empty());
    CHECK(tr.events[0].kind == ErrorKind::DomainError);
}

TEST_CASE("vakonomic motion on an integrable constraint is the holonomic one") {
    MechModel m = support::builtin("holonomic_circle_a");
    DynState s = support::reference("holonomic_circle_a");
    s.lambda = Vec::Zero(1);
    Trajectory vk = integrate(m, Formulation::Vakonomic, s, config(m, 5, 1e-3));
    Trajectory da = integrate(m, Formulation::DAlembert, s, config(m, 5, 1e-3));
    REQUIRE(vk.samples.size() == da.samples.size());
    double gap = 0;
    for (std::size_t i = 0; i < vk.samples.size(); ++i)
        gap = std::max(gap, (vk.samples[i].x - da.samples[i].x).cwiseAbs().maxCoeff());
    CHECK(gap < 1e-8);
}

TEST_CASE("singular frames mid-run are logged as events") {
    // aux x*dy vanishes on the y axis, so W degenerates when x crosses zero.
    MechModel m(parse_model_file("model \"crossing\"\ncoords x y\nlagrangian 0.5*(dx^2 + dy^2)\naux dx\naux x*dy\n"));
    DynState s = make_state(m);
    s.x << -0.05, 0.0;
    s.v << 1.0, 1.0;
    Trajectory tr = integrate(m, Formulation::MvmT1, s, config(m, 0.2, 0.01));
    REQUIRE_FALSE(tr.events.empty());
    CHECK_FALSE(tr.completed);
    CHECK(tr.events.front().kind == ErrorKind::SingularFrame);
}

}  // TEST_SUITE
