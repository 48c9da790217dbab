#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "transposit/generators.hpp"

using namespace transposit;

namespace {

const std::vector<std::string> kCoords{"x1", "x2"};

DynState state2(double t, double x1, double x2, double v1, double v2) {
    DynState s;
    s.t = t;
    s.x = Vec(2);
    s.x << x1, x2;
    s.v = Vec(2);
    s.v << v1, v2;
    return s;
}

Jet2 jet(const std::string& src, const DynState& s) {
    return eval_jet2(parse_expression(src, {kCoords, {}}), kCoords, {}, s);
}

std::vector<long double> pack(const DynState& s) {
    std::vector<long double> p{static_cast<long double>(s.t)};
    for (Eigen::Index i = 0; i < s.x.size(); ++i) p.push_back(s.x(i));
    for (Eigen::Index i = 0; i < s.v.size(); ++i) p.push_back(s.v(i));
    return p;
}

}  // namespace

TEST_SUITE("jet") {

TEST_CASE("constants have zero derivatives") {
    Jet2 j = jet("3.5", state2(0.3, 1, 2, 3, 4));
    CHECK(j.value == 3.5);
    CHECK(j.grad.isZero(0));
    CHECK(j.hess.isZero(0));
    CHECK(j.dim() == 5);
}

TEST_CASE("velocity monomial") {
    Jet2 j = jet("dx1*dx1", state2(0, 0, 0, 2, 0));
    CHECK(j.value == 4);
    CHECK(j.d_v(0) == 4);
    CHECK(j.hess(3, 3) == 2);
    JetMat h = j.hess;
    h(3, 3) = 0;
    CHECK(h.isZero(0));
    CHECK(j.grad.sum() == 4);
}

TEST_CASE("mixed position-velocity partial") {
    Jet2 j = jet("sin(x1)*dx2", state2(0, 0.5, 0, 0, 2));
    CHECK(j.hess(1, 4) == doctest::Approx(std::cos(0.5)).epsilon(1e-15));
    CHECK(j.hess(4, 1) == j.hess(1, 4));
    CHECK(j.d_x(0) == doctest::Approx(2 * std::cos(0.5)));
    CHECK(j.d_v(1) == doctest::Approx(std::sin(0.5)));
}

TEST_CASE("integer powers are exact for low degree polynomials") {
    Jet2 j = jet("x1^3 + t^2*dx2", state2(2, 3, 0, 0, 5));
    CHECK(j.value == 27 + 4 * 5);
    CHECK(j.d_x(0) == 27);
    CHECK(j.hess(1, 1) == 18);
    CHECK(j.d_t() == 20);
    CHECK(j.hess(0, 0) == 10);
    CHECK(j.hess(0, 4) == 4);
}

TEST_CASE("gradient and Hessian match central differences on random expressions") {
    Rng rng(99);
    const Scope scope{kCoords, {}};
    std::uniform_real_distribution<double> u(-1, 1);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        Expr e = random_smooth_expr(rng, 4, scope);
        CompiledExpr c(e, kCoords, {});
        DynState s = state2(u(rng), u(rng), u(rng), u(rng), u(rng));
        Jet2 j = c.eval_jet2(s);
        auto p = pack(s);
        const long double h = 1e-5L;
        auto f = [&](std::vector<long double> q) { return c.eval<long double>(q.data()); };
        for (int a = 0; a < 5; ++a) {
            auto pp = p, pm = p;
            pp[a] += h;
            pm[a] -= h;
            const double fd = static_cast<double>((f(pp) - f(pm)) / (2 * h));
            CAPTURE(pretty_print(e));
            CHECK(std::abs(j.grad(a) - fd) / (1 + std::abs(j.grad(a))) < 1e-6);
            for (int b = 0; b < 5; ++b) {
                auto q1 = p, q2 = p, q3 = p, q4 = p;
                q1[a] += h; q1[b] += h;
                q2[a] += h; q2[b] -= h;
                q3[a] -= h; q3[b] += h;
                q4[a] -= h; q4[b] -= h;
                const double fdh = static_cast<double>((f(q1) - f(q2) - f(q3) + f(q4)) / (4 * h * h));
                CHECK(std::abs(j.hess(a, b) - fdh) / (1 + std::abs(j.hess(a, b))) < 1e-6);
            }
        }
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("linearity of the jet map") {
    Rng rng(5);
    const Scope scope{kCoords, {}};
    for (int i = 0; i < 50; ++i) {
        Expr e1 = random_smooth_expr(rng, 3, scope);
        Expr e2 = random_smooth_expr(rng, 3, scope);
        const double a = 1.75;
        Expr comb = make_binary('+', make_binary('*', make_constant(a), e1), e2);
        DynState s = state2(0.2, -0.4, 0.7, 0.1, -0.9);
        Jet2 j1 = eval_jet2(e1, kCoords, {}, s), j2 = eval_jet2(e2, kCoords, {}, s), jc = eval_jet2(comb, kCoords, {}, s);
        const double scale = 1 + std::abs(j1.value) + std::abs(j2.value) + j1.hess.cwiseAbs().maxCoeff() +
                             j2.hess.cwiseAbs().maxCoeff() + j1.grad.cwiseAbs().maxCoeff() + j2.grad.cwiseAbs().maxCoeff();
        CHECK(std::abs(jc.value - (a * j1.value + j2.value)) <= 1e-14 * scale);
        CHECK((jc.grad - (a * j1.grad + j2.grad)).cwiseAbs().maxCoeff() <= 1e-14 * scale);
        CHECK((jc.hess - (a * j1.hess + j2.hess)).cwiseAbs().maxCoeff() <= 1e-14 * scale);
    }
}

TEST_CASE("absent variables have exactly zero rows") {
    Rng rng(8);
    const Scope only_x1{{"x1"}, {}};
    for (int i = 0; i < 50; ++i) {
        Expr e = random_smooth_expr(rng, 4, only_x1);
        Jet2 j = eval_jet2(e, kCoords, {}, state2(0.1, 0.3, 0.5, -0.2, 0.4));
        const bool uses_t = mentions(*e, "t");
        for (int row : {2, 4}) {
            CHECK(j.grad(row) == 0.0);
            CHECK(j.hess.row(row).isZero(0));
            CHECK(j.hess.col(row).isZero(0));
        }
        if (!uses_t) CHECK(j.grad(0) == 0.0);
    }
}

TEST_CASE("Hessians are exactly symmetric") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        Expr e = random_smooth_expr(rng, 5, {kCoords, {}});
        Jet2 j = eval_jet2(e, kCoords, {}, state2(0.5, 0.2, -0.3, 0.8, -0.6));
        CHECK((j.hess - j.hess.transpose()).isZero(0));
    }
}

TEST_CASE("domain errors name the sub-expression") {
    const DynState zero = state2(0, 0, 0, 0, 0);
    try {
        jet("dx1 + 1/x1", zero);
        FAIL("no error");
    } catch (const DomainError& e) {
        CHECK(e.subexpression() == "(1 / x1)");
    }
    CHECK_THROWS_AS(jet("sqrt(x1 - 1)", zero), DomainError);
    CHECK_THROWS_AS(jet("ln(x2)", zero), DomainError);
    CHECK_THROWS_AS(jet("atan2(x1, x2)", zero), DomainError);
    // Not differentiable at the kink even though the value exists.
    CHECK_THROWS_AS(jet("sqrt(dx1^2 + dx2^2)", zero), DomainError);
    CHECK_NOTHROW(CompiledExpr(parse_expression("sqrt(dx1^2 + dx2^2)", {kCoords, {}}), kCoords, {}).eval(zero));
}

TEST_CASE("evaluation is deterministic") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        Expr e = random_smooth_expr(rng, 5, {kCoords, {}});
        DynState s = state2(0.1, 0.2, 0.3, 0.4, 0.5);
        Jet2 a = eval_jet2(e, kCoords, {}, s), b = eval_jet2(e, kCoords, {}, s);
        CHECK(a.value == b.value);
        CHECK(a.grad == b.grad);
        CHECK(a.hess == b.hess);
    }
}

TEST_CASE("parameters are folded from bound values") {
    Expr e = parse_expression("k*x1^2", {kCoords, {"k"}});
    Jet2 j = eval_jet2(e, kCoords, {{"k", 3.0}}, state2(0, 2, 0, 0, 0));
    CHECK(j.value == 12);
    CHECK(j.hess(1, 1) == 6);
}

}  // TEST_SUITE
