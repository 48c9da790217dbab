#include "transposit/suites.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "transposit/dynamics.hpp"
#include "transposit/errors.hpp"
#include "transposit/generators.hpp"
#include "transposit/integrate.hpp"
#include "transposit/lagrange.hpp"
#include "transposit/models.hpp"
#include "transposit/sweep.hpp"
#include "transposit/transposition.hpp"

namespace transposit {

namespace {

struct Worst {
    double value = 0.0;
    int count = 0;
    int failures = 0;
    std::string first_failure;

    void add(double e) {
        value = std::isnan(e) || std::isnan(value) ? std::numeric_limits<double>::quiet_NaN() : std::max(value, e);
        ++count;
    }
    void fail(const std::string& why) {
        if (failures++ == 0) first_failure = why;
    }
};

CheckResult result(const std::string& suite, const std::string& name, const Worst& w, double tol) {
    CheckResult r;
    r.suite = suite;
    r.name = name;
    r.value = w.value;
    r.tolerance = tol;
    r.passed = w.count > 0 && w.failures == 0 && w.value < tol;
    std::ostringstream d;
    d << w.count << " samples";
    if (w.failures) d << ", " << w.failures << " failed (" << w.first_failure << ")";
    r.detail = d.str();
    return r;
}

double maxabs(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }
double scaled(const Vec& a, const Vec& b) { return maxabs(a - b) / std::max(1.0, maxabs(a)); }

std::vector<SweepItem> sweep(const MechModel& m, Formulation f, const std::vector<DynState>& states,
                             const SuiteOptions& opt) {
    return opt.parallel ? sweep_parallel(m, f, states) : sweep_serial(m, f, states);
}

// Admissible states whose T1 and T2 frames are both nonsingular.
std::vector<DynState> frame_states(const MechModel& m, Rng& rng, int count) {
    std::vector<DynState> out;
    for (int draw = 0; draw < 100 * count && static_cast<int>(out.size()) < count; ++draw) {
        DynState s;
        if (!random_state(m, rng, s)) continue;
        try {
            StateSplits sp = compute_splits(m, s);
            if (build_frames(sp, FrameVariant::T1).singular()) continue;
            if (build_frames(sp, FrameVariant::T2).singular()) continue;
        } catch (const Error&) {
            continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

Rng model_rng(const SuiteOptions& opt, const std::string& name) {
    std::seed_seq seq(name.begin(), name.end());
    std::vector<std::uint32_t> words(2);
    seq.generate(words.begin(), words.end());
    return Rng(opt.seed ^ (static_cast<std::uint64_t>(words[0]) << 32 | words[1]));
}

// ---------------------------------------------------------------- autodiff

std::vector<CheckResult> autodiff_suite(const SuiteOptions& opt) {
    Rng rng(opt.seed);
    Worst grad, hess;
    const int count = std::max(opt.states, 100);
    for (int i = 0; i < count; ++i) {
        const int n = std::uniform_int_distribution<int>(1, 3)(rng);
        Scope scope;
        for (int k = 0; k < n; ++k) scope.coords.push_back("q" + std::to_string(k + 1));
        Expr e = random_smooth_expr(rng, 3, scope);
        CompiledExpr ce(e, scope.coords, {});
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const int dim = 1 + 2 * n;
        std::vector<long double> p(dim);
        DynState s;
        s.x.resize(n);
        s.v.resize(n);
        for (int k = 0; k < dim; ++k) p[k] = u(rng);
        s.t = static_cast<double>(p[0]);
        for (int k = 0; k < n; ++k) {
            s.x(k) = static_cast<double>(p[1 + k]);
            s.v(k) = static_cast<double>(p[1 + n + k]);
        }
        try {
            const Jet2 j = ce.eval_jet2(s);
            const long double h = 1e-5L;
            auto f = [&](int a, int sa, int b, int sb) {
                std::vector<long double> q = p;
                if (a >= 0) q[a] += sa * h;
                if (b >= 0) q[b] += sb * h;
                return ce.eval<long double>(q.data());
            };
            for (int a = 0; a < dim; ++a) {
                const long double fd = (f(a, 1, -1, 0) - f(a, -1, -1, 0)) / (2 * h);
                grad.add(std::abs(j.grad(a) - static_cast<double>(fd)) / (1.0 + std::abs(j.grad(a))));
                for (int b = 0; b < dim; ++b) {
                    long double fd2;
                    if (a == b)
                        fd2 = (f(a, 1, -1, 0) - 2 * f(-1, 0, -1, 0) + f(a, -1, -1, 0)) / (h * h);
                    else
                        fd2 = (f(a, 1, b, 1) - f(a, 1, b, -1) - f(a, -1, b, 1) + f(a, -1, b, -1)) / (4 * h * h);
                    hess.add(std::abs(j.hess(a, b) - static_cast<double>(fd2)) / (1.0 + std::abs(j.hess(a, b))));
                }
            }
        } catch (const Error& err) {
            grad.fail(err.what());
        }
    }
    return {result("autodiff", "gradient vs central differences", grad, 1e-6),
            result("autodiff", "hessian vs central differences", hess, 1e-6)};
}

// ---------------------------------------------------------------- frames

std::vector<CheckResult> frames_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    for (const auto& name : builtin_names()) {
        BuiltinModel b = get_builtin(name);
        MechModel m(b.spec);
        Rng rng = model_rng(opt, name);
        std::vector<DynState> states{b.reference(m)};
        for (auto& s : random_states(m, rng, opt.states)) states.push_back(std::move(s));

        Worst resid, rank;
        const RankReport rr = check_constraint_rank(m, states.front());
        rank.add(rr.full_rank ? 0.0 : 1.0);
        for (const auto& s : states) {
            for (FrameVariant var : {FrameVariant::T1, FrameVariant::T2}) {
                try {
                    StateSplits sp = compute_splits(m, s);
                    FrameMatrices fr = build_frames(sp, var);
                    if (fr.singular()) continue;
                    const Vec acc = accel_dalembert(m, s).accel;
                    const Mat A = solve_A(fr, acc);
                    const Mat om = fr.omega(acc);
                    resid.add((fr.W * A - om).cwiseAbs().maxCoeff() / (1.0 + om.cwiseAbs().maxCoeff()));
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::DomainError) resid.fail(e.what());
                }
            }
        }
        out.push_back(result("frames", name + " rank at reference", rank, 0.5));
        out.push_back(result("frames", name + " W*A - Omega", resid, 1e-10));
    }

    auto det_check = [&](const std::string& name, FrameVariant var, auto expected) {
        BuiltinModel b = get_builtin(name);
        MechModel m(b.spec);
        Rng rng = model_rng(opt, name + "det");
        Worst w;
        for (const auto& s : random_states(m, rng, opt.states)) {
            try {
                const double det = build_frames(m, s, var).detW;
                const double want = expected(m, s);
                w.add(std::abs(det - want) / std::max(1.0, std::abs(want)));
            } catch (const DomainError&) {
            }
        }
        out.push_back(result("frames", name + " detW " + to_string(var), w, 1e-12));
    };
    det_check("skate", FrameVariant::T1, [](const MechModel&, const DynState&) { return 1.0; });
    det_check("free_particle", FrameVariant::T1, [](const MechModel&, const DynState&) { return 1.0; });
    det_check("rolling_drum", FrameVariant::T1, [](const MechModel&, const DynState&) { return 1.0; });
    det_check("gantmacher", FrameVariant::T1, [](const MechModel&, const DynState& s) {
        const double r2 = s.x(0) * s.x(0) + s.x(1) * s.x(1);
        return r2 * r2;
    });
    det_check("appell_hamel_t2", FrameVariant::T2, [](const MechModel& m, const DynState&) {
        const double a = m.param("a", 1.0);
        return 1.0 + a * a;
    });
    return out;
}

// ---------------------------------------------------------------- equivalence

void compare_pair(std::vector<CheckResult>& out, const std::string& label, const std::vector<SweepItem>& a,
                  const std::vector<SweepItem>& b, bool rates) {
    Worst acc, rate;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].ok || !b[i].ok) {
            acc.fail(!a[i].ok ? a[i].message : b[i].message);
            continue;
        }
        acc.add(scaled(a[i].solution.accel, b[i].solution.accel));
        if (rates) rate.add(scaled(a[i].solution.mult_rate, b[i].solution.mult_rate));
    }
    out.push_back(result("equivalence", label + " accel", acc, 1e-9));
    if (rates) out.push_back(result("equivalence", label + " multiplier rate", rate, 1e-9));
}

std::vector<CheckResult> equivalence_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    using F = Formulation;
    for (const std::string name :
         {"free_particle", "holonomic_circle_a", "holonomic_circle_b", "skate", "gantmacher", "rolling_drum"}) {
        MechModel m(get_builtin(name).spec);
        Rng rng = model_rng(opt, name);
        const auto states = frame_states(m, rng, opt.states);
        const auto da = sweep(m, F::DAlembert, states, opt);
        const auto t1 = sweep(m, F::MvmT1, states, opt);
        const auto t2 = sweep(m, F::MvmT2, states, opt);
        compare_pair(out, name + " dalembert~mvm-t1", da, t1, false);
        compare_pair(out, name + " dalembert~mvm-t2", da, t2, true);
        compare_pair(out, name + " mvm-t1~mvm-t2", t1, t2, false);
        if (name == "rolling_drum") {
            compare_pair(out, name + " chaplygin~dalembert", sweep(m, F::ChaplyginReduced, states, opt), da, true);
            compare_pair(out, name + " voronets~mvm-t1", sweep(m, F::VoronetsReduced, states, opt), t1, true);
        }
    }
    for (const std::string name : {"appell_hamel_t1", "appell_hamel_t2"}) {
        MechModel m(get_builtin(name).spec);
        Rng rng = model_rng(opt, name);
        const auto states = frame_states(m, rng, opt.states);
        const auto da = sweep(m, F::DAlembert, states, opt);
        if (name == "appell_hamel_t1") {
            const auto t1 = sweep(m, F::MvmT1, states, opt);
            compare_pair(out, name + " dalembert~mvm-t1", da, t1, true);
            compare_pair(out, name + " voronets~mvm-t1", sweep(m, F::VoronetsReduced, states, opt), t1, true);
        } else {
            compare_pair(out, name + " dalembert~mvm-t2", da, sweep(m, F::MvmT2, states, opt), true);
        }
    }
    return out;
}

// ---------------------------------------------------------------- transposition

std::vector<CheckResult> transposition_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    {
        MechModel m(get_builtin("free_particle").spec);
        Rng rng = model_rng(opt, "free_particle");
        Worst w;
        for (const auto& s : random_states(m, rng, opt.states)) {
            const auto sol = accel_mvm_t1(m, s);
            w.add(sol.A.cwiseAbs().maxCoeff());
        }
        out.push_back(result("transposition", "free_particle A == 0", w, 1e-300));
    }
    for (const auto& name : builtin_names()) {
        MechModel m(get_builtin(name).spec);
        Rng rng = model_rng(opt, name + "adm");
        Worst chet, adm;
        for (const auto& s : frame_states(m, rng, opt.states)) {
            try {
                const Vec acc = accel_dalembert(m, s).accel;
                for (const auto& var : chetaev_basis(m, s)) {
                    chet.add(chetaev_residual(m, s, var.delta_x));
                    adm.add(admissibility_residual(m, s, acc, var, FrameVariant::T1));
                    adm.add(admissibility_residual(m, s, acc, var, FrameVariant::T2));
                }
            } catch (const Error& e) {
                adm.fail(e.what());
            }
        }
        out.push_back(result("transposition", name + " chetaev closure", chet, 1e-10));
        out.push_back(result("transposition", name + " admissibility", adm, 1e-9));
    }
    {
        MechModel m(get_builtin("holonomic_circle_b").spec);
        Rng rng = model_rng(opt, "circle_b_zero");
        Worst w;
        for (const auto& s : frame_states(m, rng, opt.states)) w.add(accel_mvm_t1(m, s).A.cwiseAbs().maxCoeff());
        out.push_back(result("transposition", "holonomic_circle_b A == 0", w, 1e-12));
    }
    {
        MechModel m(get_builtin("skate").spec);
        Rng rng = model_rng(opt, "skate_nonzero");
        double biggest = 0.0;
        for (const auto& s : frame_states(m, rng, opt.states))
            biggest = std::max(biggest, accel_mvm_t1(m, s).A.cwiseAbs().maxCoeff());
        Worst w;
        w.add(biggest > 0.1 ? 0.0 : 1.0);
        out.push_back(result("transposition", "skate has |A| entry > 0.1", w, 0.5));
    }
    for (const std::string name : {"rolling_drum", "appell_hamel_t1"}) {
        MechModel m(get_builtin(name).spec);
        const ReducedForm form = reduced_form(m, false);
        Rng rng = model_rng(opt, name + "voronets");
        Worst w;
        for (const auto& s : frame_states(m, rng, opt.states)) {
            const auto sol = accel_mvm_t1(m, s);
            for (int k : form.independent) w.add(sol.A.row(k).cwiseAbs().maxCoeff());
        }
        out.push_back(result("transposition", name + " voronets y-rows exactly zero", w, 1e-300));
    }
    return out;
}

// ---------------------------------------------------------------- oracles

double trajectory_error(const Trajectory& traj, const std::function<OracleValues(double)>& oracle) {
    double worst = 0.0;
    for (const auto& smp : traj.samples) {
        const OracleValues o = oracle(smp.t);
        worst = std::max({worst, std::abs(smp.x(0) - o.at("x")), std::abs(smp.x(1) - o.at("y"))});
    }
    return worst;
}

std::vector<CheckResult> oracles_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    using F = Formulation;
    const double pi = 3.14159265358979323846;
    {
        const double alpha = pi / 6;
        MechModel m(get_builtin("skate").spec, {{"g", 1.0 / std::sin(alpha)}, {"alpha", alpha}, {"omega", 1.0}});
        DynState s = make_state(m);
        s.v(2) = 1.0;
        IntegratorConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_end = 2 * pi;
        const Trajectory tr = integrate(m, F::MvmT1, s, cfg);
        Worst w;
        w.add(trajectory_error(tr, [&](double t) {
            return oracle_eval("skate", "cycloid", t, {{"g", 1.0 / std::sin(alpha)}, {"alpha", alpha}, {"omega", 1.0}});
        }));
        if (!tr.completed) w.fail("run stopped");
        out.push_back(result("oracles", "skate cycloid", w, 1e-6));
    }
    {
        const double w0 = 1.3, phi0 = 0.3, speed = 0.7;
        MechModel m(get_builtin("skate").spec, {{"alpha", 0.0}, {"omega", w0}});
        DynState s = make_state(m);
        s.x << 0.2, -0.1, phi0;
        s.v << speed * std::cos(phi0), speed * std::sin(phi0), w0;
        IntegratorConfig cfg;
        cfg.t_end = 5.0;
        const Trajectory tr = integrate(m, F::MvmT1, s, cfg);
        const OracleValues setup{{"omega", w0}, {"x0", 0.2}, {"y0", -0.1}, {"phi0", phi0},
                                 {"dx0", s.v(0)}, {"dy0", s.v(1)}};
        const OracleValues c = oracle_eval("skate", "circle", 0.0, setup);
        Worst radius, pos;
        for (const auto& smp : tr.samples)
            radius.add(std::abs(std::hypot(smp.x(0) - c.at("cx"), smp.x(1) - c.at("cy")) - c.at("radius")));
        pos.add(trajectory_error(tr, [&](double t) { return oracle_eval("skate", "circle", t, setup); }));
        out.push_back(result("oracles", "skate circle radius", radius, 1e-6));
        out.push_back(result("oracles", "skate circle position", pos, 1e-6));
    }
    {
        const double phi0 = 0.4;
        MechModel m(get_builtin("skate").spec, {{"omega", 0.0}});
        DynState s = make_state(m);
        s.x << 0.1, 0.2, phi0;
        s.v << 0.5 * std::cos(phi0), 0.5 * std::sin(phi0), 0.0;
        IntegratorConfig cfg;
        cfg.t_end = 2.0;
        const Trajectory tr = integrate(m, F::MvmT1, s, cfg);
        const OracleValues setup{{"phi0", phi0}, {"x0", 0.1}, {"y0", 0.2}, {"dx0", s.v(0)}, {"dy0", s.v(1)}};
        Worst w;
        w.add(trajectory_error(tr, [&](double t) { return oracle_eval("skate", "straight_line", t, setup); }));
        out.push_back(result("oracles", "skate straight line", w, 1e-6));
    }
    for (const std::string name : {"appell_hamel_t1", "appell_hamel_t2"}) {
        BuiltinModel b = get_builtin(name);
        MechModel m(b.spec);
        const OracleValues c = oracle_eval(name, "constants", 0.0, {});
        for (Formulation f : {F::DAlembert, name == "appell_hamel_t1" ? F::MvmT1 : F::MvmT2}) {
            DynState s = make_state(m);
            s.v << 10.0, 5.0, std::hypot(10.0, 5.0);
            IntegratorConfig cfg;
            cfg.t_end = 2.0;
            Worst w;
            try {
                const Trajectory tr = integrate(m, f, s, cfg);
                if (!tr.completed) w.fail("run stopped");
                const AccelFn fn = make_accel_fn(f, m);
                for (std::size_t i = 0; i < tr.samples.size(); i += 100) {
                    DynState st = s;
                    st.t = tr.samples[i].t;
                    st.x = tr.samples[i].x;
                    st.v = tr.samples[i].v;
                    const AccelSolution sol = fn(st);
                    w.add(std::abs(sol.mult_rate(0) - c.at("rate")));
                    w.add(std::abs(sol.accel(2) - c.at("ddz")));
                }
            } catch (const Error& e) {
                w.fail(e.what());
            }
            out.push_back(result("oracles", name + " " + formulation_id(f) + " constants", w, 1e-9));
        }
    }
    {
        MechModel m(get_builtin("gantmacher").spec);
        Rng rng = model_rng(opt, "gantmacher_mult");
        Worst w;
        for (const auto& s : random_states(m, rng, opt.states)) {
            OracleValues setup;
            for (int k = 0; k < 4; ++k) {
                setup["x" + std::to_string(k + 1)] = s.x(k);
                setup["dx" + std::to_string(k + 1)] = s.v(k);
            }
            const OracleValues o = oracle_eval("gantmacher", "multipliers", 0.0, setup);
            const Vec mu = accel_dalembert(m, s).mult_rate;
            w.add(std::max(std::abs(mu(0) - o.at("mu1")), std::abs(mu(1) - o.at("mu2"))));
        }
        out.push_back(result("oracles", "gantmacher multipliers", w, 1e-10));
    }
    {
        MechModel m(get_builtin("rolling_drum").spec);
        const ReducedForm form = reduced_form(m, true);
        Rng rng = model_rng(opt, "drum_reduced");
        Worst w;
        for (const auto& s : random_states(m, rng, opt.states)) {
            const Vec acc = accel_chaplygin_reduced(m, form, s).accel;
            const OracleValues o =
                oracle_eval("rolling_drum", "reduced_accel", 0.0, {{"y2", s.x(4)}, {"dy1", s.v(3)}, {"dy2", s.v(4)}});
            w.add(std::max(std::abs(acc(3) - o.at("ddy1")), std::abs(acc(4) - o.at("ddy2"))));
        }
        out.push_back(result("oracles", "rolling_drum reduced equations", w, 1e-9));
    }
    {
        MechModel m(get_builtin("skate_vakonomic").spec, {{"lambda0", 1.0}, {"omega", 0.3}});
        DynState s = get_builtin("skate_vakonomic").reference(m);
        IntegratorConfig cfg;
        cfg.t_end = 3.0;
        const Trajectory tr = integrate(m, F::Vakonomic, s, cfg);
        Worst w;
        for (const auto& smp : tr.samples) {
            const OracleValues o = oracle_eval("skate_vakonomic", "invariants", 0.0,
                                               {{"lambda0", 1.0}, {"dx0", 1.0}, {"dy0", 0.0}, {"phi", smp.x(2)}});
            w.add(std::max({std::abs(smp.v(0) - o.at("dx")), std::abs(smp.v(1) - o.at("dy")),
                            std::abs(smp.mult(0) - o.at("lambda"))}));
        }
        out.push_back(result("oracles", "skate_vakonomic first integrals", w, 1e-6));
    }
    return out;
}

// ---------------------------------------------------------------- integrals

std::vector<CheckResult> integrals_suite(const SuiteOptions&) {
    std::vector<CheckResult> out;
    {
        BuiltinModel b = get_builtin("rolling_drum");
        MechModel m(b.spec);
        IntegratorConfig cfg = default_config(m);
        cfg.t_end = 10.0;
        const Trajectory tr = integrate(m, Formulation::ChaplyginReduced, b.reference(m), cfg);
        for (const auto& d : monitor_first_integrals(tr)) {
            Worst w;
            w.add(d.drift);
            out.push_back(result("integrals", "rolling_drum " + d.name + " drift", w, 1e-6));
        }
    }
    {
        BuiltinModel b = get_builtin("skate");
        MechModel m(b.spec);
        IntegratorConfig cfg = default_config(m);
        cfg.t_end = 10.0;
        const Trajectory tr = integrate(m, Formulation::MvmT1, b.reference(m), cfg);
        Worst w;
        w.add(monitor_first_integrals(tr).at(0).drift);
        out.push_back(result("integrals", "skate energy drift", w, 1e-8));
    }
    for (const auto& name : builtin_names()) {
        BuiltinModel b = get_builtin(name);
        MechModel m(b.spec);
        IntegratorConfig cfg = default_config(m);
        cfg.t_end = name.rfind("appell_hamel", 0) == 0 ? 0.15 : 10.0;
        Worst w;
        try {
            const Trajectory tr = integrate(m, b.recommended.front(), b.reference(m), cfg);
            if (!tr.completed) w.fail("run stopped");
            for (const auto& smp : tr.samples) w.add(maxabs(smp.residuals));
        } catch (const Error& e) {
            w.fail(e.what());
        }
        out.push_back(result("integrals", name + " projected residual", w, 1e-10));
    }
    return out;
}

}  // namespace

const std::vector<std::string>& suite_ids() {
    static const std::vector<std::string> ids{"autodiff", "frames", "equivalence", "transposition", "oracles",
                                              "integrals"};
    return ids;
}

std::vector<CheckResult> run_suite(const std::string& id, const SuiteOptions& opt) {
    if (id == "autodiff") return autodiff_suite(opt);
    if (id == "frames") return frames_suite(opt);
    if (id == "equivalence") return equivalence_suite(opt);
    if (id == "transposition") return transposition_suite(opt);
    if (id == "oracles") return oracles_suite(opt);
    if (id == "integrals") return integrals_suite(opt);
    throw Error(ErrorKind::InvalidArgument, "unknown suite '" + id + "'");
}

}  // namespace transposit
