#include "transposit/integrate.hpp"

#include <cmath>
#include <limits>

#include "transposit/lagrange.hpp"

namespace transposit {

IntegratorConfig default_config(const MechModel& model) {
    IntegratorConfig cfg;
    cfg.monitors = model.spec().monitors;
    return cfg;
}

long step_count(double t0, double t_end, double dt) {
    const double q = (t_end - t0) / dt;
    if (!(q > 0)) return 0;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<long>(r);
    return static_cast<long>(std::floor(q));
}

DynState project_velocities(const MechModel& model, const DynState& s, double tol, int max_iter) {
    DynState out = s;
    const int m = model.m();
    if (m == 0) return out;
    for (int it = 0;; ++it) {
        Mat J(m, model.n());
        Vec r(m);
        for (int a = 0; a < m; ++a) {
            Jet2 j = model.constraint(a).eval_jet2(out);
            r(a) = j.value;
            for (int k = 0; k < model.n(); ++k) J(a, k) = j.d_v(k);
        }
        if (r.lpNorm<Eigen::Infinity>() < tol) return out;
        if (it == max_iter)
            throw Error(ErrorKind::ProjectionFailed,
                        "residual " + std::to_string(r.lpNorm<Eigen::Infinity>()) + " after " +
                            std::to_string(max_iter) + " iterations");
        out.v -= J.transpose() * (J * J.transpose()).ldlt().solve(r);
    }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Deriv {
    Vec dx, dv, dl;
};

class Stepper {
public:
    Stepper(const MechModel& model, Formulation f, const IntegratorConfig& cfg)
        : model_(model), f_(f), cfg_(cfg) {
        SolveOptions opt = cfg.solve;
        opt.require_on_manifold = false;
        rhs_ = make_accel_fn(f, model, opt);
        for (const auto& mon : cfg.monitors) monitors_.emplace_back(mon.expr, model.spec().coords, model.params());
    }

    AccelSolution eval(const DynState& s) const { return rhs_(s); }

    Deriv deriv(const DynState& s, const AccelSolution& sol) const {
        Deriv d{s.v, sol.accel, Vec()};
        if (f_ == Formulation::Vakonomic) d.dl = sol.mult_rate;
        return d;
    }

    DynState advance(const DynState& s, const Deriv& d, double h) const {
        DynState o = s;
        o.t = s.t + h;
        o.x += h * d.dx;
        o.v += h * d.dv;
        if (d.dl.size()) o.lambda += h * d.dl;
        return o;
    }

    // Classic RK4; k1 supplied by the caller.
    DynState rk4(const DynState& s, const AccelSolution& first, double h) const {
        const Deriv k1 = deriv(s, first);
        const DynState s2 = advance(s, k1, h / 2);
        const Deriv k2 = deriv(s2, eval(s2));
        const DynState s3 = advance(s, k2, h / 2);
        const Deriv k3 = deriv(s3, eval(s3));
        const DynState s4 = advance(s, k3, h);
        const Deriv k4 = deriv(s4, eval(s4));
        DynState o = s;
        o.t = s.t + h;
        o.x += h / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
        o.v += h / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
        if (k1.dl.size()) o.lambda += h / 6 * (k1.dl + 2 * k2.dl + 2 * k3.dl + k4.dl);
        return o;
    }

    Sample sample(const DynState& s, const AccelSolution& sol, std::vector<Event>& events) const {
        Sample out;
        out.t = s.t;
        out.x = s.x;
        out.v = s.v;
        out.mult = f_ == Formulation::Vakonomic ? s.lambda : sol.mult_rate;
        out.residuals = model_.constraint_values(s);
        out.detW = kNaN;
        out.detG = sol.detG;
        try {
            if (sol.frames) {
                out.detW = sol.frames->detW;
            } else {
                out.detW = build_frames(model_, s, FrameVariant::T1, cfg_.solve.singular_rel_threshold).detW;
            }
        } catch (const Error&) {
        }
        if (std::isnan(out.detG)) {
            try {
                out.detG = determinacy_matrix(model_, s, cfg_.solve).detG;
            } catch (const Error&) {
            }
        }
        out.monitors.resize(static_cast<Eigen::Index>(monitors_.size()));
        for (std::size_t i = 0; i < monitors_.size(); ++i) {
            try {
                out.monitors(i) = monitors_[i].eval(s);
            } catch (const DomainError& e) {
                out.monitors(i) = kNaN;
                events.push_back({s.t, ErrorKind::DomainError, e.what()});
            }
        }
        return out;
    }

private:
    const MechModel& model_;
    Formulation f_;
    const IntegratorConfig& cfg_;
    AccelFn rhs_;
    std::vector<CompiledExpr> monitors_;
};

bool recoverable(ErrorKind k) {
    return k == ErrorKind::SingularFrame || k == ErrorKind::SingularSystem || k == ErrorKind::DomainError;
}

}  // namespace

Trajectory integrate(const MechModel& model, Formulation f, const DynState& init, const IntegratorConfig& cfg) {
    if (!(cfg.dt > 0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    DynState s = init;
    if (f == Formulation::Vakonomic && s.lambda.size() != model.m()) s.lambda = Vec::Zero(model.m());
    if (model.m() > 0) {
        const double r = model.constraint_values(s).lpNorm<Eigen::Infinity>();
        if (r > cfg.solve.admission_tol)
            throw Error(ErrorKind::InitOffManifold, "max |L_a| = " + std::to_string(r));
    }

    Stepper stepper(model, f, cfg);
    Trajectory traj;
    traj.formulation = f;
    for (const auto& mon : cfg.monitors) traj.monitor_names.push_back(mon.name);

    AccelSolution sol = stepper.eval(s);
    traj.samples.push_back(stepper.sample(s, sol, traj.events));

    const double t0 = s.t;
    const long steps = step_count(t0, cfg.t_end, cfg.dt);
    traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
    for (long k = 1; k <= steps; ++k) {
        const double t_next = t0 + static_cast<double>(k) * cfg.dt;
        const double h = t_next - s.t;
        DynState next;
        try {
            next = stepper.rk4(s, sol, h);
            sol = stepper.eval(next);
        } catch (const Error& e) {
            if (!recoverable(e.kind())) throw;
            try {
                DynState mid = stepper.rk4(s, sol, h / 2);
                next = stepper.rk4(mid, stepper.eval(mid), h / 2);
                sol = stepper.eval(next);
            } catch (const Error& e2) {
                if (!recoverable(e2.kind())) throw;
                traj.events.push_back({s.t, e2.kind(), e2.what()});
                traj.completed = false;
                break;
            }
        }
        next.t = t_next;
        if (cfg.project && model.m() > 0) {
            try {
                DynState projected = project_velocities(model, next, cfg.projection_tol, cfg.projection_max_iter);
                if (projected.v != next.v) {
                    next = projected;
                    sol = stepper.eval(next);
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ProjectionFailed && !recoverable(e.kind())) throw;
                traj.events.push_back({next.t, e.kind(), e.what()});
                if (e.kind() != ErrorKind::ProjectionFailed) {
                    traj.completed = false;
                    break;
                }
            }
        }
        const double det_prev = traj.samples.back().detW;
        s = std::move(next);
        traj.samples.push_back(stepper.sample(s, sol, traj.events));
        // detW changing sign means the frame passed through a singular point inside the step.
        const double det_now = traj.samples.back().detW;
        if (std::isfinite(det_prev) && std::isfinite(det_now) && det_prev * det_now < 0) {
            traj.events.push_back({s.t, ErrorKind::SingularFrame,
                                   "frame determinant changed sign between t = " +
                                       std::to_string(s.t - h) + " and t = " + std::to_string(s.t)});
            traj.completed = false;
            break;
        }
    }
    return traj;
}

std::vector<MonitorDrift> monitor_first_integrals(const Trajectory& traj) {
    std::vector<MonitorDrift> out;
    for (std::size_t i = 0; i < traj.monitor_names.size(); ++i) {
        MonitorDrift d{traj.monitor_names[i], 0.0};
        if (!traj.samples.empty()) {
            const double v0 = traj.samples.front().monitors(i);
            for (const auto& smp : traj.samples) {
                const double v = smp.monitors(i);
                d.drift = std::isnan(v) || std::isnan(v0) ? kNaN : std::max(d.drift, std::abs(v - v0));
                if (std::isnan(d.drift)) break;
            }
        }
        out.push_back(d);
    }
    return out;
}

}  // namespace transposit
