#include "transposit/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "transposit/errors.hpp"
#include "transposit/linalg.hpp"

namespace transposit {

const char* formulation_id(Formulation f) {
    switch (f) {
        case Formulation::DAlembert: return "dalembert";
        case Formulation::Vakonomic: return "vakonomic";
        case Formulation::MvmT1: return "mvm-t1";
        case Formulation::MvmT2: return "mvm-t2";
        case Formulation::VoronetsReduced: return "voronets";
        case Formulation::ChaplyginReduced: return "chaplygin";
    }
    return "?";
}

const std::vector<Formulation>& all_formulations() {
    static const std::vector<Formulation> all{Formulation::DAlembert,       Formulation::Vakonomic,
                                              Formulation::MvmT1,           Formulation::MvmT2,
                                              Formulation::VoronetsReduced, Formulation::ChaplyginReduced};
    return all;
}

Formulation parse_formulation(std::string_view id) {
    for (Formulation f : all_formulations())
        if (id == formulation_id(f)) return f;
    throw Error(ErrorKind::InvalidArgument, "unknown formulation '" + std::string(id) + "'");
}

namespace {

void admit(const StateSplits& sp, const SolveOptions& opt) {
    if (!opt.require_on_manifold) return;
    const double r = sp.max_constraint_residual();
    if (r > opt.admission_tol)
        throw Error(ErrorKind::OffManifold, "max |L_a| = " + std::to_string(r));
}

// Rows 0..N-1 hold the dynamics; rows N..N+M-1 the constraint accelerations.
void fill_constraint_rows(const StateSplits& sp, const Vec& v, Mat& K, Vec& b, int row0) {
    const Mat J = sp.constraint_jacobian();
    K.block(row0, 0, J.rows(), J.cols()) = J;
    b.segment(row0, J.rows()) = -sp.constraint_bias(v);
}

void finish(AccelSolution& sol, Mat K, Vec b, int n, int rates, const SolveOptions& opt) {
    DenseSolve ds = solve_dense(K, b, opt.min_rcond);
    sol.accel = ds.x.head(n);
    sol.mult_rate = ds.x.segment(n, rates);
    sol.residual = ds.residual;
    sol.rcond = ds.rcond;
    sol.system = std::move(K);
    sol.rhs = std::move(b);
}

AccelSolution mvm(const MechModel& model, const DynState& s, FrameVariant variant, const SolveOptions& opt) {
    const int n = model.n(), m = model.m();
    StateSplits sp = compute_splits(model, s);
    admit(sp, opt);
    FrameMatrices fr = build_frames(sp, variant, opt.singular_rel_threshold);
    const Vec& p = sp.l0.dv;
    const Vec xi = solve_frame_transpose(fr, p);

    Mat K = Mat::Zero(n + m, n + m);
    Vec b = Vec::Zero(n + m);
    Mat H = sp.l0.coeff;
    Vec r = -sp.l0.remainder;
    for (int j = 0; j < n; ++j) {
        H -= xi(j) * fr.omega_coeff[j];
        r += xi(j) * fr.omega_rem.row(j).transpose();
    }
    K.topLeftCorner(n, n) = H;
    K.topRightCorner(n, m) = -sp.constraint_jacobian().transpose();
    b.head(n) = r;
    fill_constraint_rows(sp, s.v, K, b, n);

    AccelSolution sol;
    sol.formulation = variant == FrameVariant::T1 ? Formulation::MvmT1 : Formulation::MvmT2;
    finish(sol, K, b, n, m, opt);
    sol.A = solve_A(fr, sol.accel);
    sol.F1 = sol.A.transpose() * p;
    sol.F2 = sp.constraint_jacobian().transpose() * sol.mult_rate;
    if (variant == FrameVariant::T1) sol.detG = n > 0 ? H.determinant() : 1.0;
    sol.frames = std::move(fr);
    return sol;
}

}  // namespace

AccelSolution accel_dalembert(const MechModel& model, const DynState& s, const SolveOptions& opt) {
    const int n = model.n(), m = model.m();
    StateSplits sp = compute_splits(model, s, false);
    admit(sp, opt);
    Mat K = Mat::Zero(n + m, n + m);
    Vec b = Vec::Zero(n + m);
    K.topLeftCorner(n, n) = sp.l0.coeff;
    K.topRightCorner(n, m) = -sp.constraint_jacobian().transpose();
    b.head(n) = -sp.l0.remainder;
    fill_constraint_rows(sp, s.v, K, b, n);
    AccelSolution sol;
    sol.formulation = Formulation::DAlembert;
    finish(sol, K, b, n, m, opt);
    return sol;
}

AccelSolution accel_mvm_t1(const MechModel& model, const DynState& s, const SolveOptions& opt) {
    return mvm(model, s, FrameVariant::T1, opt);
}

AccelSolution accel_mvm_t2(const MechModel& model, const DynState& s, const SolveOptions& opt) {
    return mvm(model, s, FrameVariant::T2, opt);
}

AccelSolution rhs_vakonomic(const MechModel& model, const DynState& s, const SolveOptions& opt) {
    const int n = model.n(), m = model.m();
    StateSplits sp = compute_splits(model, s, false);
    admit(sp, opt);
    const Vec lambda = s.lambda.size() == m ? s.lambda : Vec::Zero(m);
    Mat H = sp.l0.coeff;
    Vec r = -sp.l0.remainder;
    for (int a = 0; a < m; ++a) {
        H -= lambda(a) * sp.constraints[a].coeff;
        r += lambda(a) * sp.constraints[a].remainder;
    }
    Mat K = Mat::Zero(n + m, n + m);
    Vec b = Vec::Zero(n + m);
    K.topLeftCorner(n, n) = H;
    K.topRightCorner(n, m) = -sp.constraint_jacobian().transpose();
    b.head(n) = r;
    fill_constraint_rows(sp, s.v, K, b, n);
    AccelSolution sol;
    sol.formulation = Formulation::Vakonomic;
    finish(sol, K, b, n, m, opt);
    return sol;
}

// ---------------------------------------------------------------- reduced forms

namespace {

// Top-level additive terms with their signs: a - (b + c) gives +a, -b, -c.
void additive_terms(const Expr& e, bool positive, std::vector<std::pair<Expr, bool>>& out) {
    if (e->kind == NodeKind::Binary && (e->op == '+' || e->op == '-')) {
        additive_terms(e->children[0], positive, out);
        additive_terms(e->children[1], e->op == '+' ? positive : !positive, out);
    } else if (e->kind == NodeKind::Unary) {
        additive_terms(e->children[0], !positive, out);
    } else {
        out.emplace_back(e, positive);
    }
}

}  // namespace

ReducedForm reduced_form(const MechModel& model, bool chaplygin) {
    const ModelSpec& spec = model.spec();
    const int n = model.n(), m = model.m();
    const ErrorKind kind = chaplygin ? ErrorKind::NotChaplyginForm : ErrorKind::NotVoronetsForm;
    ReducedForm form;
    for (int a = 0; a < m; ++a) {
        int chosen = -1;
        for (int c = 0; c < n && chosen < 0; ++c) {
            const std::string dc = "d" + spec.coords[c];
            if (std::find(form.dependent.begin(), form.dependent.end(), c) != form.dependent.end()) continue;
            std::vector<std::pair<Expr, bool>> terms;
            additive_terms(spec.constraints[a], true, terms);
            int unit = 0, other = 0;
            for (const auto& [term, positive] : terms) {
                if (term->kind == NodeKind::Variable && term->name == dc && positive) ++unit;
                else if (mentions(*term, dc)) ++other;
            }
            if (unit != 1 || other != 0) continue;
            bool exclusive = true;
            for (int b = 0; b < m; ++b)
                if (b != a && mentions(*spec.constraints[b], dc)) exclusive = false;
            if (exclusive) chosen = c;
        }
        if (chosen < 0) throw Error(kind, "constraint " + std::to_string(a + 1) + " has no dependent velocity");
        form.dependent.push_back(chosen);
    }
    for (int c = 0; c < n; ++c)
        if (std::find(form.dependent.begin(), form.dependent.end(), c) == form.dependent.end())
            form.independent.push_back(c);

    std::vector<std::pair<std::string, Expr>> zero_dep;
    for (int c : form.dependent) zero_dep.emplace_back("d" + spec.coords[c], make_constant(0.0));
    for (int a = 0; a < m; ++a) form.phi.push_back(make_unary('-', substitute(spec.constraints[a], zero_dep)));

    if (chaplygin) {
        for (int c : form.dependent) {
            const std::string& xc = spec.coords[c];
            if (mentions(*spec.lagrangian, xc))
                throw Error(kind, "lagrangian depends on dependent coordinate '" + xc + "'");
            for (const auto& phi : form.phi)
                if (mentions(*phi, xc)) throw Error(kind, "constraint depends on dependent coordinate '" + xc + "'");
        }
        std::vector<std::pair<std::string, Expr>> repl;
        for (int a = 0; a < m; ++a) repl.emplace_back("d" + spec.coords[form.dependent[a]], form.phi[a]);
        form.reduced_lagrangian = substitute(spec.lagrangian, repl);
        form.reduced_compiled = CompiledExpr(form.reduced_lagrangian, spec.coords, model.params());
    }
    for (const auto& phi : form.phi) form.phi_compiled.emplace_back(phi, spec.coords, model.params());
    return form;
}

namespace {

// Confirms ∂L_α/∂v_{s_β} = δ_αβ with constant coefficient at this state.
void check_unit_structure(const StateSplits& sp, const ReducedForm& form, ErrorKind kind) {
    const int n = static_cast<int>(sp.l0.dv.size());
    for (std::size_t a = 0; a < sp.constraints.size(); ++a) {
        const LagrangianSplit& c = sp.constraints[a];
        for (std::size_t b = 0; b < form.dependent.size(); ++b) {
            const int s = form.dependent[b];
            const double want = a == b ? 1.0 : 0.0;
            if (std::abs(c.dv(s) - want) > 1e-12)
                throw Error(kind, "constraint " + std::to_string(a + 1) + " is not solved for its dependent velocity");
            for (int k = 0; k < n; ++k)
                if (c.coeff(s, k) != 0.0)
                    throw Error(kind, "dependent velocity enters constraint " + std::to_string(a + 1) + " nonlinearly");
        }
    }
}

// λ̇_α = E_{s_α}L0 − Σ_β p_β E_{s_α}L_β
Vec reduced_rates(const StateSplits& sp, const ReducedForm& form, const Vec& accel) {
    const int m = static_cast<int>(form.dependent.size());
    const Vec e0 = sp.l0.apply(accel);
    Vec rates(m);
    for (int a = 0; a < m; ++a) {
        const int s = form.dependent[a];
        double v = e0(s);
        for (int b = 0; b < m; ++b) v -= sp.l0.dv(form.dependent[b]) * sp.constraints[b].apply(accel)(s);
        rates(a) = v;
    }
    return rates;
}

}  // namespace

AccelSolution accel_voronets_reduced(const MechModel& model, const ReducedForm& form, const DynState& s,
                                     const SolveOptions& opt) {
    const int n = model.n(), m = model.m();
    StateSplits sp = compute_splits(model, s, false);
    admit(sp, opt);
    check_unit_structure(sp, form, ErrorKind::NotVoronetsForm);

    // Row ν of the multiplier-free combination E_ν L0 − Σ_α p_α E_ν L_α.
    auto row_coeff = [&](int nu) {
        Vec c = sp.l0.coeff.row(nu).transpose();
        double r = sp.l0.remainder(nu);
        for (int a = 0; a < m; ++a) {
            const double pa = sp.l0.dv(form.dependent[a]);
            c -= pa * sp.constraints[a].coeff.row(nu).transpose();
            r -= pa * sp.constraints[a].remainder(nu);
        }
        return std::pair<Vec, double>(c, r);
    };

    Mat K = Mat::Zero(n, n);
    Vec b = Vec::Zero(n);
    for (std::size_t i = 0; i < form.independent.size(); ++i) {
        const int k = form.independent[i];
        auto [c, r] = row_coeff(k);
        for (int a = 0; a < m; ++a) {
            auto [ca, ra] = row_coeff(form.dependent[a]);
            const double w = sp.constraints[a].dv(k);
            c -= w * ca;
            r -= w * ra;
        }
        K.row(i) = c.transpose();
        b(i) = -r;
    }
    fill_constraint_rows(sp, s.v, K, b, static_cast<int>(form.independent.size()));

    AccelSolution sol;
    sol.formulation = Formulation::VoronetsReduced;
    finish(sol, K, b, n, 0, opt);
    sol.mult_rate = reduced_rates(sp, form, sol.accel);
    return sol;
}

AccelSolution accel_chaplygin_reduced(const MechModel& model, const ReducedForm& form, const DynState& s,
                                      const SolveOptions& opt) {
    const int n = model.n(), m = model.m();
    StateSplits sp = compute_splits(model, s, false);
    admit(sp, opt);
    check_unit_structure(sp, form, ErrorKind::NotChaplyginForm);

    const LagrangianSplit star = lagrangian_split(form.reduced_compiled, s);
    std::vector<LagrangianSplit> phi;
    for (const auto& f : form.phi_compiled) phi.push_back(lagrangian_split(f, s));

    // E_k L* − Σ_α Ψ_α E_k Φ_α = 0 for independent k.
    Mat K = Mat::Zero(n, n);
    Vec b = Vec::Zero(n);
    for (std::size_t i = 0; i < form.independent.size(); ++i) {
        const int k = form.independent[i];
        Vec c = star.coeff.row(k).transpose();
        double r = star.remainder(k);
        for (int a = 0; a < m; ++a) {
            const double psi = sp.l0.dv(form.dependent[a]);
            c -= psi * phi[a].coeff.row(k).transpose();
            r -= psi * phi[a].remainder(k);
        }
        K.row(i) = c.transpose();
        b(i) = -r;
    }
    fill_constraint_rows(sp, s.v, K, b, static_cast<int>(form.independent.size()));

    AccelSolution sol;
    sol.formulation = Formulation::ChaplyginReduced;
    finish(sol, K, b, n, 0, opt);
    sol.mult_rate = reduced_rates(sp, form, sol.accel);
    return sol;
}

AccelSolution accel_voronets_reduced(const MechModel& model, const DynState& s, const SolveOptions& opt) {
    return accel_voronets_reduced(model, reduced_form(model, false), s, opt);
}

AccelSolution accel_chaplygin_reduced(const MechModel& model, const DynState& s, const SolveOptions& opt) {
    return accel_chaplygin_reduced(model, reduced_form(model, true), s, opt);
}

AccelSolution solve(Formulation f, const MechModel& model, const DynState& s, const SolveOptions& opt) {
    switch (f) {
        case Formulation::DAlembert: return accel_dalembert(model, s, opt);
        case Formulation::Vakonomic: return rhs_vakonomic(model, s, opt);
        case Formulation::MvmT1: return accel_mvm_t1(model, s, opt);
        case Formulation::MvmT2: return accel_mvm_t2(model, s, opt);
        case Formulation::VoronetsReduced: return accel_voronets_reduced(model, s, opt);
        case Formulation::ChaplyginReduced: return accel_chaplygin_reduced(model, s, opt);
    }
    throw Error(ErrorKind::InvalidArgument, "formulation");
}

AccelFn make_accel_fn(Formulation f, const MechModel& model, const SolveOptions& opt) {
    if (f == Formulation::VoronetsReduced || f == Formulation::ChaplyginReduced) {
        const bool chap = f == Formulation::ChaplyginReduced;
        ReducedForm form = reduced_form(model, chap);
        return [&model, form = std::move(form), opt, chap](const DynState& s) {
            return chap ? accel_chaplygin_reduced(model, form, s, opt) : accel_voronets_reduced(model, form, s, opt);
        };
    }
    return [&model, f, opt](const DynState& s) { return solve(f, model, s, opt); };
}

Forces force_decomposition(const MechModel& model, const DynState& s, const AccelSolution& sol) {
    if (sol.formulation != Formulation::MvmT1 || !sol.frames)
        throw Error(ErrorKind::InvalidArgument, "force decomposition needs an mvm-t1 solution");
    StateSplits sp = compute_splits(model, s, false);
    Forces f;
    f.F1 = solve_A(*sol.frames, sol.accel).transpose() * sp.l0.dv;
    f.F2 = sp.constraint_jacobian().transpose() * sol.mult_rate;
    return f;
}

Determinacy determinacy_matrix(const MechModel& model, const DynState& s, const SolveOptions& opt) {
    const int n = model.n();
    StateSplits sp = compute_splits(model, s);
    FrameMatrices fr = build_frames(sp, FrameVariant::T1, opt.singular_rel_threshold);
    const Vec xi = solve_frame_transpose(fr, sp.l0.dv);
    Determinacy d;
    d.G = sp.l0.coeff;
    for (int j = 0; j < n; ++j) d.G -= xi(j) * fr.omega_coeff[j].transpose();
    d.detG = n > 0 ? d.G.determinant() : 1.0;
    return d;
}

}  // namespace transposit
