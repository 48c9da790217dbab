#include "cli/commands.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli/report.hpp"
#include "json.hpp"
#include "transposit/dynamics.hpp"
#include "transposit/errors.hpp"
#include "transposit/integrate.hpp"
#include "transposit/models.hpp"
#include "transposit/suites.hpp"

namespace transposit::cli {

namespace {

std::string short_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}


using ojson = nlohmann::ordered_json;

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidArgument, "bad number '" + text + "' for " + what);
}

std::vector<std::pair<std::string, double>> parse_assignments(const std::string& list, const std::string& what) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidArgument, what + " expects name=value, got '" + item + "'");
        const std::string key = trim(item.substr(0, eq));
        out.emplace_back(key, parse_number(trim(item.substr(eq + 1)), key));
    }
    return out;
}

struct Loaded {
    ModelIdentity identity;
    std::optional<BuiltinModel> builtin;
    std::unique_ptr<MechModel> model;
};

Loaded load_model(const Options& opt) {
    if (opt.model.empty()) throw Error(ErrorKind::InvalidArgument, "--model is required");
    Loaded l;
    ModelSpec spec;
    if (is_builtin(opt.model)) {
        l.builtin = get_builtin(opt.model);
        spec = l.builtin->spec;
        l.identity = {spec.name, "builtin", l.builtin->source};
    } else {
        std::ifstream in(opt.model, std::ios::binary);
        if (!in) throw Error(ErrorKind::UnknownModel, "'" + opt.model + "' is neither a builtin nor a readable file");
        std::stringstream buf;
        buf << in.rdbuf();
        spec = parse_model_file(buf.str());
        l.identity = {spec.name, opt.model, buf.str()};
    }
    ParamValues overrides;
    for (const auto& s : opt.sets)
        for (auto& kv : parse_assignments(s, "--set")) overrides.push_back(std::move(kv));
    l.model = std::make_unique<MechModel>(std::move(spec), overrides);
    return l;
}

Vec initial_multipliers(const MechModel& model) {
    Vec lam(model.m());
    for (int a = 0; a < model.m(); ++a) {
        const double fallback = model.m() == 1 ? model.param("lambda0", 0.0) : 0.0;
        lam(a) = model.param("lambda0_" + std::to_string(a + 1), fallback);
    }
    return lam;
}

DynState initial_state(const Loaded& l, const Options& opt) {
    const MechModel& model = *l.model;
    DynState s = l.builtin && l.builtin->reference ? l.builtin->reference(model) : make_state(model);
    if (s.lambda.size() != model.m()) s.lambda = initial_multipliers(model);
    for (const auto& [key, value] : parse_assignments(opt.init, "--init")) {
        if (key == "t") {
            s.t = value;
            continue;
        }
        const int slot = model.slot_of(key);
        if (slot < 0) throw Error(ErrorKind::UnknownIdentifier, "--init: unknown coordinate '" + key + "'");
        if (slot < model.n())
            s.x(slot) = value;
        else
            s.v(slot - model.n()) = value;
    }
    return s;
}

Formulation pick_formulation(const Loaded& l, const std::string& id) {
    if (!id.empty()) return parse_formulation(id);
    if (l.builtin && !l.builtin->recommended.empty()) return l.builtin->recommended.front();
    return Formulation::DAlembert;
}

bool parse_switch(const std::string& v) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw Error(ErrorKind::InvalidArgument, "--project expects on|off, got '" + v + "'");
}

IntegratorConfig make_config(const MechModel& model, const Options& opt) {
    IntegratorConfig cfg = default_config(model);
    if (opt.t_end) cfg.t_end = *opt.t_end;
    if (opt.dt) cfg.dt = *opt.dt;
    cfg.project = parse_switch(opt.project);
    return cfg;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == '\n') c = ' ';
        err << "error: " << msg << '\n';
        return kExitError;
    }
}

double clean(double v) { return v == 0.0 ? 0.0 : v; }

ojson to_json(const Mat& m) {
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(clean(m(i, k)));
        rows.push_back(row);
    }
    return rows;
}

ojson to_json(const Vec& v) {
    ojson out = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(clean(v(i)));
    return out;
}

std::string cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%14.10g", clean(v));
    return buf;
}

void print_matrix(std::ostream& out, const std::string& title, const Mat& m) {
    out << title << " =\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << "  [";
        for (Eigen::Index k = 0; k < m.cols(); ++k) out << cell(m(i, k));
        out << " ]\n";
    }
}

void print_vector(std::ostream& out, const std::string& title, const Vec& v) {
    out << title << " = [";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << cell(v(i));
    out << " ]\n";
}

void print_scalar(std::ostream& out, const std::string& title, double v) {
    out << title << " = " << format_double(clean(v)) << '\n';
}

double max_abs_diff(const Vec& a, const Vec& b) {
    if (a.size() != b.size() || a.size() == 0) return 0.0;
    return (a - b).lpNorm<Eigen::Infinity>();
}

}  // namespace

int cmd_run(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load_model(opt);
        const MechModel& model = *l.model;
        RunInfo info;
        info.identity = l.identity;
        info.formulation = pick_formulation(l, opt.formulation);
        info.config = make_config(model, opt);
        info.init = initial_state(l, opt);
        const std::string base =
            opt.out.empty() ? model.name() + "_" + formulation_id(info.formulation) : opt.out;
        info.csv_path = base + ".csv";

        const Trajectory traj = integrate(model, info.formulation, info.init, info.config);
        write_csv(info.csv_path, model, traj);
        write_json(base + ".json", manifest(model, info, traj));

        out << model.name() << " [" << formulation_id(info.formulation) << "] " << traj.samples.size()
            << " samples -> " << info.csv_path << '\n';
        for (const auto& e : traj.events)
            out << "event t=" << format_double(e.t) << ' ' << to_string(e.kind) << '\n';
        return traj.events.empty() && traj.completed ? kExitOk : kExitEvents;
    });
}

int cmd_compare(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load_model(opt);
        const MechModel& model = *l.model;
        std::vector<Formulation> forms;
        {
            std::stringstream ss(opt.formulation);
            std::string id;
            while (std::getline(ss, id, ','))
                if (!trim(id).empty()) forms.push_back(parse_formulation(trim(id)));
        }
        if (forms.size() < 2)
            throw Error(ErrorKind::InvalidArgument, "compare needs at least two formulations, e.g. --formulation a,b");
        const IntegratorConfig cfg = make_config(model, opt);
        const DynState init = initial_state(l, opt);

        const int count = static_cast<int>(forms.size());
        std::vector<Trajectory> runs(forms.size());
        std::vector<std::string> failures(forms.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < count; ++i) {
            try {
                runs[i] = integrate(model, forms[i], init, cfg);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
        for (int i = 0; i < count; ++i)
            if (!failures[i].empty())
                throw Error(ErrorKind::InvalidArgument,
                            std::string(formulation_id(forms[i])) + " failed: " + failures[i]);

        ojson j;
        j["model.name"] = l.identity.name;
        j["model.origin"] = l.identity.origin;
        j["model.sha256"] = sha256_hex(l.identity.text);
        j["code.version"] = code_version();
        j["config.dt"] = cfg.dt;
        j["config.t_end"] = cfg.t_end;
        j["config.project"] = cfg.project;
        for (const auto& [k, v] : model.params()) j["params." + k] = v;
        ojson ids = ojson::array();
        for (auto f : forms) ids.push_back(formulation_id(f));
        j["formulations"] = ids;
        bool events = false;
        for (int i = 0; i < count; ++i) {
            const std::string key = std::string("runs.") + formulation_id(forms[i]) + ".";
            j[key + "samples"] = runs[i].samples.size();
            j[key + "completed"] = runs[i].completed;
            j[key + "events"] = runs[i].events.size();
            events = events || !runs[i].events.empty() || !runs[i].completed;
        }

        constexpr double kDivergedGap = 1e-6;
        constexpr std::size_t kSeriesPoints = 200;
        bool diverged = false;
        for (int a = 0; a < count; ++a) {
            for (int b = a + 1; b < count; ++b) {
                const auto& ra = runs[a].samples;
                const auto& rb = runs[b].samples;
                const std::size_t len = std::min(ra.size(), rb.size());
                const bool multipliers_comparable = forms[a] != Formulation::Vakonomic &&
                                                    forms[b] != Formulation::Vakonomic && model.m() > 0;
                double max_pos = 0, max_vel = 0, max_mult = 0, t_at = 0;
                const std::size_t stride = std::max<std::size_t>(1, len / kSeriesPoints);
                ojson st = ojson::array(), sp = ojson::array(), sv = ojson::array();
                for (std::size_t k = 0; k < len; ++k) {
                    const double dp = max_abs_diff(ra[k].x, rb[k].x);
                    const double dv = max_abs_diff(ra[k].v, rb[k].v);
                    if (dp > max_pos) {
                        max_pos = dp;
                        t_at = ra[k].t;
                    }
                    max_vel = std::max(max_vel, dv);
                    if (multipliers_comparable) max_mult = std::max(max_mult, max_abs_diff(ra[k].mult, rb[k].mult));
                    if (k % stride == 0 || k + 1 == len) {
                        st.push_back(ra[k].t);
                        sp.push_back(dp);
                        sv.push_back(dv);
                    }
                }
                const std::string key =
                    std::string("pairs.") + formulation_id(forms[a]) + "~" + formulation_id(forms[b]) + ".";
                j[key + "max_position_gap"] = max_pos;
                j[key + "t_max_position_gap"] = t_at;
                j[key + "max_velocity_gap"] = max_vel;
                j[key + "final_position_gap"] = len ? max_abs_diff(ra[len - 1].x, rb[len - 1].x) : 0.0;
                if (multipliers_comparable)
                    j[key + "max_multiplier_gap"] = max_mult;
                else
                    j[key + "max_multiplier_gap"] = nullptr;
                j[key + "series.t"] = st;
                j[key + "series.position_gap"] = sp;
                j[key + "series.velocity_gap"] = sv;
                diverged = diverged || max_pos > kDivergedGap;

                out << std::left << std::setw(28)
                    << (std::string(formulation_id(forms[a])) + " vs " + formulation_id(forms[b]))
                    << " max|dx| " << format_double(max_pos) << "  max|dv| " << format_double(max_vel);
                if (multipliers_comparable) out << "  max|dmult| " << format_double(max_mult);
                out << '\n';
            }
        }
        j["diverged_threshold"] = kDivergedGap;
        j["diverged"] = diverged;
        const std::string path = opt.out.empty() ? "compare_" + model.name() + ".json" : opt.out + ".json";
        write_json(path, j);
        out << "diverged: " << (diverged ? "true" : "false") << " -> " << path << '\n';
        return events ? kExitEvents : kExitOk;
    });
}

int cmd_derive(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load_model(opt);
        const MechModel& model = *l.model;
        if (opt.emit_model) {
            out << emit_model_file(model.bound_spec());
            return kExitOk;
        }
        DynState s = initial_state(l, opt);
        if (parse_switch(opt.project) && model.m() > 0) s = project_velocities(model, s);

        const Formulation f = opt.formulation.empty() ? Formulation::MvmT1 : parse_formulation(opt.formulation);
        SolveOptions so;
        const AccelSolution sol = solve(f, model, s, so);
        const FrameVariant variant = f == Formulation::MvmT2 ? FrameVariant::T2 : FrameVariant::T1;

        std::optional<FrameMatrices> frames = sol.frames;
        std::string frame_note;
        if (!frames) {
            try {
                frames = build_frames(model, s, variant, so.singular_rel_threshold);
            } catch (const Error& e) {
                frame_note = e.what();
            }
        }
        Mat A = sol.A;
        if (A.size() == 0 && frames) {
            try {
                A = solve_A(*frames, sol.accel);
            } catch (const Error& e) {
                frame_note = e.what();
            }
        }
        double detG = sol.detG;
        if (std::isnan(detG)) {
            try {
                detG = determinacy_matrix(model, s, so).detG;
            } catch (const Error&) {
            }
        }
        std::optional<Forces> forces;
        if (f == Formulation::MvmT1) {
            try {
                forces = force_decomposition(model, s, sol);
            } catch (const Error&) {
            }
        }

        if (opt.json) {
            ojson j;
            j["model.name"] = model.name();
            j["formulation"] = formulation_id(f);
            j["frame.variant"] = to_string(variant);
            j["state.t"] = s.t;
            j["state.x"] = to_json(s.x);
            j["state.v"] = to_json(s.v);
            if (frames) {
                j["W"] = to_json(frames->W);
                ojson coeff = ojson::array();
                for (const auto& c : frames->omega_coeff) coeff.push_back(to_json(c));
                j["Omega.coeff"] = coeff;
                j["Omega.rem"] = to_json(frames->omega_rem);
                j["Omega"] = to_json(frames->omega(sol.accel));
                j["detW"] = frames->detW;
            }
            if (A.size()) j["A"] = to_json(A);
            j["detG"] = std::isnan(detG) ? ojson() : ojson(detG);
            if (forces) {
                j["F1"] = to_json(forces->F1);
                j["F2"] = to_json(forces->F2);
            }
            j["system.matrix"] = to_json(sol.system);
            j["system.rhs"] = to_json(sol.rhs);
            j["accel"] = to_json(sol.accel);
            j["rates"] = to_json(sol.mult_rate);
            j["residual"] = sol.residual;
            if (!frame_note.empty()) j["note"] = frame_note;
            out << j.dump(2) << '\n';
            return kExitOk;
        }

        out << "model " << model.name() << "  formulation " << formulation_id(f) << "  frame "
            << to_string(variant) << '\n';
        print_scalar(out, "t", s.t);
        print_vector(out, "x", s.x);
        print_vector(out, "v", s.v);
        if (frames) {
            print_matrix(out, "W", frames->W);
            for (std::size_t jdx = 0; jdx < frames->omega_coeff.size(); ++jdx)
                print_matrix(out, "Omega row " + std::to_string(jdx + 1) + " coeff (m, i) of xdd_i",
                             frames->omega_coeff[jdx]);
            print_matrix(out, "Omega rem", frames->omega_rem);
            print_matrix(out, "Omega(xdd)", frames->omega(sol.accel));
            print_scalar(out, "detW", frames->detW);
        }
        if (A.size()) print_matrix(out, "A", A);
        print_scalar(out, "detG", detG);
        if (forces) {
            print_vector(out, "F1", forces->F1);
            print_vector(out, "F2", forces->F2);
        }
        Mat rows(sol.system.rows(), sol.system.cols() + 1);
        rows << sol.system, sol.rhs;
        print_matrix(out, "system [K | b]", rows);
        print_vector(out, "xdd", sol.accel);
        print_vector(out, "rates", sol.mult_rate);
        print_scalar(out, "residual", sol.residual);
        if (!frame_note.empty()) out << "note: " << frame_note << '\n';
        return kExitOk;
    });
}

int cmd_check(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::vector<std::string> ids;
        if (opt.suite == "all")
            ids = suite_ids();
        else
            ids.push_back(opt.suite);
        SuiteOptions so;
        so.states = opt.states;
        so.seed = opt.seed;
        std::vector<CheckResult> results;
        for (const auto& id : ids) {
            auto r = run_suite(id, so);
            results.insert(results.end(), r.begin(), r.end());
        }
        int failed = 0;
        for (const auto& r : results) failed += r.passed ? 0 : 1;
        if (opt.json) {
            ojson j;
            j["seed"] = opt.seed;
            j["states"] = opt.states;
            for (const auto& r : results) {
                const std::string key = r.suite + "." + r.name + ".";
                j[key + "passed"] = r.passed;
                j[key + "value"] = std::isnan(r.value) ? ojson() : ojson(r.value);
                j[key + "tolerance"] = r.tolerance;
                if (!r.detail.empty()) j[key + "detail"] = r.detail;
            }
            j["failed"] = failed;
            out << j.dump(2) << '\n';
        } else {
            std::size_t w = 4;
            for (const auto& r : results) w = std::max(w, r.suite.size() + r.name.size() + 1);
            for (const auto& r : results) {
                out << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(w))
                    << (r.suite + "/" + r.name) << "  " << std::setw(12) << short_double(r.value) << " tol "
                    << std::setw(8) << short_double(r.tolerance);
                if (!r.detail.empty()) out << "  " << r.detail;
                out << '\n';
            }
            out << results.size() - failed << "/" << results.size() << " checks passed\n";
        }
        return failed ? kExitCheckFailed : kExitOk;
    });
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"transposit: nonholonomic dynamics under several variational formulations"};
    app.set_version_flag("--version", std::string(code_version()));
    app.require_subcommand(1);
    Options opt;

    auto model_opts = [&](CLI::App* sub) {
        sub->add_option("--model", opt.model, "builtin name or model file path")->required();
        sub->add_option("--init", opt.init, "initial state overrides, e.g. \"x=0.1,dx=1\"");
        sub->add_option("--set", opt.sets, "parameter override k=v (repeatable)")->take_all()->allow_extra_args(false);
        sub->add_option("--project", opt.project, "velocity projection on|off");
    };
    auto run_opts = [&](CLI::App* sub) {
        model_opts(sub);
        sub->add_option("--t-end", opt.t_end, "final time");
        sub->add_option("--dt", opt.dt, "step size");
        sub->add_option("--out", opt.out, "output path stem");
    };

    CLI::App* run = app.add_subcommand("run", "integrate one formulation, write <out>.csv and <out>.json");
    run_opts(run);
    run->add_option("--formulation", opt.formulation, "formulation id");

    CLI::App* compare = app.add_subcommand("compare", "integrate several formulations and report their gaps");
    run_opts(compare);
    compare->add_option("--formulation", opt.formulation, "comma-separated formulation ids")->required();

    CLI::App* derive = app.add_subcommand("derive", "print the assembled matrices at a state");
    model_opts(derive);
    derive->add_option("--formulation", opt.formulation, "formulation id (default mvm-t1)");
    derive->add_flag("--emit-model", opt.emit_model, "print the model file and exit");
    derive->add_flag("--json", opt.json, "JSON output");

    CLI::App* check = app.add_subcommand("check", "run the invariant suites");
    check->add_option("--suite", opt.suite, "suite id or all");
    check->add_option("--states", opt.states, "random states per suite");
    check->add_option("--seed", opt.seed, "random seed");
    check->add_flag("--json", opt.json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << code_version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (app.get_subcommands().size() == 1 && e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            out << app.get_subcommands().front()->help();
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitError;
    }

    if (run->parsed()) return cmd_run(opt, out, err);
    if (compare->parsed()) return cmd_compare(opt, out, err);
    if (derive->parsed()) return cmd_derive(opt, out, err);
    return cmd_check(opt, out, err);
}

}  // namespace transposit::cli
