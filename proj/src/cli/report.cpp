#include "cli/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "transposit/errors.hpp"

namespace transposit::cli {

const char* code_version() { return TRANSPOSIT_VERSION; }

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> csv_header(const MechModel& model, const Trajectory& traj) {
    std::vector<std::string> h{"t"};
    for (int i = 1; i <= model.n(); ++i) h.push_back("x_" + std::to_string(i));
    for (int i = 1; i <= model.n(); ++i) h.push_back("v_" + std::to_string(i));
    for (int a = 1; a <= model.m(); ++a) h.push_back("mult_" + std::to_string(a));
    for (int a = 1; a <= model.m(); ++a) h.push_back("res_" + std::to_string(a));
    h.push_back("detW");
    h.push_back("detG");
    for (const auto& name : traj.monitor_names) h.push_back(name);
    return h;
}

void write_csv(const std::string& path, const MechModel& model, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    const auto header = csv_header(model, traj);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& s : traj.samples) {
        out << format_double(s.t);
        auto put = [&](const Vec& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << format_double(v(i));
        };
        put(s.x);
        put(s.v);
        put(s.mult);
        put(s.residuals);
        out << ',' << format_double(s.detW) << ',' << format_double(s.detG);
        put(s.monitors);
        out << '\n';
    }
}

nlohmann::ordered_json manifest(const MechModel& model, const RunInfo& info, const Trajectory& traj) {
    nlohmann::ordered_json j;
    j["model.name"] = info.identity.name;
    j["model.origin"] = info.identity.origin;
    j["model.sha256"] = sha256_hex(info.identity.text);
    j["formulation"] = formulation_id(info.formulation);
    j["code.version"] = code_version();
    j["config.method"] = "RK4";
    j["config.dt"] = info.config.dt;
    j["config.t_end"] = info.config.t_end;
    j["config.project"] = info.config.project;
    j["config.projection_tol"] = info.config.projection_tol;
    j["config.admission_tol"] = info.config.solve.admission_tol;
    j["config.singular_rel_threshold"] = info.config.solve.singular_rel_threshold;
    for (const auto& [k, v] : model.params()) j["params." + k] = v;
    j["init.t"] = info.init.t;
    for (int i = 0; i < model.n(); ++i) {
        j["init." + model.spec().coords[i]] = info.init.x(i);
        j["init.d" + model.spec().coords[i]] = info.init.v(i);
    }
    if (info.formulation == Formulation::Vakonomic)
        for (Eigen::Index a = 0; a < info.init.lambda.size(); ++a)
            j["lambda0." + std::to_string(a + 1)] = info.init.lambda(a);
    j["output.csv"] = info.csv_path;
    j["events.count"] = traj.events.size();
    for (std::size_t i = 0; i < traj.events.size(); ++i) {
        const std::string key = "events." + std::to_string(i) + ".";
        j[key + "t"] = traj.events[i].t;
        j[key + "kind"] = to_string(traj.events[i].kind);
        j[key + "message"] = traj.events[i].message;
    }
    double max_res = 0.0, min_det = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples) {
        if (s.residuals.size()) max_res = std::max(max_res, s.residuals.lpNorm<Eigen::Infinity>());
        if (!std::isnan(s.detW)) min_det = std::min(min_det, std::abs(s.detW));
    }
    j["summary.samples"] = traj.samples.size();
    j["summary.completed"] = traj.completed;
    j["summary.t_final"] = traj.samples.empty() ? 0.0 : traj.samples.back().t;
    j["summary.max_residual"] = max_res;
    j["summary.min_abs_detW"] = std::isinf(min_det) ? nlohmann::ordered_json() : nlohmann::ordered_json(min_det);
    for (const auto& d : monitor_first_integrals(traj)) j["summary.drift." + d.name] = d.drift;
    return j;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace transposit::cli
