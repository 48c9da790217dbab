#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "transposit/integrate.hpp"
#include "transposit/model.hpp"

namespace transposit::cli {

std::string sha256_hex(std::string_view bytes);

/// %.17g; "nan"/"inf" spelled out.
std::string format_double(double v);

std::vector<std::string> csv_header(const MechModel& model, const Trajectory& traj);
void write_csv(const std::string& path, const MechModel& model, const Trajectory& traj);

struct ModelIdentity {
    std::string name;
    std::string origin;  ///< "builtin" or the file path
    std::string text;    ///< bytes the hash is taken over
};

struct RunInfo {
    ModelIdentity identity;
    Formulation formulation = Formulation::DAlembert;
    IntegratorConfig config;
    DynState init;
    std::string csv_path;
};

/// Flat-key manifest for one trajectory.
nlohmann::ordered_json manifest(const MechModel& model, const RunInfo& info, const Trajectory& traj);

void write_json(const std::string& path, const nlohmann::ordered_json& j);

const char* code_version();

}  // namespace transposit::cli
