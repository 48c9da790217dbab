#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "transposit/errors.hpp"
#include "transposit/expr.hpp"
#include "transposit/jet.hpp"
#include "transposit/model.hpp"
#include "transposit/models.hpp"

namespace support {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> malformed_expressions() {
    std::vector<std::string> out;
    std::istringstream in(read_file(std::filesystem::path(TRANSPOSIT_CORPUS) / "malformed_expressions.txt"));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        out.push_back(line == "<empty>" ? std::string() : line);
    }
    return out;
}

inline std::vector<std::filesystem::path> malformed_models() {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(TRANSPOSIT_CORPUS) / "malformed_models"))
        out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline transposit::Scope corpus_scope() { return {{"x", "y", "phi"}, {"a", "g"}}; }

inline transposit::MechModel builtin(const std::string& name, const transposit::ParamValues& overrides = {}) {
    return transposit::MechModel(transposit::get_builtin(name).spec, overrides);
}

inline transposit::DynState reference(const std::string& name, const transposit::ParamValues& overrides = {}) {
    auto b = transposit::get_builtin(name);
    transposit::MechModel m(b.spec, overrides);
    return b.reference(m);
}

/// Model with the given coordinates and a single expression of interest as Lagrangian.
inline transposit::MechModel free_model(const std::vector<std::string>& coords, const std::string& lagrangian) {
    std::string text = "model \"probe\"\ncoords";
    for (const auto& c : coords) text += " " + c;
    text += "\nlagrangian " + lagrangian + "\n";
    for (const auto& c : coords) text += "aux d" + c + "\n";
    return transposit::MechModel(transposit::parse_model_file(text));
}

}  // namespace support
