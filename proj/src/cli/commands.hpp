#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace transposit::cli {

struct Options {
    std::string model;
    std::string formulation;
    std::optional<double> t_end;
    std::optional<double> dt;
    std::string init;
    std::vector<std::string> sets;
    std::string project = "on";
    std::string out;
    std::uint64_t seed = 7;
    int states = 50;
    std::string suite = "all";
    bool emit_model = false;
    bool json = false;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitEvents = 2;
inline constexpr int kExitCheckFailed = 3;

int cmd_run(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_derive(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_check(const Options& opt, std::ostream& out, std::ostream& err);

/// Full command line, CLI11 parsing included.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace transposit::cli
