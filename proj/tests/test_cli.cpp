#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/report.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using transposit::cli::main_entry;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "transposit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "transposit_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json load_json(const fs::path& p) { return json::parse(support::read_file(p)); }

std::vector<std::string> lines(const fs::path& p) {
    std::vector<std::string> out;
    std::istringstream in(support::read_file(p));
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("sha256 known answer") {
    CHECK(transposit::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("run: skate cycloid produces one sample per step plus the initial one") {
    fs::path dir = scratch("run_skate");
    Result r = cli({"run", "--model", "skate", "--formulation", "mvm-t1", "--set", "omega=1", "--t-end", "6.2832",
                    "--dt", "1e-3", "--out", (dir / "skate").string()});
    REQUIRE(r.code == 0);
    auto rows = lines(dir / "skate.csv");
    CHECK(rows.size() == 6284 + 1);
    CHECK(rows[0] == "t,x_1,x_2,x_3,v_1,v_2,v_3,mult_1,res_1,detW,detG,energy");
    json m = load_json(dir / "skate.json");
    CHECK(m["summary.samples"] == 6284);
    CHECK(m["model.sha256"] == transposit::cli::sha256_hex(transposit::get_builtin("skate").source));
    CHECK(m["formulation"] == "mvm-t1");
    CHECK(m["params.omega"] == 1.0);
    CHECK(m["events.count"] == 0);
    CHECK(m["output.csv"] == (dir / "skate.csv").string());
}

TEST_CASE("run: unconstrained model has no multiplier or residual columns") {
    fs::path dir = scratch("run_free");
    Result r = cli({"run", "--model", "free_particle", "--t-end", "0.1", "--dt", "0.01", "--out", (dir / "fp").string()});
    REQUIRE(r.code == 0);
    const std::string header = lines(dir / "fp.csv").at(0);
    CHECK(header == "t,x_1,x_2,v_1,v_2,detW,detG,energy");
    CHECK(header.find("res_") == std::string::npos);
}

TEST_CASE("run: vakonomic manifest records lambda0") {
    fs::path dir = scratch("run_vak");
    Result r = cli({"run", "--model", "skate_vakonomic", "--set", "lambda0=1", "--t-end", "0.5", "--out",
                    (dir / "vk").string()});
    REQUIRE(r.code == 0);
    json m = load_json(dir / "vk.json");
    CHECK(m["formulation"] == "vakonomic");
    CHECK(m["params.lambda0"] == 1.0);
    CHECK(m["lambda0.1"] == 1.0);
}

TEST_CASE("run: model files by path, hash over the file bytes") {
    fs::path dir = scratch("run_file");
    const std::string text = transposit::get_builtin("holonomic_circle_a").source + "# trailing comment\n";
    std::ofstream(dir / "circle.model") << text;
    Result r = cli({"run", "--model", (dir / "circle.model").string(), "--formulation", "mvm-t1", "--init",
                    "x=1,y=0,dx=0,dy=2", "--t-end", "1", "--out", (dir / "c").string()});
    REQUIRE(r.code == 0);
    json m = load_json(dir / "c.json");
    CHECK(m["model.sha256"] == transposit::cli::sha256_hex(text));
    CHECK(m["init.dy"] == 2.0);
    CHECK(m["summary.max_residual"].get<double>() < 1e-10);
}

TEST_CASE("run: hard errors exit 1 with one line on stderr") {
    fs::path dir = scratch("run_errors");
    for (auto args : std::vector<std::vector<std::string>>{
             {"run", "--model", "no_such_model"},
             {"run", "--model", "skate", "--init", "dy=1"},
             {"run", "--model", "skate", "--set", "omega=fast"},
             {"run", "--model", "skate", "--project", "maybe"},
             {"run", "--model", "skate", "--formulation", "hamilton"},
             {"run", "--model", "skate", "--dt", "0"},
             {"run", "--model", (dir / "missing.model").string()},
             {"run", "--model", "skate", "--bogus-flag"},
             {"run"}}) {
        Result r = cli(args);
        CAPTURE(args.back());
        CHECK(r.code == 1);
        CHECK(r.err.rfind("error: ", 0) == 0);
        CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    }
}

TEST_CASE("run: singular events exit 2 and are listed in the manifest") {
    fs::path dir = scratch("run_events");
    std::ofstream(dir / "crossing.model")
        << "model \"crossing\"\ncoords x y\nlagrangian 0.5*(dx^2 + dy^2)\naux dx\naux x*dy\n";
    Result r = cli({"run", "--model", (dir / "crossing.model").string(), "--formulation", "mvm-t1", "--init",
                    "x=-0.05,dx=1,dy=1", "--t-end", "0.2", "--dt", "0.01", "--out", (dir / "x").string()});
    CHECK(r.code == 2);
    json m = load_json(dir / "x.json");
    CHECK(m["events.count"].get<int>() >= 1);
    CHECK(m["events.0.kind"] == "SingularFrame");
    CHECK(m["summary.completed"] == false);
    CHECK(fs::exists(dir / "x.csv"));
}

TEST_CASE("compare: skate d'Alembert vs T1 stays together") {
    fs::path dir = scratch("cmp_skate");
    Result r = cli({"compare", "--model", "skate", "--formulation", "dalembert,mvm-t1", "--t-end", "5", "--out",
                    (dir / "cmp").string()});
    REQUIRE(r.code == 0);
    json j = load_json(dir / "cmp.json");
    CHECK(j["pairs.dalembert~mvm-t1.max_position_gap"].get<double>() < 1e-8);
    CHECK(j["diverged"] == false);
}

TEST_CASE("compare: Appell-Hamel T2 multiplier rate equals mu") {
    fs::path dir = scratch("cmp_ah");
    Result r = cli({"compare", "--model", "appell_hamel_t2", "--formulation", "dalembert,mvm-t2", "--init",
                    "dx=10,dy=5,dz=11.180339887498949", "--t-end", "2", "--out", (dir / "cmp").string()});
    REQUIRE(r.code == 0);
    json j = load_json(dir / "cmp.json");
    CHECK(j["pairs.dalembert~mvm-t2.max_multiplier_gap"].get<double>() < 1e-9);
}

TEST_CASE("compare: vakonomic skate departs from d'Alembert") {
    fs::path dir = scratch("cmp_vak");
    Result r = cli({"compare", "--model", "skate_vakonomic", "--set", "lambda0=1", "--formulation",
                    "dalembert,vakonomic", "--t-end", "5", "--out", (dir / "cmp").string()});
    REQUIRE(r.code == 0);
    json j = load_json(dir / "cmp.json");
    CHECK(j["diverged"] == true);
    CHECK(j["pairs.dalembert~vakonomic.final_position_gap"].get<double>() > 0.1);
    CHECK(j["pairs.dalembert~vakonomic.max_multiplier_gap"].is_null());
}

TEST_CASE("compare: needs two formulations") {
    Result r = cli({"compare", "--model", "skate", "--formulation", "dalembert"});
    CHECK(r.code == 1);
}

TEST_CASE("derive: skate A after projection") {
    Result r = cli({"derive", "--model", "skate", "--init", "phi=0,dx=1,dy=0,dphi=2", "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["A"] == json::parse("[[0,2,0],[-2,0,1],[0,0,0]]"));
    CHECK(j["detW"] == 1.0);
    CHECK(j["detG"] == 1.0);
    Result text = cli({"derive", "--model", "skate", "--init", "phi=0,dx=1,dy=0,dphi=2"});
    CHECK(text.out.find("A =") != std::string::npos);
    CHECK(text.out.find("system [K | b]") != std::string::npos);
}

TEST_CASE("derive: projection brings a perturbed state onto the manifold") {
    Result r = cli({"derive", "--model", "skate", "--init", "phi=0,dx=1,dy=0.01,dphi=2", "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(std::abs(j["state.v"][1].get<double>()) < 1e-12);
}

TEST_CASE("derive: free particle prints a zero A") {
    Result r = cli({"derive", "--model", "free_particle", "--json"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["A"] == json::parse("[[0,0],[0,0]]"));
}

TEST_CASE("derive: Gantmacher detW is (x1^2 + x2^2)^2") {
    Result r = cli({"derive", "--model", "gantmacher", "--init", "x1=0.6,x2=0.3", "--json"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["detW"].get<double>() == doctest::Approx(0.45 * 0.45).epsilon(1e-12));
}

TEST_CASE("derive: emitted model files parse back") {
    for (const auto& name : transposit::builtin_names()) {
        Result r = cli({"derive", "--model", name, "--emit-model"});
        REQUIRE(r.code == 0);
        CHECK(transposit::parse_model_file(r.out).coords == transposit::get_builtin(name).spec.coords);
    }
    Result o = cli({"derive", "--model", "skate", "--set", "omega=3", "--emit-model"});
    CHECK(transposit::parse_model_file(o.out).param("omega").value() == 3.0);
}

TEST_CASE("check: frames suite passes, seeds are reproducible") {
    Result f = cli({"check", "--suite", "frames", "--states", "20"});
    CHECK(f.code == 0);
    CHECK(f.out.find("FAIL") == std::string::npos);
    Result a = cli({"check", "--suite", "transposition", "--states", "10", "--seed", "7"});
    Result b = cli({"check", "--suite", "transposition", "--states", "10", "--seed", "7"});
    CHECK(a.out == b.out);
    CHECK(a.code == 0);
    Result bad = cli({"check", "--suite", "nonsense"});
    CHECK(bad.code == 1);
}

TEST_CASE("check: equivalence failures are limited to the recorded drum T1 conflict") {
    Result r = cli({"check", "--suite", "equivalence", "--states", "50", "--seed", "7"});
    CHECK(r.code == 3);
    std::istringstream in(r.out);
    std::string l;
    int failures = 0;
    while (std::getline(in, l)) {
        if (l.rfind("FAIL", 0) != 0) continue;
        ++failures;
        CHECK(l.find("rolling_drum") != std::string::npos);
        CHECK(l.find("mvm-t1") != std::string::npos);
    }
    CHECK(failures == 2);
}

TEST_CASE("help and version exit 0") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"run", "--help"}).code == 0);
    CHECK(cli({"--version"}).code == 0);
}

TEST_CASE("binary exit codes") {
    fs::path dir = scratch("binary");
    const std::string bin = TRANSPOSIT_BIN;
    const std::string quiet = " >/dev/null 2>&1";
    CHECK(shell(bin + " run --model free_particle --t-end 0.1 --out " + (dir / "a").string() + quiet) == 0);
    CHECK(shell(bin + " run --model nothing" + quiet) == 1);
    CHECK(shell(bin + " check --suite equivalence --states 5" + quiet) == 3);
    std::ofstream(dir / "crossing.model")
        << "model \"crossing\"\ncoords x y\nlagrangian 0.5*(dx^2 + dy^2)\naux dx\naux x*dy\n";
    CHECK(shell(bin + " run --model " + (dir / "crossing.model").string() +
                " --formulation mvm-t1 --init x=-0.05,dx=1,dy=1 --t-end 0.2 --dt 0.01 --out " + (dir / "b").string() +
                quiet) == 2);
}

}  // TEST_SUITE
