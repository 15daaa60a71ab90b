#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracle/frozen_eigenvalues.hpp"
#include "ptspectra/io.hpp"

using namespace ptspectra;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "ptspectra_test_cli";

fs::path scratch(const std::string& name) {
    const fs::path p = kRoot / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

/// Runs the CLI through the shell and returns its exit status.
int run(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + " '" PTSPECTRA_CLI "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json without_timings(json j) {
    j.erase("timings");
    return j;
}

}  // namespace

TEST_CASE("spectrum with the default config finds the low cubic eigenvalues") {
    const fs::path out = scratch("default");
    REQUIRE(run("spectrum -o " + out.string()) == 0);
    const EigenvalueFile f = load_eigenvalues(out / "eigenvalues.json");
    REQUIRE(f.records.size() >= 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(f.records[k].lambda - oracle::kCubicEigenvalues[k]) < 1e-8);
        CHECK(std::abs(f.records[k].lambda.imag()) < 1e-8);
        CHECK(f.records[k].sector_margin > 0.0);
    }
    const RunReport r = load_report(out / "report.json");
    CHECK(r.exit_code() == 0);
    CHECK(config_from_json(r.config).solver.box.re_hi == 12.0);
}

TEST_CASE("an unpruned box straddling arg lambda = pi/4 holds no eigenvalues") {
    const fs::path out = scratch("straddle");
    REQUIRE(run("spectrum --no-sector-prune --box 5 15 3 12 -o " + out.string()) == 0);
    const EigenvalueFile f = load_eigenvalues(out / "eigenvalues.json");
    CHECK(f.records.empty());
    const RunReport r = load_report(out / "report.json");
    CHECK_FALSE(config_from_json(r.config).solver.sector_prune);
}

TEST_CASE("a malformed config exits nonzero and writes nothing") {
    const fs::path out = scratch("malformed");
    const fs::path cfg = kRoot / "malformed.json";
    std::ofstream(cfg) << "{\n  \"solver\": {\"tol\": 1e-12,\n";
    CHECK(run("spectrum -c " + cfg.string() + " -o " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out));
    std::ofstream(cfg, std::ios::trunc) << R"({"grid": {"nx": 4}})";
    CHECK(run("verify -c " + cfg.string() + " -o " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out));
    CHECK(run("spectrum --no-such-flag -o " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("stokes lists the five critical angles of the cubic") {
    const fs::path out = scratch("stokes");
    REQUIRE(run("stokes -o " + out.string()) == 0);
    CHECK(slurp(out / "stokes_angles.csv") ==
          "index,theta,theta_over_pi\n"
          "0,0.3141592653589793,0.1\n"
          "1,1.5707963267948966,0.5\n"
          "2,2.827433388230814,0.9\n"
          "3,4.084070449666731,1.3\n"
          "4,5.340707511102648,1.7\n");
}

TEST_CASE("verify follows the exit-code contract") {
    const fs::path out = scratch("verify");
    CHECK(run("verify -o " + out.string()) == 1);
    REQUIRE(run("spectrum -o " + out.string()) == 0);
    CHECK(run("verify -o " + out.string()) == 0);
    const RunReport r = load_report(out / "report.json");
    CHECK(r.violations() == 0);
    CHECK(r.checks.size() > 20);

    // An unattainable tolerance turns the Green check into violations.
    const fs::path cfg = kRoot / "strict.json";
    std::ofstream(cfg) << R"({"verification": {"suites": ["green"], "green_tol": 1e-30}})";
    CHECK(run("verify -c " + cfg.string() + " -o " + out.string()) == 2);
    CHECK(load_report(out / "report.json").violations() > 0);

    // Eigenvalues of another potential are refused.
    CHECK(run("verify --n 2 -o " + out.string()) == 1);
}

TEST_CASE("zeros writes one field row per sample") {
    const fs::path out = scratch("zeros");
    REQUIRE(run("spectrum -o " + out.string()) == 0);
    REQUIRE(run("zeros --rect -3 3 -3 3 --nx 61 --ny 41 -o " + out.string()) == 0);
    const std::string field = slurp(out / "field.csv");
    CHECK(std::count(field.begin(), field.end(), '\n') == 61 * 41 + 1);
    const std::string zeros = slurp(out / "zeros.csv");
    CHECK(zeros.find("u,") != std::string::npos);
}

TEST_CASE("ortho prints polynomials and tests them with eigenvalues") {
    const fs::path out = scratch("ortho");
    REQUIRE(run("ortho --rules \"iii(base)\" \"iv(ii(0))\" -o " + out.string()) == 0);
    const json rep = read_json_file(out / "report.json");
    CHECK(rep.at("results").at("polynomials").size() == 2);
    REQUIRE(run("spectrum -o " + out.string()) == 0);
    CHECK(run("ortho --rules \"iii(base)\" --y-values -1 0.5 -o " + out.string()) == 0);
    CHECK(run("ortho --rules \"v(base)\" -o " + out.string()) == 1);
}

TEST_CASE("flags override the config file") {
    const fs::path out = scratch("override");
    const fs::path cfg = kRoot / "override.json";
    std::ofstream(cfg) << R"({"potential": {"n": 3}, "solver": {"box": [1, 3, -1, 1]}})";
    REQUIRE(run("spectrum -c " + cfg.string() + " --n 1 -o " + out.string()) == 0);
    const EigenvalueFile f = load_eigenvalues(out / "eigenvalues.json");
    CHECK(f.potential.n == 1);
    REQUIRE(f.records.size() == 1);
    CHECK(std::abs(f.records[0].lambda - oracle::kCubicEigenvalues[0]) < 1e-8);
}

TEST_CASE("output does not depend on the worker count") {
    const fs::path a = scratch("threads1"), b = scratch("threads3");
    REQUIRE(run("spectrum --box 0.5 20 -1 1 -o " + a.string(), "PT_SPECTRA_THREADS=1") == 0);
    REQUIRE(run("spectrum --box 0.5 20 -1 1 -o " + b.string(), "PT_SPECTRA_THREADS=3") == 0);
    CHECK(slurp(a / "eigenvalues.json") == slurp(b / "eigenvalues.json"));
    json ra = without_timings(read_json_file(a / "report.json"));
    json rb = without_timings(read_json_file(b / "report.json"));
    ra["config"]["output"].erase("directory");
    rb["config"]["output"].erase("directory");
    ra.erase("artifacts");
    rb.erase("artifacts");
    CHECK(ra == rb);

    REQUIRE(run("verify --suites green census -o " + a.string(), "PT_SPECTRA_THREADS=1") == 0);
    REQUIRE(run("verify --suites green census -o " + b.string(), "PT_SPECTRA_THREADS=3") == 0);
    ra = without_timings(read_json_file(a / "report.json"));
    rb = without_timings(read_json_file(b / "report.json"));
    for (json* j : {&ra, &rb}) {
        (*j)["config"]["output"].erase("directory");
        j->erase("artifacts");
    }
    CHECK(ra == rb);
}
