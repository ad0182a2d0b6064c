#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "krf/pipeline.hpp"

using namespace krf;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> read_summary(const fs::path& dir) {
    std::ifstream in(dir / "summary.txt");
    REQUIRE(in.good());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find(" = ");
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config(const std::string& out) {
    RunConfig c;
    c.solver.m = 512;
    c.solver.t_end = 2e-4;
    c.solver.snapshot_times = {1e-4, 2e-4};
    c.out_dir = out;
    return c;
}

}  // namespace

TEST_CASE("certify subcommand reports the knopf contrast") {
    auto dir = fs::temp_directory_path() / "krf_test_certify";
    fs::remove_all(dir);
    RunConfig cfg = small_config(dir.string());
    cfg.mode = ProfileMode::KnopfConstant;
    CHECK(run_certify(cfg) == kExitOk);  // certify reports, never fails
    auto kv = read_summary(dir);
    CHECK(kv.at("certificate.extends_at_zero") == "true");
    CHECK(kv.at("certificate.extends_at_infinity") == "false");
    CHECK(kv.at("certificate.psi_r_nonnegative") == "true");
    CHECK(kv.at("certificate.all_conditions") == "false");
}

TEST_CASE("expand subcommand writes both fits") {
    auto dir = fs::temp_directory_path() / "krf_test_expand";
    fs::remove_all(dir);
    CHECK(run_expand(small_config(dir.string())) == kExitOk);
    auto kv = read_summary(dir);
    CHECK(kv.at("extends_at_zero") == "true");
    CHECK(kv.at("extends_at_infinity") == "true");
    CHECK(std::stod(kv.at("expansion.zero.c0")) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("evolve subcommand emits finite, deterministic CSV snapshots") {
    auto dir1 = fs::temp_directory_path() / "krf_test_evolve1";
    auto dir2 = fs::temp_directory_path() / "krf_test_evolve2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    CHECK(run_evolve(small_config(dir1.string())) == kExitOk);
    CHECK(run_evolve(small_config(dir2.string())) == kExitOk);

    int csvs = 0;
    for (const auto& entry : fs::directory_iterator(dir1)) {
        if (entry.path().extension() != ".csv") continue;
        ++csvs;
        std::ifstream in(entry.path());
        std::string header;
        std::getline(in, header);
        CHECK(header == "r,phi,phi_r,psi,psi_r,lambda1,lambda2");
        std::string line;
        int rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) CHECK(std::isfinite(std::stod(cell)));
        }
        CHECK(rows == 512);
        // identical config => byte-identical table
        CHECK(slurp(entry.path()) == slurp(dir2 / entry.path().filename()));
    }
    CHECK(csvs == 3);  // t = 0, 1e-4, 2e-4
}

TEST_CASE("verify-sign subcommand reports loci and rate statistics") {
    auto dir = fs::temp_directory_path() / "krf_test_verify";
    fs::remove_all(dir);
    RunConfig cfg = small_config(dir.string());
    cfg.solver.m = 1024;
    CHECK(run_verify_sign(cfg) == kExitOk);
    auto kv = read_summary(dir);
    CHECK(std::stoi(kv.at("report.0.negative_nodes")) == 0);   // t = 0
    CHECK(std::stoi(kv.at("report.2.negative_nodes")) > 0);    // t = 2e-4
    CHECK(std::stod(kv.at("rate.max_rel_err")) <= 1e-2);
}

TEST_CASE("reproduce passes on defaults-at-reduced-grid and fails on knopf") {
    auto dir = fs::temp_directory_path() / "krf_test_repro";
    fs::remove_all(dir);
    RunConfig cfg = small_config(dir.string());
    cfg.solver.m = 1024;
    cfg.solver.t_end = 1e-3;
    cfg.solver.snapshot_times = {1e-3};
    CHECK(run_reproduce(cfg) == kExitOk);
    auto kv = read_summary(dir);
    CHECK(kv.at("check.all") == "true");

    RunConfig n3 = cfg;
    n3.params.n = 3;
    n3.out_dir = (fs::temp_directory_path() / "krf_test_repro_n3").string();
    CHECK(run_reproduce(n3) == kExitOk);

    RunConfig knopf = cfg;
    knopf.mode = ProfileMode::KnopfConstant;
    knopf.out_dir = (fs::temp_directory_path() / "krf_test_repro_k").string();
    CHECK(run_reproduce(knopf) == kExitCheckFailed);  // certificate fails condition 6
}

TEST_CASE("invalid parameters surface as invalid_argument") {
    RunConfig cfg = small_config((fs::temp_directory_path() / "krf_test_bad").string());
    cfg.params.k = 5;
    CHECK_THROWS_AS(run_certify(cfg), std::invalid_argument);
}

TEST_CASE("format_full refuses non-finite values") {
    CHECK_THROWS(format_full(std::numeric_limits<double>::infinity()));
    CHECK(format_full(0.25) == "0.25");
}
