// krflab: build the radial Kahler profile, certify its curvature conditions,
// evolve it under Kahler-Ricci flow, and report where the radial Ricci
// eigenvalue turns negative.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "krf/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Radial Kahler-Ricci flow pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    krf::RunConfig config;
    std::string mode_name = "paper-smoothed";

    app.set_config("--config", "", "Flat key=value configuration file; flags win");
    app.add_option("--n", config.params.n, "Complex dimension (>= 2)")->capture_default_str();
    app.add_option("--k", config.params.k, "Twist (1 <= k <= n-1)")->capture_default_str();
    app.add_option("--c", config.params.c, "Cap constant (> 0)")->capture_default_str();
    app.add_option("--delta", config.params.delta, "Smoothing half-width (> 0)")
        ->capture_default_str();
    app.add_option("--mode", mode_name, "paper-smoothed | knopf-constant")->capture_default_str();
    app.add_option("--r-min", config.solver.r_min, "Left end of the solver grid")
        ->capture_default_str();
    app.add_option("--r-max", config.solver.r_max, "Right end of the solver grid")
        ->capture_default_str();
    app.add_option("--grid-points", config.solver.m, "Grid nodes (>= 256)")->capture_default_str();
    app.add_option("--t-end", config.solver.t_end, "Final flow time (<= 0.1)")
        ->capture_default_str();
    app.add_option("--snapshots", config.solver.snapshot_times, "Snapshot times")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--cfl-safety", config.solver.cfl_safety, "Time-step safety factor in (0, 1]")
        ->capture_default_str();
    app.add_option("--out-dir", config.out_dir, "Output directory")->capture_default_str();

    auto* cmd_certify = app.add_subcommand("certify", "Certify the initial metric's conditions");
    auto* cmd_expand = app.add_subcommand("expand", "Fit the asymptotic expansions of phi");
    auto* cmd_evolve = app.add_subcommand("evolve", "Evolve and write snapshot tables");
    auto* cmd_verify = app.add_subcommand("verify-sign", "Detect the negative Ricci eigenvalue");
    auto* cmd_repro =
        app.add_subcommand("reproduce", "Full pipeline: certify, evolve, verify; nonzero on failure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return krf::kExitConfig;
    }

    try {
        config.mode = krf::profile_mode_from_string(mode_name);
        if (cmd_certify->parsed()) return krf::run_certify(config);
        if (cmd_expand->parsed()) return krf::run_expand(config);
        if (cmd_evolve->parsed()) return krf::run_evolve(config);
        if (cmd_verify->parsed()) return krf::run_verify_sign(config);
        if (cmd_repro->parsed()) return krf::run_reproduce(config);
        std::fprintf(stderr, "no subcommand selected\n");
        return krf::kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return krf::kExitConfig;
    } catch (const krf::FlowSingularity& e) {
        std::fprintf(stderr, "solver invariant violated: %s (node %d, r = %g, t = %g)\n", e.what(),
                     e.node, e.r, e.t);
        return krf::kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return krf::kExitSolver;
    }
}
