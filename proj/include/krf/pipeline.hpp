#pragma once

// Wiring from a run configuration to the modules, plus the flat-file output
// formats: one CSV per snapshot (r,phi,phi_r,psi,psi_r,lambda1,lambda2 at
// full double precision) and a key=value summary document.

#include <string>
#include <vector>

#include "krf/analysis.hpp"
#include "krf/flow.hpp"
#include "krf/profile.hpp"

namespace krf {

struct RunConfig {
    ProfileParams params;
    ProfileMode mode = ProfileMode::PaperSmoothed;
    SolverConfig solver;
    std::string out_dir = "out";
    double sign_tol = 1e-12;
};

// Exit statuses shared by the CLI: 0 ok, 1 invalid config, 2 solver
// invariant violation, 3 acceptance check failed.
enum ExitStatus : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitSolver = 2,
    kExitCheckFailed = 3,
};

int run_certify(const RunConfig& config);
int run_expand(const RunConfig& config);
int run_evolve(const RunConfig& config);
int run_verify_sign(const RunConfig& config);
int run_reproduce(const RunConfig& config);

// Deterministic %.17g serialization; throws if any value is non-finite.
void write_snapshot_csv(const std::string& path, const Snapshot& snapshot);
std::string format_full(double v);

}  // namespace krf
