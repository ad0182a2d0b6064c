#pragma once

// Turns raw numerics into verdicts: certification of the initial metric
// (positivity conditions + Calabi extension), detection of the negative
// radial Ricci eigenvalue under the flow, and the measured-vs-analytic
// comparison of d/dt psi_r at t = 0.

#include <limits>
#include <vector>

#include "krf/calabi.hpp"
#include "krf/flow.hpp"
#include "krf/profile.hpp"

namespace krf {

struct Certificate {
    struct Witness {
        double r = 0;
        double value = 0;
    };
    bool phi_positive = false;
    bool phi_r_positive = false;
    bool psi_positive = false;
    bool psi_r_nonnegative = false;
    bool extends_at_zero = false;
    bool extends_at_infinity = false;
    Witness min_phi, min_phi_r, min_psi, min_psi_r;  // extremal grid nodes
    ExtensionVerdict extension;

    bool all_conditions() const {
        return phi_positive && phi_r_positive && psi_positive && psi_r_nonnegative &&
               extends_at_zero && extends_at_infinity;
    }
};

// Pointwise conditions on the grid (grid must span at least [-40, 40]) plus
// the two extension fits. Failures are verdicts, not errors.
Certificate certify_initial(const RadialProfile& profile, double r_lo = -40.0,
                            double r_hi = 40.0, int m = 4096);

struct MixedSignReport {
    double t = 0;
    std::vector<double> negative_locus;  // grid r with lambda2 < -tol
    double min_lambda2 = 0;
    double min_lambda2_r = 0;
    double predicted_threshold = 0;  // log(k c)/k, the t -> 0+ sign boundary
};

std::vector<MixedSignReport> detect_mixed_sign(const std::vector<Snapshot>& snapshots,
                                               double tol = 1e-12);

struct RateComparison {
    std::vector<double> r;         // window nodes
    std::vector<double> measured;  // Richardson-extrapolated d/dt psi_r at t = 0
    std::vector<double> analytic;
    double max_rel_err = 0;
    double mean_rel_err = 0;
    bool has_zero_crossing = false;
    double zero_crossing_r = 0;
};

// Two short evolutions (dt = 1e-5 and 5e-6), Richardson-extrapolated slope of
// psi_r against the closed-form rate on window nodes r in [window_lo,
// window_hi]; window_hi defaults to -2 delta when non-finite.
RateComparison compare_dt_psi_r(const RadialProfile& profile, const SolverConfig& config,
                                double window_lo = -20.0,
                                double window_hi = std::numeric_limits<double>::quiet_NaN());

}  // namespace krf
