#pragma once

// Calabi's smooth-extension criterion via numerically fitted asymptotic
// expansions of phi: near w = 0, phi ~ a0 + a1 x + a2 x^2 with a0, a1 > 0;
// near w = infinity (in x = 1/w), b0 > 0 and b1 < 0. For twist k > 1 the
// expansion variable is w^k (slope +-k makes F ~ e^{+-k r}/k) and the
// verdict is reported as heuristic.

#include "krf/profile.hpp"

namespace krf {

enum class ExpansionEnd { Zero, Infinity };

struct ExpansionFit {
    ExpansionEnd end;
    double c0 = 0, c1 = 0, c2 = 0;  // coefficients against {1, x, x^2}
    double residual = 0;            // max abs misfit over the samples
    double x_lo = 0, x_hi = 0;      // sampling window in the expansion variable
    int samples = 0;
    bool valid = false;             // residual within tolerance, finite fit
};

struct ExtensionVerdict {
    bool extends_at_zero = false;
    bool extends_at_infinity = false;
    bool heuristic = false;  // k > 1: criterion stated by Calabi only for k = 1
    ExpansionFit at_zero;
    ExpansionFit at_infinity;
};

// Window spans [x_hi * 1e-4, x_hi] in the expansion variable; shrinking it
// toward the endpoint must shrink the O(x^3) misfit.
ExpansionFit fit_expansion(const RadialProfile& profile, ExpansionEnd end, int samples = 32,
                           double x_hi = 1e-4);
ExtensionVerdict check_extension(const RadialProfile& profile);

}  // namespace krf
