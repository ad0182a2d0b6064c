#pragma once

// Radial profile of a U(n)-invariant Kahler metric on C^n \ {0}.
//
// The metric potential is encoded by phi(r) = P_r(r), r = log|z|^2, built
// from a slope function a(r) via the generating identity
//     phi^(n-1) phi_r = e^f,   f' = k a,
// which integrates to phi = (n F + c)^(1/n) with F(r) = int_-inf^r e^f.
// Two modes are supported: the smoothed odd transition a = +1 -> -1 (capped
// at both ends) and the constant a == 1 comparison profile (capped at one).

#include <memory>
#include <string>
#include <vector>

#include "krf/qfloat.hpp"

namespace krf {

enum class ProfileMode { PaperSmoothed, KnopfConstant };

std::string to_string(ProfileMode mode);
ProfileMode profile_mode_from_string(const std::string& name);

struct ProfileParams {
    int n = 2;          // complex dimension, n >= 2
    int k = 1;          // twist, 1 <= k <= n-1
    double c = 1.0;     // cap constant, > 0
    double delta = 1.0; // smoothing half-width, > 0
};

// One radial evaluation, all derived quantities filled.
struct ProfileSample {
    double r;
    double a;       // slope, in [-1, 1]
    double f;       // log-density, f' = k a
    double F;       // cumulative integral of e^f
    double phi;
    double phi_r;
    double phi_rr;
    double psi;     // n - k a
    double psi_r;   // -k a_r
    double G;       // n r - (n-1) log phi - log phi_r
};

class RadialProfile {
public:
    struct SampleQ {
        qfloat a, a_r, f, F, phi, phi_r, phi_rr, psi, psi_r, G;
    };

    const ProfileParams& params() const { return params_; }
    ProfileMode mode() const { return mode_; }

    // Quad-precision core evaluators.
    qfloat slope_q(qfloat r) const;        // a(r)
    qfloat slope_deriv_q(qfloat r) const;  // a_r(r)
    qfloat log_density_q(qfloat r) const;  // f(r)
    qfloat cumulative_q(qfloat r) const;   // F(r)
    qfloat phi_q(qfloat r) const;
    SampleQ sample_q(qfloat r) const;

    ProfileSample sample(double r) const;

    // F_inf = int_R e^f. Errors out in knopf-constant mode (no cap at
    // infinity: the integral diverges).
    qfloat f_total_integral_q() const;
    double f_total_integral() const;

    // P(r) = int_0^r phi, so P(0) = 0, P_r = phi, P_rr = phi_r.
    qfloat potential_q(qfloat r) const;
    double potential(double r) const;

    struct TransitionTables;  // cached quadrature over [-delta, delta], impl-only

private:
    friend RadialProfile build_profile(const ProfileParams&, ProfileMode);

    ProfileParams params_;
    ProfileMode mode_ = ProfileMode::PaperSmoothed;
    qfloat c_ = 1, delta_ = 1;
    std::shared_ptr<const TransitionTables> tables_;
};

// Validates params (n >= 2, 1 <= k <= n-1, c > 0, delta > 0; knopf-constant
// additionally requires k == 1) and precomputes the transition quadrature.
RadialProfile build_profile(const ProfileParams& params,
                            ProfileMode mode = ProfileMode::PaperSmoothed);

namespace detail {
// Smoothed slope on the transition interval, exactly +-1 outside it:
// a(r) = 1 - 2 s((r+delta)/(2 delta)) with the standard C^inf step
// s(t) = sig(t)/(sig(t)+sig(1-t)), sig(t) = exp(-1/t) for t > 0.
qfloat bump_slope(qfloat r, qfloat delta);
qfloat bump_slope_deriv(qfloat r, qfloat delta);
}  // namespace detail

}  // namespace krf
