#include "krf/calabi.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace krf {

namespace {

// Truncation of the O(x^3) tail over x <= 1e-4 sits near 1e-12; anything
// above this is not a quadratic expansion.
constexpr double kValidResidual = 1e-8;

}  // namespace

ExpansionFit fit_expansion(const RadialProfile& profile, ExpansionEnd end, int samples,
                           double x_hi) {
    if (samples < 6) throw std::invalid_argument("fit_expansion: samples must be >= 6");
    if (!(x_hi > 0) || !(x_hi <= 1e-2))
        throw std::invalid_argument("fit_expansion: x_hi must lie in (0, 1e-2]");
    const int k = profile.params().k;

    ExpansionFit fit;
    fit.end = end;
    fit.samples = samples;
    fit.x_lo = x_hi * 1e-4;
    fit.x_hi = x_hi;

    Eigen::MatrixXd design(samples, 3);
    Eigen::VectorXd y(samples);
    const double lr = std::log(fit.x_lo), hr = std::log(fit.x_hi);
    for (int i = 0; i < samples; ++i) {
        double x = std::exp(lr + (hr - lr) * i / (samples - 1));
        double r = (end == ExpansionEnd::Zero ? std::log(x) : -std::log(x)) / k;
        design(i, 0) = 1.0;
        design(i, 1) = x;
        design(i, 2) = x * x;
        y[i] = (double)profile.phi_q(qfloat(r));
    }

    // Column scaling keeps the Vandermonde conditioning in range.
    Eigen::Vector3d scale;
    for (int j = 0; j < 3; ++j) scale[j] = design.col(j).cwiseAbs().maxCoeff();
    Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
    Eigen::Vector3d coeff = scale.cwiseInverse().asDiagonal() *
                            scaled.colPivHouseholderQr().solve(y);

    fit.c0 = coeff[0];
    fit.c1 = coeff[1];
    fit.c2 = coeff[2];
    fit.residual = (design * coeff - y).cwiseAbs().maxCoeff();
    fit.valid = std::isfinite(fit.residual) && fit.residual <= kValidResidual &&
                std::isfinite(fit.c0) && std::isfinite(fit.c1) && std::isfinite(fit.c2);
    return fit;
}

ExtensionVerdict check_extension(const RadialProfile& profile) {
    ExtensionVerdict v;
    v.at_zero = fit_expansion(profile, ExpansionEnd::Zero);
    v.at_infinity = fit_expansion(profile, ExpansionEnd::Infinity);
    v.extends_at_zero = v.at_zero.valid && v.at_zero.c0 > 0 && v.at_zero.c1 > 0;
    v.extends_at_infinity = v.at_infinity.valid && v.at_infinity.c0 > 0 && v.at_infinity.c1 < 0;
    v.heuristic = profile.params().k > 1;
    return v;
}

}  // namespace krf
