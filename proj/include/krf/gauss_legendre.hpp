#pragma once

// Gauss-Legendre quadrature in quad precision: a fixed-order panel rule plus
// an adaptive composite driver that doubles the panel count until two
// successive refinements agree.

#include <functional>
#include <stdexcept>
#include <vector>

#include "krf/qfloat.hpp"

namespace krf {

struct GaussLegendre {
    std::vector<qfloat> x;  // nodes on (-1, 1)
    std::vector<qfloat> w;

    explicit GaussLegendre(int order) : x(order), w(order) {
        for (int i = 0; i < order; ++i) {
            // Newton on P_n from the Chebyshev-like seed.
            qfloat t = qcos(qfloat(M_PI) * (qfloat(i) + qfloat(0.75)) / (qfloat(order) + qfloat(0.5)));
            qfloat dp = 0;
            for (int it = 0; it < 100; ++it) {
                qfloat p0 = 1, p1 = t;
                for (int j = 2; j <= order; ++j) {
                    qfloat p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = order * (t * p1 - p0) / (t * t - 1);
                qfloat dt = p1 / dp;
                t -= dt;
                if (qabs(dt) < qfloat(1e-36)) break;
            }
            x[i] = t;
            w[i] = 2 / ((1 - t * t) * dp * dp);
        }
    }

    static const GaussLegendre& order20() {
        static const GaussLegendre rule(20);
        return rule;
    }
};

// Single-panel integral of f over [a, b].
template <typename F>
qfloat gl_panel(const F& f, qfloat a, qfloat b, const GaussLegendre& rule = GaussLegendre::order20()) {
    const qfloat mid = (a + b) / 2;
    const qfloat half = (b - a) / 2;
    qfloat acc = 0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * f(mid + half * rule.x[i]);
    return acc * half;
}

template <typename F>
qfloat gl_composite(const F& f, qfloat a, qfloat b, int panels,
                    const GaussLegendre& rule = GaussLegendre::order20()) {
    qfloat acc = 0;
    for (int p = 0; p < panels; ++p) {
        qfloat lo = a + (b - a) * p / panels;
        qfloat hi = a + (b - a) * (p + 1) / panels;
        acc += gl_panel(f, lo, hi, rule);
    }
    return acc;
}

// Doubles panels until successive refinements agree to rel_tol.
template <typename F>
qfloat gl_adaptive(const F& f, qfloat a, qfloat b, qfloat rel_tol = qfloat(1e-30),
                   int max_panels = 4096) {
    if (a == b) return 0;
    qfloat prev = gl_composite(f, a, b, 1);
    for (int panels = 2; panels <= max_panels; panels *= 2) {
        qfloat cur = gl_composite(f, a, b, panels);
        qfloat scale = qmax(qabs(cur), qabs(prev));
        if (qabs(cur - prev) <= rel_tol * qmax(scale, qfloat(1e-300))) return cur;
        prev = cur;
    }
    throw std::runtime_error("gl_adaptive: quadrature did not converge");
}

}  // namespace krf
