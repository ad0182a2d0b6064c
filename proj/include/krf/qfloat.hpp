#pragma once

// Quad-precision scalar used by the radial-profile core and the flow solver.
// The flow observables divide exponentially small quantities (psi_r by phi_r,
// both ~ e^{-|r|}); double's 1e-16 noise floor is amplified by e^{|r|}/h^3
// through the finite-difference pipeline, so the state is kept in binary128.

#include <quadmath.h>

#include <cstdio>
#include <string>

namespace krf {

using qfloat = __float128;

inline qfloat qexp(qfloat x) { return expq(x); }
inline qfloat qlog(qfloat x) { return logq(x); }
inline qfloat qsqrt(qfloat x) { return sqrtq(x); }
inline qfloat qcbrt(qfloat x) { return cbrtq(x); }
inline qfloat qpow(qfloat x, qfloat y) { return powq(x, y); }
inline qfloat qabs(qfloat x) { return fabsq(x); }
inline qfloat qcos(qfloat x) { return cosq(x); }
inline bool qfinite(qfloat x) { return !isnanq(x) && !isinfq(x); }

inline qfloat qeps() { return FLT128_EPSILON; }

inline qfloat qmax(qfloat a, qfloat b) { return a > b ? a : b; }
inline qfloat qmin(qfloat a, qfloat b) { return a < b ? a : b; }

// x^p by repeated multiplication, p >= 0 small (metric dimensions are tiny).
inline qfloat qpow_int(qfloat x, int p) {
    qfloat acc = 1;
    for (int i = 0; i < p; ++i) acc *= x;
    return acc;
}

// Principal n-th root for n >= 2 (sqrt/cbrt fast paths keep full precision).
inline qfloat qroot(qfloat x, int n) {
    if (n == 2) return qsqrt(x);
    if (n == 3) return qcbrt(x);
    if (n == 4) return qsqrt(qsqrt(x));
    return qpow(x, qfloat(1) / n);
}

inline std::string qformat(qfloat x, int digits = 36) {
    char buf[128];
    quadmath_snprintf(buf, sizeof buf, "%.*Qe", digits, x);
    return std::string(buf);
}

// Complex quad scalar for the Hermitian-matrix determinant checks.
struct cqfloat {
    qfloat re{0};
    qfloat im{0};

    friend cqfloat operator+(cqfloat a, cqfloat b) { return {a.re + b.re, a.im + b.im}; }
    friend cqfloat operator-(cqfloat a, cqfloat b) { return {a.re - b.re, a.im - b.im}; }
    friend cqfloat operator*(cqfloat a, cqfloat b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend cqfloat operator*(qfloat s, cqfloat a) { return {s * a.re, s * a.im}; }
    cqfloat conj() const { return {re, -im}; }
    qfloat abs2() const { return re * re + im * im; }
};

// Smith's algorithm; avoids overflow in the intermediate products.
inline cqfloat cqdiv(cqfloat a, cqfloat b) {
    if (qabs(b.re) >= qabs(b.im)) {
        qfloat t = b.im / b.re;
        qfloat d = b.re + b.im * t;
        return {(a.re + a.im * t) / d, (a.im - a.re * t) / d};
    }
    qfloat t = b.re / b.im;
    qfloat d = b.re * t + b.im;
    return {(a.re * t + a.im) / d, (a.im * t - a.re) / d};
}

}  // namespace krf
