#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "krf/profile.hpp"

using krf::build_profile;
using krf::ProfileMode;
using krf::ProfileParams;
using krf::qfloat;
using krf::RadialProfile;

namespace {

// Independent brute-force oracle for the transition integrals: adaptive
// Simpson on its own copy of the slope definition, never touching the
// profile's cached quadrature.
double oracle_slope(double r, double delta) {
    if (r <= -delta) return 1.0;
    if (r >= delta) return -1.0;
    double t = (r + delta) / (2 * delta);
    double s0 = std::exp(-1.0 / t);
    double s1 = std::exp(-1.0 / (1.0 - t));
    return 1.0 - 2.0 * s0 / (s0 + s1);
}

template <typename F>
double simpson(const F& f, double a, double b, int n) {
    double h = (b - a) / n, acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

template <typename F>
double simpson_adaptive(const F& f, double a, double b) {
    double prev = simpson(f, a, b, 64);
    for (int n = 128; n <= 1 << 20; n *= 2) {
        double cur = simpson(f, a, b, n);
        if (std::abs(cur - prev) < 1e-13 * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

double oracle_f(double r, int k, double delta) {
    if (r <= -delta) return k * r;
    if (r >= delta) return -k * r;
    return -k * delta + k * simpson_adaptive([&](double x) { return oracle_slope(x, delta); },
                                             -delta, r);
}

// mpmath (50 digits), frozen: transition integral and F_inf for k=1, delta=1.
constexpr double kOracleFInf = 1.91429132822644529933441750249075316;
constexpr double kOracleF0 = 0.957145664113222649667208751245376579;
constexpr double kOracleLogDensity0 = -0.275549896537854386979490055650382082;
constexpr double kOracleSlopeHalf = 0.870061661742671875744914380065320128;  // a(-1/2)

}  // namespace

TEST_CASE("build_profile rejects invalid parameters") {
    CHECK_THROWS_AS(build_profile({1, 1, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_profile({2, 2, 1.0, 1.0}), std::invalid_argument);  // k > n-1
    CHECK_THROWS_AS(build_profile({2, 0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_profile({2, 1, -1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_profile({2, 1, 1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_profile({3, 2, 1.0, 1.0}, ProfileMode::KnopfConstant),
                    std::invalid_argument);
}

TEST_CASE("paper-smoothed closed forms on the rays (n=2, k=1, c=1, delta=1)") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    // F(r) = e^r exactly for r <= -1
    for (double r : {-1.0, -2.0, -10.0, -40.0}) {
        auto s = p.sample(r);
        CHECK(s.F == doctest::Approx(std::exp(r)).epsilon(1e-15));
        CHECK(s.a == 1.0);
        CHECK(s.f == doctest::Approx(r).epsilon(1e-15));
        CHECK(s.psi == 1.0);  // n - k a, exact
        CHECK(s.psi_r == 0.0);
        CHECK(s.phi == doctest::Approx(std::sqrt(2 * std::exp(r) + 1)).epsilon(1e-15));
    }
    // r = -10: phi = sqrt(2 e^-10 + 1)
    CHECK(p.sample(-10.0).phi == doctest::Approx(std::sqrt(2 * std::exp(-10.0) + 1)).epsilon(1e-16));
    // psi at r = -2 equals 1 with psi_r = 0
    CHECK(p.sample(-2.0).psi == 1.0);
    CHECK(p.sample(-2.0).psi_r == 0.0);
    // right ray: F = F_inf - e^{-r}, phi bounded
    double Finf = p.f_total_integral();
    for (double r : {1.0, 5.0, 30.0}) {
        auto s = p.sample(r);
        CHECK(s.F == doctest::Approx(Finf - std::exp(-r)).epsilon(1e-14));
        CHECK(s.a == -1.0);
        CHECK(s.psi == 3.0);
    }
    CHECK(p.sample(40.0).phi == doctest::Approx(std::sqrt(2 * Finf + 1)).epsilon(1e-13));
}

TEST_CASE("transition quadrature against the independent oracle") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    CHECK(p.f_total_integral() == doctest::Approx(kOracleFInf).epsilon(1e-14));
    CHECK(p.sample(0.0).F == doctest::Approx(kOracleF0).epsilon(1e-14));
    CHECK(p.sample(0.0).f == doctest::Approx(kOracleLogDensity0).epsilon(1e-14));
    CHECK(p.sample(-0.5).a == doctest::Approx(kOracleSlopeHalf).epsilon(1e-15));
    // a(0) = 0 by odd symmetry; psi(0) = n
    CHECK(std::abs(p.sample(0.0).a) < 1e-30);
    CHECK(p.sample(0.0).psi == doctest::Approx(2.0));
    auto p3 = build_profile({3, 1, 1.0, 1.0});
    CHECK(p3.sample(0.0).psi == doctest::Approx(3.0));
    // crosscheck f at an interior transition point against brute force
    CHECK(p.sample(0.37).f == doctest::Approx(oracle_f(0.37, 1, 1.0)).epsilon(1e-11));

    // F_inf bracket: tails are 2/e, transition integrand is below e^{-|...|} <= 1
    double Finf = p.f_total_integral();
    CHECK(Finf > 2 * std::exp(-1.0));
    CHECK(Finf < 2 * std::exp(-1.0) + 2.0);
}

TEST_CASE("f_total_integral stability and knopf divergence") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    // The cached quadrature already doubled panels until agreement below
    // 1e-30 relative, so two fresh builds agree far below 1e-12.
    auto p2 = build_profile({2, 1, 1.0, 1.0});
    CHECK(std::abs(p.f_total_integral() - p2.f_total_integral()) <
          1e-12 * p.f_total_integral());

    auto knopf = build_profile({2, 1, 1.0, 1.0}, ProfileMode::KnopfConstant);
    CHECK_THROWS_AS(knopf.f_total_integral(), std::domain_error);
}

TEST_CASE("knopf-constant profile is the exact exponential solution") {
    auto p = build_profile({2, 1, 1.0, 1.0}, ProfileMode::KnopfConstant);
    for (double r : {-30.0, -3.0, 0.0, 2.0, 10.0}) {
        auto s = p.sample(r);
        CHECK(s.phi == doctest::Approx(std::sqrt(2 * std::exp(r) + 1)).epsilon(1e-15));
        CHECK(s.a == 1.0);
        CHECK(s.psi == 1.0);
        CHECK(s.psi_r == 0.0);
    }
}

TEST_CASE("generating identity phi^(n-1) phi_r = e^f and psi bounds") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(-20.0, 20.0);
    for (auto [n, k] : {std::pair{2, 1}, {3, 1}, {3, 2}, {4, 3}}) {
        auto p = build_profile({n, k, 0.7, 1.3});
        for (int it = 0; it < 200; ++it) {
            double r = ur(rng);
            auto s = p.sample_q(qfloat(r));
            qfloat lhs = krf::qpow_int(s.phi, n - 1) * s.phi_r;
            qfloat rhs = krf::qexp(s.f);
            CHECK((double)krf::qabs(lhs - rhs) <= 1e-30 * (double)rhs);
            CHECK((double)s.phi > 0.0);
            CHECK((double)s.phi_r > 0.0);
            double psi = (double)s.psi;
            CHECK(psi >= n - k);
            CHECK(psi <= n + k);
            CHECK((double)s.psi_r >= 0.0);
            // psi = n - k a and psi_r = -k a_r, exact by construction
            CHECK(psi == doctest::Approx(n - k * (double)s.a).epsilon(1e-15));
        }
    }
}

TEST_CASE("psi equals the derivative chain n - (n-1) phi_r/phi - phi_rr/phi_r") {
    for (auto [n, k] : {std::pair{2, 1}, {4, 2}}) {
        auto p = build_profile({n, k, 1.0, 1.0});
        for (double r : {-3.0, -0.4, 0.0, 0.8, 2.5}) {
            auto s = p.sample(r);
            double chain = n - (n - 1) * s.phi_r / s.phi - s.phi_rr / s.phi_r;
            CHECK(s.psi == doctest::Approx(chain).epsilon(1e-13));
        }
    }
}

TEST_CASE("psi = G_r via 4th-order differences with the expected order") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    auto g_of = [&](qfloat r) { return p.sample_q(r).G; };
    for (double r0 : {-0.4, 0.25}) {
        double errs[2];
        int idx = 0;
        for (double h : {1e-2, 1e-3}) {
            qfloat hq(h), rq(r0);
            qfloat d = (g_of(rq - 2 * hq) - 8 * g_of(rq - hq) + 8 * g_of(rq + hq) -
                        g_of(rq + 2 * hq)) /
                       (12 * hq);
            errs[idx++] = std::abs((double)(d - p.sample_q(rq).psi));
        }
        // O(h^4): three decades of h^4 between h = 1e-2 and 1e-3
        CHECK(errs[0] / errs[1] > 2e3);
        CHECK(errs[0] / errs[1] < 5e4);
        CHECK(errs[1] < 1e-11);
    }
}

TEST_CASE("potential normalization and consistency") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    CHECK(p.potential(0.0) == 0.0);
    // P_r = phi at r = -10 equals sqrt(2 e^-10 + 1): central difference of P
    for (double r0 : {-10.0, 0.3, 2.0}) {
        double h = 1e-5;
        double d = (p.potential(r0 + h) - p.potential(r0 - h)) / (2 * h);
        CHECK(d == doctest::Approx(p.sample(r0).phi).epsilon(1e-9));
    }
    // monotone increasing, convex where sampled
    CHECK(p.potential(1.0) > p.potential(0.5));
    CHECK(p.potential(-1.0) < 0.0);
}

TEST_CASE("profile is safe for concurrent sampling") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    std::vector<double> out(64);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < 64; ++i) out[i] = p.sample(-2.0 + i * 0.1).phi;
    for (int i = 0; i < 64; ++i) CHECK(out[i] == p.sample(-2.0 + i * 0.1).phi);
}
