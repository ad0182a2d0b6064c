#include <cmath>

#include "doctest.h"
#include "krf/calabi.hpp"

using namespace krf;

TEST_CASE("zero-end expansion recovers sqrt(c) and 1/sqrt(c) for n=2") {
    for (double c : {1.0, 0.7, 3.2}) {
        auto p = build_profile({2, 1, c, 1.0});
        auto fit = fit_expansion(p, ExpansionEnd::Zero);
        CHECK(fit.valid);
        CHECK(fit.c0 == doctest::Approx(std::sqrt(c)).epsilon(1e-8));
        CHECK(fit.c1 == doctest::Approx(1.0 / std::sqrt(c)).epsilon(1e-6));
        // a2 = -1/(2 c^{3/2}); quadratic coefficients are less conditioned
        CHECK(fit.c2 == doctest::Approx(-0.5 * std::pow(c, -1.5)).epsilon(1e-3));
        CHECK(fit.residual <= 1e-10);
    }
}

TEST_CASE("general n zero-end coefficients are c^{1/n} and c^{1/n - 1}") {
    for (int n : {3, 4}) {
        auto p = build_profile({n, 1, 1.3, 1.0});
        auto fit = fit_expansion(p, ExpansionEnd::Zero);
        CHECK(fit.valid);
        CHECK(fit.c0 == doctest::Approx(std::pow(1.3, 1.0 / n)).epsilon(1e-8));
        CHECK(fit.c1 == doctest::Approx(std::pow(1.3, 1.0 / n - 1.0)).epsilon(1e-6));
    }
}

TEST_CASE("infinity-end expansion has b0 = sqrt(c + 2 F_inf), b1 = -1/b0") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    double Finf = p.f_total_integral();
    auto fit = fit_expansion(p, ExpansionEnd::Infinity);
    CHECK(fit.valid);
    double b0 = std::sqrt(1.0 + 2 * Finf);
    CHECK(fit.c0 == doctest::Approx(b0).epsilon(1e-8));
    CHECK(fit.c1 == doctest::Approx(-1.0 / b0).epsilon(1e-6));
    CHECK(fit.c1 < 0.0);
}

TEST_CASE("knopf-constant profile fails the infinity fit") {
    auto p = build_profile({2, 1, 1.0, 1.0}, ProfileMode::KnopfConstant);
    auto inf = fit_expansion(p, ExpansionEnd::Infinity);
    CHECK_FALSE(inf.valid);
    CHECK(inf.residual > 1e-2);  // phi is unbounded: no quadratic fit exists
    auto zero = fit_expansion(p, ExpansionEnd::Zero);
    CHECK(zero.valid);
    CHECK(zero.c0 == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("extension verdicts") {
    auto paper = check_extension(build_profile({2, 1, 1.0, 1.0}));
    CHECK(paper.extends_at_zero);
    CHECK(paper.extends_at_infinity);
    CHECK_FALSE(paper.heuristic);

    auto knopf = check_extension(build_profile({2, 1, 1.0, 1.0}, ProfileMode::KnopfConstant));
    CHECK(knopf.extends_at_zero);
    CHECK_FALSE(knopf.extends_at_infinity);

    auto n3 = check_extension(build_profile({3, 1, 1.0, 1.0}));
    CHECK(n3.extends_at_zero);
    CHECK(n3.extends_at_infinity);

    auto twisted = check_extension(build_profile({4, 2, 1.0, 1.0}));
    CHECK(twisted.heuristic);
    CHECK(twisted.extends_at_zero);
    // in the w^k expansion variable: a1 = c^{1/n-1}/k
    CHECK(twisted.at_zero.c1 == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("verdict is invariant under doubling the sample count") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    auto v32 = fit_expansion(p, ExpansionEnd::Zero, 32);
    auto v64 = fit_expansion(p, ExpansionEnd::Zero, 64);
    CHECK(v32.valid == v64.valid);
    CHECK(v32.c0 == doctest::Approx(v64.c0).epsilon(1e-10));
    CHECK(v32.c1 == doctest::Approx(v64.c1).epsilon(1e-8));
}

TEST_CASE("fit rejects too few samples") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    CHECK_THROWS_AS(fit_expansion(p, ExpansionEnd::Zero, 5), std::invalid_argument);
}

TEST_CASE("fit residual decreases as the window shrinks toward the endpoint") {
    auto p = build_profile({2, 1, 1.0, 1.0});
    double wide = fit_expansion(p, ExpansionEnd::Zero, 32, 1e-3).residual;
    double mid = fit_expansion(p, ExpansionEnd::Zero, 32, 1e-4).residual;
    double tight = fit_expansion(p, ExpansionEnd::Zero, 32, 1e-5).residual;
    CHECK(wide > mid);
    CHECK(mid > tight);
}
