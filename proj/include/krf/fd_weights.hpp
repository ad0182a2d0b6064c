#pragma once

// Fornberg's recursion for finite-difference weights on arbitrary nodes.
// Generating the stencils instead of hard-coding tables keeps the one-sided
// boundary closures typo-free at any order.

#include <cstddef>
#include <vector>

namespace krf {

// Weights w such that f^(m)(x0) ~ sum_i w[i] f(x[i]).
// Exact for polynomials of degree <= x.size()-1.
template <typename T>
std::vector<T> fd_weights(T x0, const std::vector<T>& x, int m) {
    const int n = static_cast<int>(x.size());
    // c[i][s]: weight of node i for the s-th derivative.
    std::vector<std::vector<T>> c(n, std::vector<T>(m + 1, T(0)));
    c[0][0] = T(1);
    T c1 = T(1);
    T c4 = x[0] - x0;
    for (int i = 1; i < n; ++i) {
        int mn = i < m ? i : m;
        T c2 = T(1);
        T c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            T c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int s = mn; s >= 1; --s)
                    c[i][s] = c1 * (T(s) * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int s = mn; s >= 1; --s)
                c[j][s] = (c4 * c[j][s] - T(s) * c[j][s - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<T> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

}  // namespace krf
