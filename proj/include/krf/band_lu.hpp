#pragma once

// Banded LU with partial pivoting (gbtrf-style storage). The implicit flow
// step solves (I - gamma*dt*J) x = b where J carries the 4th-order stencils,
// so the band is narrow (kl = ku = 5) and the factorization is O(n).

#include <cmath>
#include <stdexcept>
#include <vector>

namespace krf {

template <typename T>
class BandMatrix {
public:
    BandMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(static_cast<std::size_t>(ldab_) * n, T(0)) {}

    int size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    // Storage covers the pivoting fill band: j - (kl+ku) <= i <= j + kl.
    T& at(int i, int j) { return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)]; }
    const T& at(int i, int j) const {
        return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
    }
    bool in_band(int i, int j) const {
        return i >= 0 && i < n_ && j >= 0 && j < n_ && i - j <= kl_ && j - i <= kl_ + ku_;
    }

    // In-place factorization; multipliers stored below the diagonal.
    void factor() {
        piv_.assign(n_, 0);
        for (int j = 0; j < n_; ++j) {
            int imax = j;
            T amax = abs_of(at(j, j));
            int ilast = std::min(j + kl_, n_ - 1);
            for (int i = j + 1; i <= ilast; ++i) {
                T a = abs_of(at(i, j));
                if (a > amax) {
                    amax = a;
                    imax = i;
                }
            }
            if (!(amax > T(0))) throw std::runtime_error("BandMatrix::factor: singular pivot");
            piv_[j] = imax;
            int jlast = std::min(j + kl_ + ku_, n_ - 1);
            if (imax != j)
                for (int col = j; col <= jlast; ++col) std::swap(at(j, col), at(imax, col));
            T pivot = at(j, j);
            for (int i = j + 1; i <= ilast; ++i) {
                T l = at(i, j) / pivot;
                at(i, j) = l;
                for (int col = j + 1; col <= jlast; ++col) at(i, col) -= l * at(j, col);
            }
        }
        factored_ = true;
    }

    void solve(std::vector<T>& b) const {
        if (!factored_) throw std::logic_error("BandMatrix::solve before factor");
        for (int j = 0; j < n_; ++j) {
            if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
            int ilast = std::min(j + kl_, n_ - 1);
            for (int i = j + 1; i <= ilast; ++i) b[i] -= at(i, j) * b[j];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            b[j] /= at(j, j);
            int ifirst = std::max(0, j - kl_ - ku_);
            for (int i = ifirst; i < j; ++i) b[i] -= at(i, j) * b[j];
        }
    }

private:
    static T abs_of(T x) { return x < T(0) ? -x : x; }

    int n_, kl_, ku_, ldab_;
    std::vector<T> ab_;
    std::vector<int> piv_;
    bool factored_ = false;
};

}  // namespace krf
