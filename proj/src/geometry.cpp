#include "krf/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace krf {

namespace {

using CPoint = std::vector<cqfloat>;

CPoint to_qpoint(const PointCoordinates& z) {
    CPoint p(z.z.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = {qfloat(z.z[i].real()), qfloat(z.z[i].imag())};
    return p;
}

qfloat norm2(const CPoint& p) {
    qfloat w = 0;
    for (const auto& c : p) w += c.abs2();
    return w;
}

// Row-major n x n matrix of the radial form coeff_diag * delta + coeff_rank1
// * conj(z^a) z^b, shared shape of both g and Rc.
std::vector<cqfloat> radial_form_q(const CPoint& z, qfloat diag, qfloat rank1) {
    const int n = static_cast<int>(z.size());
    std::vector<cqfloat> m(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cqfloat v = rank1 * (z[a].conj() * z[b]);
            if (a == b) v.re += diag;
            m[static_cast<std::size_t>(a) * n + b] = v;
        }
    return m;
}

std::vector<cqfloat> metric_q(const RadialProfile& profile, const CPoint& z) {
    qfloat w = norm2(z);
    qfloat r = qlog(w);
    auto s = profile.sample_q(r);
    return radial_form_q(z, s.phi / w, (s.phi_r - s.phi) / (w * w));
}

std::vector<cqfloat> ricci_q(const RadialProfile& profile, const CPoint& z) {
    qfloat w = norm2(z);
    qfloat r = qlog(w);
    auto s = profile.sample_q(r);
    return radial_form_q(z, s.psi / w, (s.psi_r - s.psi) / (w * w));
}

// Determinant by Gaussian elimination with partial pivoting; n is tiny.
cqfloat det_q(std::vector<cqfloat> m, int n) {
    cqfloat det{1, 0};
    for (int j = 0; j < n; ++j) {
        int piv = j;
        qfloat best = m[static_cast<std::size_t>(j) * n + j].abs2();
        for (int i = j + 1; i < n; ++i) {
            qfloat a = m[static_cast<std::size_t>(i) * n + j].abs2();
            if (a > best) {
                best = a;
                piv = i;
            }
        }
        if (!(best > 0)) return {0, 0};
        if (piv != j) {
            for (int c = 0; c < n; ++c)
                std::swap(m[static_cast<std::size_t>(j) * n + c], m[static_cast<std::size_t>(piv) * n + c]);
            det = qfloat(-1) * det;
        }
        cqfloat pivot = m[static_cast<std::size_t>(j) * n + j];
        det = det * pivot;
        for (int i = j + 1; i < n; ++i) {
            cqfloat l = cqdiv(m[static_cast<std::size_t>(i) * n + j], pivot);
            for (int c = j; c < n; ++c)
                m[static_cast<std::size_t>(i) * n + c] =
                    m[static_cast<std::size_t>(i) * n + c] - l * m[static_cast<std::size_t>(j) * n + c];
        }
    }
    return det;
}

qfloat log_det_metric_q(const RadialProfile& profile, const CPoint& z) {
    const int n = static_cast<int>(z.size());
    cqfloat d = det_q(metric_q(profile, z), n);
    if (!(d.re > 0)) throw std::runtime_error("log det g: non-positive determinant");
    return qlog(d.re);
}

qfloat potential_at_q(const RadialProfile& profile, const CPoint& z) {
    return profile.potential_q(qlog(norm2(z)));
}

HermitianForm to_eigen(const std::vector<cqfloat>& m, int n) {
    HermitianForm h(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const cqfloat& v = m[static_cast<std::size_t>(a) * n + b];
            h(a, b) = std::complex<double>((double)v.re, (double)v.im);
        }
    return h;
}

void validate_point(const PointCoordinates& z) {
    if (z.z.empty()) throw std::invalid_argument("point: empty coordinate vector");
    double w = 0;
    for (const auto& c : z.z) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::invalid_argument("point: non-finite coordinate");
        w += std::norm(c);
    }
    if (!(w > 0)) throw std::invalid_argument("point: z = 0 is outside C^n \\ {0}");
}

void validate_dimension(const RadialProfile& profile, const PointCoordinates& z) {
    if (z.n() != profile.params().n)
        throw std::invalid_argument("point dimension does not match the profile");
}

// Complex Hessian entry d^2 / dz^a dz^bar b of a scalar function via real
// central differences: (1/4)[Dxx + Dyy + i (Dxy - Dyx)] over the real
// coordinates (x_a, y_a).
template <typename F>
std::vector<cqfloat> complex_hessian_q(const F& fn, const CPoint& z0, qfloat h) {
    const int n = static_cast<int>(z0.size());
    auto shifted = [&](int coord, int part, int steps) {
        CPoint p = z0;
        if (part == 0)
            p[coord].re += steps * h;
        else
            p[coord].im += steps * h;
        return p;
    };
    qfloat f0 = fn(z0);
    auto second_same = [&](int coord, int part) {
        return (fn(shifted(coord, part, 1)) - 2 * f0 + fn(shifted(coord, part, -1))) / (h * h);
    };
    auto second_mixed = [&](int ca, int pa, int cb, int pb) {
        auto shift2 = [&](int sa, int sb) {
            CPoint p = z0;
            auto& ra = (pa == 0) ? p[ca].re : p[ca].im;
            ra += sa * h;
            auto& rb = (pb == 0) ? p[cb].re : p[cb].im;
            rb += sb * h;
            return fn(p);
        };
        return (shift2(1, 1) - shift2(1, -1) - shift2(-1, 1) + shift2(-1, -1)) / (4 * h * h);
    };
    auto dd = [&](int ca, int pa, int cb, int pb) {
        if (ca == cb && pa == pb) return second_same(ca, pa);
        return second_mixed(ca, pa, cb, pb);
    };
    std::vector<cqfloat> hess(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            qfloat re = (dd(a, 0, b, 0) + dd(a, 1, b, 1)) / 4;
            qfloat im = (dd(a, 0, b, 1) - dd(a, 1, b, 0)) / 4;
            hess[static_cast<std::size_t>(a) * n + b] = {re, im};
        }
    return hess;
}

qfloat max_abs_diff(const std::vector<cqfloat>& a, const std::vector<cqfloat>& b) {
    qfloat m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cqfloat d = a[i] - b[i];
        m = qmax(m, qsqrt(d.abs2()));
    }
    return m;
}

}  // namespace

PointCoordinates::PointCoordinates(std::vector<std::complex<double>> coords) : z(std::move(coords)) {
    validate_point(*this);
}

double PointCoordinates::w() const {
    double acc = 0;
    for (const auto& c : z) acc += std::norm(c);
    return acc;
}

double PointCoordinates::r() const { return std::log(w()); }

HermitianForm metric_at(const RadialProfile& profile, const PointCoordinates& z) {
    validate_dimension(profile, z);
    return to_eigen(metric_q(profile, to_qpoint(z)), z.n());
}

HermitianForm ricci_at(const RadialProfile& profile, const PointCoordinates& z) {
    validate_dimension(profile, z);
    return to_eigen(ricci_q(profile, to_qpoint(z)), z.n());
}

std::vector<RicciEigenpair> ricci_eigenpairs(const RadialProfile& profile,
                                             const PointCoordinates& z) {
    validate_dimension(profile, z);
    HermitianForm g = metric_at(profile, z);
    HermitianForm rc = ricci_at(profile, z);
    if (!g.allFinite() || !rc.allFinite())
        throw std::invalid_argument("ricci_eigenpairs: non-finite matrix entries");
    Eigen::GeneralizedSelfAdjointEigenSolver<HermitianForm> es(rc, g,
                                                               Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("ricci_eigenpairs: generalized eigensolver failed");

    const auto& vals = es.eigenvalues();
    double scale = std::max(1e-300, vals.cwiseAbs().maxCoeff());
    std::vector<RicciEigenpair> out;
    int i = 0;
    while (i < vals.size()) {
        int j = i;
        while (j + 1 < vals.size() && std::abs(vals[j + 1] - vals[i]) <= 1e-8 * scale) ++j;
        out.push_back({vals[i], j - i + 1, es.eigenvectors().col(i)});
        i = j + 1;
    }
    return out;
}

double check_ricci_identity(const RadialProfile& profile, const PointCoordinates& z, double h) {
    validate_dimension(profile, z);
    if (!(h > 0)) throw std::invalid_argument("check_ricci_identity: h must be positive");
    CPoint p = to_qpoint(z);
    auto neg_hess = complex_hessian_q(
        [&](const CPoint& q) { return log_det_metric_q(profile, q); }, p, qfloat(h));
    for (auto& e : neg_hess) e = qfloat(-1) * e;  // R = -dd^bar log det g
    return (double)max_abs_diff(neg_hess, ricci_q(profile, p));
}

double metric_det(const RadialProfile& profile, const PointCoordinates& z) {
    validate_dimension(profile, z);
    CPoint p = to_qpoint(z);
    return (double)det_q(metric_q(profile, p), z.n()).re;
}

double potential_hessian_residual(const RadialProfile& profile, const PointCoordinates& z,
                                  double h) {
    validate_dimension(profile, z);
    if (!(h > 0)) throw std::invalid_argument("potential_hessian_residual: h must be positive");
    CPoint p = to_qpoint(z);
    auto hess = complex_hessian_q([&](const CPoint& q) { return potential_at_q(profile, q); }, p,
                                  qfloat(h));
    return (double)max_abs_diff(hess, metric_q(profile, p));
}

}  // namespace krf
