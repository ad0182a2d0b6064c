#include "krf/profile.hpp"

#include <cmath>
#include <stdexcept>

#include "krf/gauss_legendre.hpp"

namespace krf {

namespace {

// Legendre values P_0..P_lmax at t.
void legendre_all(qfloat t, int lmax, std::vector<qfloat>& p) {
    p.resize(lmax + 1);
    p[0] = 1;
    if (lmax >= 1) p[1] = t;
    for (int l = 2; l <= lmax; ++l) p[l] = ((2 * l - 1) * t * p[l - 1] - (l - 1) * p[l - 2]) / l;
}

}  // namespace

qfloat detail::bump_slope(qfloat r, qfloat delta) {
    if (r <= -delta) return 1;
    if (r >= delta) return -1;
    qfloat t = (r + delta) / (2 * delta);
    qfloat s0 = qexp(-1 / t);
    qfloat s1 = qexp(-1 / (1 - t));
    return 1 - 2 * s0 / (s0 + s1);
}

qfloat detail::bump_slope_deriv(qfloat r, qfloat delta) {
    if (r <= -delta || r >= delta) return 0;
    qfloat t = (r + delta) / (2 * delta);
    qfloat s0 = qexp(-1 / t);
    qfloat s1 = qexp(-1 / (1 - t));
    qfloat d0 = s0 / (t * t);              // sig'(t)
    qfloat d1 = s1 / ((1 - t) * (1 - t));  // sig'(1-t)
    qfloat den = s0 + s1;
    qfloat sp = (d0 * s1 + s0 * d1) / (den * den);
    return -sp / delta;  // chain rule: -2 sp * dt/dr, dt/dr = 1/(2 delta)
}

// Per-panel Legendre expansions of a and e^f over [-delta, delta]. Partial
// panel integrals come from int P_l = (P_{l+1} - P_{l-1})/(2l+1), which keeps
// every F evaluation exact with respect to the stored interpolant.
struct RadialProfile::TransitionTables {
    int panels = 0;
    int order = 20;
    qfloat lo = 0, width = 0;              // transition interval
    std::vector<qfloat> a_coeff;           // panels x order
    std::vector<qfloat> ef_coeff;          // panels x order
    std::vector<qfloat> a_prefix;          // size panels+1, int_{-delta}^{x_j} a
    std::vector<qfloat> ef_prefix;         // size panels+1, int_{-delta}^{x_j} e^f
    qfloat F_inf = 0;

    qfloat panel_width() const { return width / panels; }

    int locate(qfloat r) const {
        int j = static_cast<int>((double)((r - lo) / panel_width()));
        if (j < 0) j = 0;
        if (j >= panels) j = panels - 1;
        return j;
    }

    // int_{x_j}^{r} of the panel-j expansion given by coeff.
    qfloat partial(const std::vector<qfloat>& coeff, int j, qfloat r) const {
        qfloat hp = panel_width();
        qfloat t = 2 * (r - (lo + j * hp)) / hp - 1;
        std::vector<qfloat> p;
        legendre_all(t, order, p);
        const qfloat* c = &coeff[static_cast<std::size_t>(j) * order];
        qfloat acc = c[0] * (t + 1);
        for (int l = 1; l < order; ++l) acc += c[l] * (p[l + 1] - p[l - 1]) / (2 * l + 1);
        return acc * hp / 2;
    }

    qfloat value(const std::vector<qfloat>& coeff, int j, qfloat r) const {
        qfloat hp = panel_width();
        qfloat t = 2 * (r - (lo + j * hp)) / hp - 1;
        std::vector<qfloat> p;
        legendre_all(t, order, p);
        const qfloat* c = &coeff[static_cast<std::size_t>(j) * order];
        qfloat acc = 0;
        for (int l = 0; l < order; ++l) acc += c[l] * p[l];
        return acc;
    }
};

namespace {

using Tables = RadialProfile::TransitionTables;

// Project f onto Legendre modes per panel via the panel's own GL nodes.
template <typename F>
void project_panels(Tables& tb, const F& fn, std::vector<qfloat>& coeff,
                    std::vector<qfloat>& prefix) {
    const GaussLegendre& rule = GaussLegendre::order20();
    const int P = tb.panels, ord = tb.order;
    coeff.assign(static_cast<std::size_t>(P) * ord, 0);
    prefix.assign(P + 1, 0);
    std::vector<qfloat> pl;
    qfloat hp = tb.panel_width();
    for (int j = 0; j < P; ++j) {
        qfloat mid = tb.lo + hp * j + hp / 2;
        qfloat* c = &coeff[static_cast<std::size_t>(j) * ord];
        for (int q = 0; q < ord; ++q) {
            qfloat t = rule.x[q];
            qfloat v = fn(mid + (hp / 2) * t);
            legendre_all(t, ord - 1, pl);
            for (int l = 0; l < ord; ++l) c[l] += rule.w[q] * v * pl[l] * (2 * l + 1) / 2;
        }
        prefix[j + 1] = prefix[j] + c[0] * hp;  // int P_0 over the panel
    }
}

std::shared_ptr<const Tables> build_tables(int k, qfloat delta, qfloat rel_tol) {
    auto attempt = [&](int panels) {
        auto tb = std::make_shared<Tables>();
        tb->panels = panels;
        tb->lo = -delta;
        tb->width = 2 * delta;
        project_panels(*tb, [&](qfloat x) { return detail::bump_slope(x, delta); }, tb->a_coeff,
                       tb->a_prefix);
        // f(x) = -k delta + k int_{-delta}^x a  on the transition
        auto f_of = [&](qfloat x) {
            int j = tb->locate(x);
            return -k * delta + k * (tb->a_prefix[j] + tb->partial(tb->a_coeff, j, x));
        };
        project_panels(*tb, [&](qfloat x) { return qexp(f_of(x)); }, tb->ef_coeff, tb->ef_prefix);
        qfloat tail = qexp(-k * delta) / k;
        tb->F_inf = 2 * tail + tb->ef_prefix[panels];
        return tb;
    };

    auto prev = attempt(32);
    for (int panels = 64; panels <= 2048; panels *= 2) {
        auto cur = attempt(panels);
        if (qabs(cur->F_inf - prev->F_inf) <= rel_tol * cur->F_inf) return cur;
        prev = cur;
    }
    throw std::runtime_error("build_profile: transition quadrature did not converge");
}

}  // namespace

std::string to_string(ProfileMode mode) {
    return mode == ProfileMode::PaperSmoothed ? "paper-smoothed" : "knopf-constant";
}

ProfileMode profile_mode_from_string(const std::string& name) {
    if (name == "paper-smoothed") return ProfileMode::PaperSmoothed;
    if (name == "knopf-constant") return ProfileMode::KnopfConstant;
    throw std::invalid_argument("unknown profile mode: " + name);
}

RadialProfile build_profile(const ProfileParams& params, ProfileMode mode) {
    if (params.n < 2) throw std::invalid_argument("profile: n must be >= 2");
    if (params.k < 1 || params.k > params.n - 1)
        throw std::invalid_argument("profile: k must satisfy 1 <= k <= n-1");
    if (!(params.c > 0) || !std::isfinite(params.c))
        throw std::invalid_argument("profile: c must be positive");
    if (!(params.delta > 0) || !std::isfinite(params.delta))
        throw std::invalid_argument("profile: delta must be positive");
    if (mode == ProfileMode::KnopfConstant && params.k != 1)
        throw std::invalid_argument("profile: knopf-constant mode requires k = 1");

    RadialProfile p;
    p.params_ = params;
    p.mode_ = mode;
    p.c_ = params.c;
    p.delta_ = params.delta;
    if (mode == ProfileMode::PaperSmoothed)
        p.tables_ = build_tables(params.k, p.delta_, qfloat(1e-31));
    return p;
}

qfloat RadialProfile::slope_q(qfloat r) const {
    if (mode_ == ProfileMode::KnopfConstant) return 1;
    return detail::bump_slope(r, delta_);
}

qfloat RadialProfile::slope_deriv_q(qfloat r) const {
    if (mode_ == ProfileMode::KnopfConstant) return 0;
    return detail::bump_slope_deriv(r, delta_);
}

qfloat RadialProfile::log_density_q(qfloat r) const {
    const int k = params_.k;
    if (mode_ == ProfileMode::KnopfConstant) return r;  // k == 1
    if (r <= -delta_) return k * r;
    if (r >= delta_) return -k * r;
    int j = tables_->locate(r);
    return -k * delta_ + k * (tables_->a_prefix[j] + tables_->partial(tables_->a_coeff, j, r));
}

qfloat RadialProfile::cumulative_q(qfloat r) const {
    const int k = params_.k;
    if (mode_ == ProfileMode::KnopfConstant) return qexp(r);
    if (r <= -delta_) return qexp(k * r) / k;
    if (r >= delta_) return tables_->F_inf - qexp(-k * r) / k;
    int j = tables_->locate(r);
    return qexp(-k * delta_) / k + tables_->ef_prefix[j] + tables_->partial(tables_->ef_coeff, j, r);
}

qfloat RadialProfile::phi_q(qfloat r) const {
    return qroot(params_.n * cumulative_q(r) + c_, params_.n);
}

RadialProfile::SampleQ RadialProfile::sample_q(qfloat r) const {
    const int n = params_.n, k = params_.k;
    SampleQ s;
    s.a = slope_q(r);
    s.a_r = slope_deriv_q(r);
    s.f = log_density_q(r);
    s.F = cumulative_q(r);
    qfloat ef = qexp(s.f);
    s.phi = qroot(n * s.F + c_, n);
    qfloat phi_nm1 = qpow_int(s.phi, n - 1);
    s.phi_r = ef / phi_nm1;
    s.phi_rr = (k * s.a * ef - (n - 1) * ef * s.phi_r / s.phi) / phi_nm1;
    s.psi = n - k * s.a;
    s.psi_r = -qfloat(k) * s.a_r;
    s.G = n * r - (n - 1) * qlog(s.phi) - qlog(s.phi_r);
    return s;
}

ProfileSample RadialProfile::sample(double r) const {
    SampleQ q = sample_q(qfloat(r));
    ProfileSample s;
    s.r = r;
    s.a = (double)q.a;
    s.f = (double)q.f;
    s.F = (double)q.F;
    s.phi = (double)q.phi;
    s.phi_r = (double)q.phi_r;
    s.phi_rr = (double)q.phi_rr;
    s.psi = (double)q.psi;
    s.psi_r = (double)q.psi_r;
    s.G = (double)q.G;
    return s;
}

qfloat RadialProfile::f_total_integral_q() const {
    if (mode_ == ProfileMode::KnopfConstant)
        throw std::domain_error("f_total_integral: divergent for a == 1 (no cap at infinity)");
    return tables_->F_inf;
}

double RadialProfile::f_total_integral() const { return (double)f_total_integral_q(); }

qfloat RadialProfile::potential_q(qfloat r) const {
    if (r == 0) return 0;
    qfloat lo = qmin(r, qfloat(0)), hi = qmax(r, qfloat(0));
    // Split at the transition edges; phi is piecewise-analytic across them.
    std::vector<qfloat> cuts{lo};
    for (qfloat edge : {-delta_, delta_})
        if (edge > lo && edge < hi) cuts.push_back(edge);
    cuts.push_back(hi);
    qfloat acc = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += gl_adaptive([&](qfloat x) { return phi_q(x); }, cuts[i], cuts[i + 1], qfloat(1e-30));
    return r > 0 ? acc : -acc;
}

double RadialProfile::potential(double r) const { return (double)potential_q(qfloat(r)); }

}  // namespace krf
