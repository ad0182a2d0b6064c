#include "krf/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace krf {

namespace {

double threshold_of(const ProfileParams& p) { return std::log(p.k * p.c) / p.k; }

}  // namespace

Certificate certify_initial(const RadialProfile& profile, double r_lo, double r_hi, int m) {
    if (!(r_lo <= -40.0) || !(r_hi >= 40.0))
        throw std::invalid_argument("certify_initial: grid must span at least [-40, 40]");
    if (m < 2) throw std::invalid_argument("certify_initial: m must be >= 2");

    Certificate cert;
    qfloat min_phi = 0, min_phi_r = 0, min_psi = 0, min_psi_r = 0;
    double arg_phi = 0, arg_phi_r = 0, arg_psi = 0, arg_psi_r = 0;
    const qfloat lo(r_lo), hi(r_hi);
    bool first = true;
    for (int i = 0; i < m; ++i) {
        qfloat r = lo + (hi - lo) * i / (m - 1);
        auto s = profile.sample_q(r);
        if (first || s.phi < min_phi) {
            min_phi = s.phi;
            arg_phi = (double)r;
        }
        if (first || s.phi_r < min_phi_r) {
            min_phi_r = s.phi_r;
            arg_phi_r = (double)r;
        }
        if (first || s.psi < min_psi) {
            min_psi = s.psi;
            arg_psi = (double)r;
        }
        if (first || s.psi_r < min_psi_r) {
            min_psi_r = s.psi_r;
            arg_psi_r = (double)r;
        }
        first = false;
    }
    cert.min_phi = {arg_phi, (double)min_phi};
    cert.min_phi_r = {arg_phi_r, (double)min_phi_r};
    cert.min_psi = {arg_psi, (double)min_psi};
    cert.min_psi_r = {arg_psi_r, (double)min_psi_r};
    cert.phi_positive = min_phi > 0;
    cert.phi_r_positive = min_phi_r > 0;
    cert.psi_positive = min_psi > 0;
    cert.psi_r_nonnegative = min_psi_r >= 0;

    cert.extension = check_extension(profile);
    cert.extends_at_zero = cert.extension.extends_at_zero;
    cert.extends_at_infinity = cert.extension.extends_at_infinity;
    return cert;
}

std::vector<MixedSignReport> detect_mixed_sign(const std::vector<Snapshot>& snapshots,
                                               double tol) {
    if (!(tol > 0)) throw std::invalid_argument("detect_mixed_sign: tol must be positive");
    std::vector<MixedSignReport> reports;
    reports.reserve(snapshots.size());
    for (const auto& snap : snapshots) {
        const FlowGrid& g = snap.state.grid();
        MixedSignReport rep;
        rep.t = snap.t;
        rep.predicted_threshold = threshold_of(snap.state.profile().params());
        qfloat min_l2 = 0;
        double arg = 0;
        bool first = true;
        // Cap-constraint rows are algebraic extensions, not PDE nodes, and
        // the PDE rows whose stencils touch them inherit distorted
        // derivatives; both are excluded from the eigenvalue report.
        for (int i = 0; i < g.m; ++i) {
            if (!g.is_report_node(i)) continue;
            qfloat l2 = snap.fields.lambda2[i];
            if (l2 < -qfloat(tol)) rep.negative_locus.push_back((double)g.r[i]);
            if (first || l2 < min_l2) {
                min_l2 = l2;
                arg = (double)g.r[i];
                first = false;
            }
        }
        rep.min_lambda2 = (double)min_l2;
        rep.min_lambda2_r = arg;
        reports.push_back(std::move(rep));
    }
    return reports;
}

RateComparison compare_dt_psi_r(const RadialProfile& profile, const SolverConfig& config,
                                double window_lo, double window_hi) {
    const auto& p = profile.params();
    if (!std::isfinite(window_hi)) window_hi = -2.0 * p.delta;
    if (!(window_lo < window_hi))
        throw std::invalid_argument("compare_dt_psi_r: empty window");

    FlowState state = init_state(profile, config);
    const FlowGrid& g = state.grid();

    // Richardson over probe steps: slope(dt) = rate + O(dt), so the
    // combination 2 slope(dt/2) - slope(dt) removes the linear term.
    auto slope_field = [&](double dt_probe) {
        FlowState s = step(step(state, dt_probe / 2), dt_probe / 2);
        DerivedFields d = derived_fields(s);
        std::vector<qfloat> slope(g.m);
        for (int i = 0; i < g.m; ++i) slope[i] = (d.psi_r[i] - g.psi0_r[i]) / qfloat(dt_probe);
        return slope;
    };
    auto coarse = slope_field(1e-5);
    auto fine = slope_field(5e-6);

    RateComparison out;
    double err_sum = 0;
    for (int i = 0; i < g.m; ++i) {
        double r = (double)g.r[i];
        if (r < window_lo || r > window_hi) continue;
        if (!g.is_report_node(i)) continue;  // cap-slaved rows are not PDE nodes
        double measured = (double)(2 * fine[i] - coarse[i]);
        double analytic = p.k == 1 ? analytic_dt_psi_r(profile, r)
                                   : detail::dt_psi_r_left_ray(profile, r);
        out.r.push_back(r);
        out.measured.push_back(measured);
        out.analytic.push_back(analytic);
        double rel = std::abs(measured - analytic) / std::abs(analytic);
        out.max_rel_err = std::max(out.max_rel_err, rel);
        err_sum += rel;
    }
    if (out.r.empty()) throw std::invalid_argument("compare_dt_psi_r: no grid nodes in window");
    out.mean_rel_err = err_sum / out.r.size();

    for (std::size_t i = 0; i + 1 < out.r.size(); ++i) {
        if (out.measured[i] < 0 && out.measured[i + 1] >= 0) {
            double m0 = out.measured[i], m1 = out.measured[i + 1];
            out.zero_crossing_r = out.r[i] - m0 * (out.r[i + 1] - out.r[i]) / (m1 - m0);
            out.has_zero_crossing = true;
            break;
        }
    }
    return out;
}

}  // namespace krf
