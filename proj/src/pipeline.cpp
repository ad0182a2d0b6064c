#include "krf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace krf {

namespace {

namespace fs = std::filesystem;

struct Summary {
    std::vector<std::pair<std::string, std::string>> items;
    void add(const std::string& key, const std::string& v) { items.emplace_back(key, v); }
    void add(const std::string& key, double v) { items.emplace_back(key, format_full(v)); }
    void add(const std::string& key, bool v) { items.emplace_back(key, v ? "true" : "false"); }
    void add(const std::string& key, int v) { items.emplace_back(key, std::to_string(v)); }

    void write(const fs::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        for (const auto& [k, v] : items) out << k << " = " << v << "\n";
    }
    void print() const {
        for (const auto& [k, v] : items) std::printf("%s = %s\n", k.c_str(), v.c_str());
    }
};

std::string snapshot_filename(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_t%.6e.csv", t);
    return buf;
}

void ensure_out_dir(const RunConfig& config) { fs::create_directories(config.out_dir); }

void add_certificate(Summary& s, const Certificate& cert) {
    s.add("certificate.phi_positive", cert.phi_positive);
    s.add("certificate.phi_r_positive", cert.phi_r_positive);
    s.add("certificate.psi_positive", cert.psi_positive);
    s.add("certificate.psi_r_nonnegative", cert.psi_r_nonnegative);
    s.add("certificate.extends_at_zero", cert.extends_at_zero);
    s.add("certificate.extends_at_infinity", cert.extends_at_infinity);
    s.add("certificate.all_conditions", cert.all_conditions());
    s.add("certificate.min_phi.r", cert.min_phi.r);
    s.add("certificate.min_phi.value", cert.min_phi.value);
    s.add("certificate.min_phi_r.r", cert.min_phi_r.r);
    s.add("certificate.min_phi_r.value", cert.min_phi_r.value);
    s.add("certificate.min_psi.r", cert.min_psi.r);
    s.add("certificate.min_psi.value", cert.min_psi.value);
    s.add("certificate.min_psi_r.r", cert.min_psi_r.r);
    s.add("certificate.min_psi_r.value", cert.min_psi_r.value);
}

void add_fit(Summary& s, const std::string& prefix, const ExpansionFit& fit) {
    s.add(prefix + ".c0", fit.c0);
    s.add(prefix + ".c1", fit.c1);
    s.add(prefix + ".c2", fit.c2);
    s.add(prefix + ".residual", fit.residual);
    s.add(prefix + ".valid", fit.valid);
    s.add(prefix + ".samples", fit.samples);
}

void add_report(Summary& s, const std::string& prefix, const MixedSignReport& rep) {
    s.add(prefix + ".t", rep.t);
    s.add(prefix + ".negative_nodes", (int)rep.negative_locus.size());
    if (!rep.negative_locus.empty()) {
        s.add(prefix + ".locus_min_r", rep.negative_locus.front());
        s.add(prefix + ".locus_max_r", rep.negative_locus.back());
    }
    s.add(prefix + ".min_lambda2", rep.min_lambda2);
    s.add(prefix + ".min_lambda2_r", rep.min_lambda2_r);
    s.add(prefix + ".predicted_threshold", rep.predicted_threshold);
}

void add_rates(Summary& s, const RateComparison& rates) {
    s.add("rate.max_rel_err", rates.max_rel_err);
    s.add("rate.mean_rel_err", rates.mean_rel_err);
    s.add("rate.window_nodes", (int)rates.r.size());
    s.add("rate.has_zero_crossing", rates.has_zero_crossing);
    if (rates.has_zero_crossing) s.add("rate.zero_crossing_r", rates.zero_crossing_r);
}

// Reproduction checks shared by `reproduce` and the acceptance suite: the
// certificate holds, the flowed metric has a certified negative lambda2
// confined left of the predicted threshold, and the measured rate matches
// the closed form to 1%.
struct ReproduceOutcome {
    bool cert_ok = false;
    bool locus_nonempty = false;
    bool locus_contained = false;
    bool positive_side_ok = false;
    bool rate_ok = false;
    bool all() const {
        return cert_ok && locus_nonempty && locus_contained && positive_side_ok && rate_ok;
    }
};

ReproduceOutcome reproduce_checks(const RunConfig& config, const Certificate& cert,
                                  const std::vector<Snapshot>& snaps,
                                  const std::vector<MixedSignReport>& reports,
                                  const RateComparison& rates) {
    ReproduceOutcome out;
    out.cert_ok = cert.all_conditions();
    const auto& last = reports.back();
    const FlowGrid& g = snaps.back().state.grid();
    double dr = (double)g.h;
    double threshold = last.predicted_threshold;
    out.locus_nonempty = !last.negative_locus.empty();
    out.locus_contained = true;
    for (double r : last.negative_locus)
        if (!(r < threshold + dr)) out.locus_contained = false;
    out.positive_side_ok = true;
    const auto& l2 = snaps.back().fields.lambda2;
    for (int i = 0; i < g.m; ++i) {
        double r = (double)g.r[i];
        if (r > threshold + dr && r <= -config.params.delta && (double)l2[i] < -1e-10)
            out.positive_side_ok = false;
    }
    out.rate_ok = rates.max_rel_err <= 1e-2;
    return out;
}

}  // namespace

std::string format_full(double v) {
    if (!std::isfinite(v)) throw std::runtime_error("refusing to serialize a non-finite value");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_snapshot_csv(const std::string& path, const Snapshot& snapshot) {
    std::ofstream out(fs::path(path), std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "r,phi,phi_r,psi,psi_r,lambda1,lambda2\n";
    const FlowGrid& g = snapshot.state.grid();
    const DerivedFields& f = snapshot.fields;
    for (int i = 0; i < g.m; ++i) {
        out << format_full((double)g.r[i]) << ',' << format_full((double)f.phi[i]) << ','
            << format_full((double)f.phi_r[i]) << ',' << format_full((double)f.psi[i]) << ','
            << format_full((double)f.psi_r[i]) << ',' << format_full((double)f.lambda1[i]) << ','
            << format_full((double)f.lambda2[i]) << '\n';
    }
}

int run_certify(const RunConfig& config) {
    ensure_out_dir(config);
    RadialProfile profile = build_profile(config.params, config.mode);
    Certificate cert = certify_initial(profile);
    Summary s;
    s.add("mode", to_string(config.mode));
    add_certificate(s, cert);
    add_fit(s, "expansion.zero", cert.extension.at_zero);
    add_fit(s, "expansion.infinity", cert.extension.at_infinity);
    s.add("expansion.heuristic", cert.extension.heuristic);
    s.write(fs::path(config.out_dir) / "summary.txt");
    s.print();
    return kExitOk;
}

int run_expand(const RunConfig& config) {
    ensure_out_dir(config);
    RadialProfile profile = build_profile(config.params, config.mode);
    ExtensionVerdict v = check_extension(profile);
    Summary s;
    s.add("mode", to_string(config.mode));
    s.add("extends_at_zero", v.extends_at_zero);
    s.add("extends_at_infinity", v.extends_at_infinity);
    s.add("heuristic", v.heuristic);
    add_fit(s, "expansion.zero", v.at_zero);
    add_fit(s, "expansion.infinity", v.at_infinity);
    s.write(fs::path(config.out_dir) / "summary.txt");
    s.print();
    return kExitOk;
}

int run_evolve(const RunConfig& config) {
    ensure_out_dir(config);
    RadialProfile profile = build_profile(config.params, config.mode);
    FlowState state = init_state(profile, config.solver);
    auto snaps = evolve(state, config.solver);
    Summary s;
    s.add("snapshots", (int)snaps.size());
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        std::string name = snapshot_filename(snaps[i].t);
        write_snapshot_csv((fs::path(config.out_dir) / name).string(), snaps[i]);
        s.add("snapshot." + std::to_string(i) + ".t", snaps[i].t);
        s.add("snapshot." + std::to_string(i) + ".file", name);
    }
    s.write(fs::path(config.out_dir) / "summary.txt");
    s.print();
    return kExitOk;
}

int run_verify_sign(const RunConfig& config) {
    ensure_out_dir(config);
    RadialProfile profile = build_profile(config.params, config.mode);
    FlowState state = init_state(profile, config.solver);
    auto snaps = evolve(state, config.solver);
    auto reports = detect_mixed_sign(snaps, config.sign_tol);
    auto rates = compare_dt_psi_r(profile, config.solver,
                                  std::max(-20.0, config.solver.r_min + 1.0));
    Summary s;
    for (std::size_t i = 0; i < reports.size(); ++i)
        add_report(s, "report." + std::to_string(i), reports[i]);
    add_rates(s, rates);
    s.write(fs::path(config.out_dir) / "summary.txt");
    s.print();
    return kExitOk;
}

int run_reproduce(const RunConfig& config) {
    ensure_out_dir(config);
    RadialProfile profile = build_profile(config.params, config.mode);
    Certificate cert = certify_initial(profile);
    FlowState state = init_state(profile, config.solver);
    auto snaps = evolve(state, config.solver);
    auto reports = detect_mixed_sign(snaps, config.sign_tol);
    auto rates = compare_dt_psi_r(profile, config.solver,
                                  std::max(-20.0, config.solver.r_min + 1.0));
    ReproduceOutcome outcome = reproduce_checks(config, cert, snaps, reports, rates);

    Summary s;
    add_certificate(s, cert);
    for (std::size_t i = 0; i < reports.size(); ++i)
        add_report(s, "report." + std::to_string(i), reports[i]);
    add_rates(s, rates);
    s.add("check.certificate", outcome.cert_ok);
    s.add("check.negative_locus_nonempty", outcome.locus_nonempty);
    s.add("check.negative_locus_contained", outcome.locus_contained);
    s.add("check.positive_side_clean", outcome.positive_side_ok);
    s.add("check.rate_match_1pct", outcome.rate_ok);
    s.add("check.all", outcome.all());
    for (std::size_t i = 0; i < snaps.size(); ++i)
        write_snapshot_csv((fs::path(config.out_dir) / snapshot_filename(snaps[i].t)).string(), snaps[i]);
    s.write(fs::path(config.out_dir) / "summary.txt");
    s.print();
    return outcome.all() ? kExitOk : kExitCheckFailed;
}

}  // namespace krf
