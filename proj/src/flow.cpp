#include "krf/flow.hpp"

#include <algorithm>
#include <cmath>

#include "krf/band_lu.hpp"
#include "krf/fd_weights.hpp"

namespace krf {

namespace {

// Accuracy-target step at cfl_safety = 1; the implicit scheme is
// unconditionally stable, so the step is sized by temporal resolution of the
// O(1)-rate psi dynamics, not by a parabolic CFL bound.
constexpr double kBaseDt = 1.25e-4;

constexpr int kBand = 5;  // kl = ku = 5 covers the 6-point one-sided rows

qfloat ros2_gamma() { return 1 + 1 / qsqrt(qfloat(2)); }  // L-stable choice

// Dense solve for the small exponential-fitting systems.
std::vector<qfloat> solve_dense(std::vector<std::vector<qfloat>> a, std::vector<qfloat> b) {
    const int n = static_cast<int>(b.size());
    for (int j = 0; j < n; ++j) {
        int piv = j;
        for (int i = j + 1; i < n; ++i)
            if (qabs(a[i][j]) > qabs(a[piv][j])) piv = i;
        std::swap(a[j], a[piv]);
        std::swap(b[j], b[piv]);
        for (int i = j + 1; i < n; ++i) {
            qfloat l = a[i][j] / a[j][j];
            for (int c = j; c < n; ++c) a[i][c] -= l * a[j][c];
            b[i] -= l * b[j];
        }
    }
    std::vector<qfloat> x(n);
    for (int j = n - 1; j >= 0; --j) {
        qfloat acc = b[j];
        for (int c = j + 1; c < n; ++c) acc -= a[j][c] * x[c];
        x[j] = acc / a[j][j];
    }
    return x;
}

std::shared_ptr<const FlowGrid> build_grid(const RadialProfile& profile,
                                           const SolverConfig& config) {
    const auto& p = profile.params();
    if (config.m < 256) throw std::invalid_argument("solver: m must be >= 256");
    if (!(config.r_min < -p.delta - 5.0))
        throw std::invalid_argument("solver: r_min must be < -delta - 5");
    if (!(config.r_max > p.delta + 5.0))
        throw std::invalid_argument("solver: r_max must be > delta + 5");
    if (!(config.cfl_safety > 0.0) || !(config.cfl_safety <= 1.0))
        throw std::invalid_argument("solver: cfl_safety must be in (0, 1]");

    auto g = std::make_shared<FlowGrid>();
    g->m = config.m;
    g->n_dim = p.n;
    g->k_twist = p.k;
    g->h = (qfloat(config.r_max) - qfloat(config.r_min)) / (config.m - 1);
    g->r.resize(config.m);
    for (int i = 0; i < config.m; ++i) g->r[i] = qfloat(config.r_min) + i * g->h;
    g->r[config.m - 1] = qfloat(config.r_max);

    g->phi0.resize(config.m);
    g->phi0_r.resize(config.m);
    g->phi0_rr.resize(config.m);
    g->psi0.resize(config.m);
    g->psi0_r.resize(config.m);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < config.m; ++i) {
        auto s = profile.sample_q(g->r[i]);
        g->phi0[i] = s.phi;
        g->phi0_r[i] = s.phi_r;
        g->phi0_rr[i] = s.phi_rr;
        g->psi0[i] = s.psi;
        g->psi0_r[i] = s.psi_r;
    }

    // Central 4th-order stencils in the interior, 6-point one-sided rows at
    // the edges (order >= 4 for both derivatives).
    std::vector<qfloat> xc{-2 * g->h, -g->h, 0, g->h, 2 * g->h};
    auto d1 = fd_weights(qfloat(0), xc, 1);
    auto d2 = fd_weights(qfloat(0), xc, 2);
    for (int i = 0; i < 5; ++i) {
        g->d1_central[i] = d1[i];
        g->d2_central[i] = d2[i];
    }
    // Near the caps every evolved field is a series in the bundle coordinate:
    // exponents j*k (j >= 0) at the left cap, -j*k at the right (for the
    // unbounded knopf end, k(1/n - j), from phi^n = n e^r + c). Boundary
    // treatment is built on that structure twice over:
    //   - one-sided derivative rows fitted to the first six cap modes
    //     (polynomial-fitted rows leak a spurious {1, e^{kr}} solve mode that
    //     swamps the e^{-|r|}-sized psi_r signal);
    //   - the outermost two rows per side carry no PDE at all but the
    //     algebraic constraint Z eta = 0, where Z annihilates the first five
    //     cap modes. Without it the truncated r-line problem admits a
    //     secular w log w mode (~1e-3 t^2 in psi) that cap regularity
    //     forbids; Z pins the discrete solution to the regular branch.
    auto cap_exponents = [&](int sign) {
        std::array<qfloat, 6> mu{};
        for (int j = 0; j < 6; ++j) {
            if (sign > 0)
                mu[j] = qfloat(j) * p.k;
            else if (profile.mode() == ProfileMode::KnopfConstant)
                mu[j] = qfloat(p.k) * (qfloat(1) / p.n - j);
            else
                mu[j] = -qfloat(j) * p.k;
        }
        return mu;
    };
    auto edge_row = [&](int row, int start, const std::array<qfloat, 6>& mu) {
        FlowGrid::EdgeRow e;
        e.start = start;
        const int nb = 6;
        std::vector<std::vector<qfloat>> vander(nb, std::vector<qfloat>(nb));
        std::vector<qfloat> rhs1(nb), rhs2(nb);
        for (int j = 0; j < nb; ++j) {
            for (int i = 0; i < nb; ++i) {
                qfloat x = (start + i - row) * g->h;
                vander[j][i] = qexp(mu[j] * x);
            }
            rhs1[j] = mu[j];
            rhs2[j] = mu[j] * mu[j];
        }
        auto w1 = solve_dense(vander, rhs1);
        auto w2 = solve_dense(vander, rhs2);
        for (int i = 0; i < nb; ++i) {
            e.d1[i] = w1[i];
            e.d2[i] = w2[i];
        }
        return e;
    };
    // Z row: 6-point functional vanishing on the first five cap modes,
    // normalized against the secular partner x e^{mu_1 x} at 1/h^2 scale.
    auto constraint_row = [&](int row, int start, const std::array<qfloat, 6>& mu) {
        FlowGrid::ConstraintRow c;
        c.node = row;
        c.start = start;
        const int nb = 6;
        std::vector<std::vector<qfloat>> a(nb, std::vector<qfloat>(nb));
        std::vector<qfloat> b(nb, 0);
        for (int j = 0; j < 5; ++j)
            for (int i = 0; i < nb; ++i) {
                qfloat x = (start + i - row) * g->h;
                a[j][i] = qexp(mu[j] * x);
            }
        for (int i = 0; i < nb; ++i) {
            qfloat x = (start + i - row) * g->h;
            a[5][i] = x * qexp(mu[1] * x);
        }
        b[5] = 1 / (g->h * g->h);
        auto w = solve_dense(a, b);
        for (int i = 0; i < nb; ++i) c.z[i] = w[i];
        return c;
    };
    auto mu_left = cap_exponents(+1);
    auto mu_right = cap_exponents(-1);
    g->edge[0] = edge_row(0, 0, mu_left);
    g->edge[1] = edge_row(1, 0, mu_left);
    g->edge[2] = edge_row(config.m - 2, config.m - 6, mu_right);
    g->edge[3] = edge_row(config.m - 1, config.m - 6, mu_right);

    // Implicit solves mix O(1) rows with rows scaled by 1/phi0_r; once
    // phi0_r drops below the headroom the solve junk overwhelms the
    // physical e^{kr}-sized signal at that node, so such nodes are slaved
    // to the cap extension outright.
    const qfloat slave_threshold = 1e-16;
    int left_slaved = 2;
    while (left_slaved < config.m && g->phi0_r[left_slaved] < slave_threshold) ++left_slaved;
    int right_slaved = 2;
    while (right_slaved < config.m &&
           g->phi0_r[config.m - 1 - right_slaved] < slave_threshold)
        ++right_slaved;
    if (left_slaved + right_slaved + 12 > config.m)
        throw std::invalid_argument("solver: grid leaves no resolved interior (extend m or shrink the domain)");

    g->constraint_of.assign(config.m, -1);
    for (int i = 0; i < left_slaved; ++i) {
        g->constraint_of[i] = (int)g->constraints.size();
        g->constraints.push_back(constraint_row(i, i, mu_left));
    }
    for (int j = 0; j < right_slaved; ++j) {
        int i = config.m - 1 - j;
        g->constraint_of[i] = (int)g->constraints.size();
        g->constraints.push_back(constraint_row(i, i - 5, mu_right));
    }
    return g;
}

inline int edge_index(const FlowGrid& g, int i) {
    if (i == 0) return 0;
    if (i == 1) return 1;
    if (i == g.m - 2) return 2;
    if (i == g.m - 1) return 3;
    return -1;
}

// First/second derivative of a nodal field at row i.
inline void apply_stencils(const FlowGrid& g, const std::vector<qfloat>& v, int i, qfloat& d1,
                           qfloat& d2) {
    int e = edge_index(g, i);
    qfloat a1 = 0, a2 = 0;
    if (e < 0) {
        for (int s = 0; s < 5; ++s) {
            qfloat x = v[i - 2 + s];
            a1 += g.d1_central[s] * x;
            a2 += g.d2_central[s] * x;
        }
    } else {
        const auto& row = g.edge[e];
        for (int s = 0; s < 6; ++s) {
            qfloat x = v[row.start + s];
            a1 += row.d1[s] * x;
            a2 += row.d2[s] * x;
        }
    }
    d1 = a1;
    d2 = a2;
}

inline qfloat apply_d1(const FlowGrid& g, const std::vector<qfloat>& v, int i) {
    qfloat d1, d2;
    apply_stencils(g, v, i, d1, d2);
    return d1;
}

// Pass 1: phi and its derivatives plus psi at one node.
inline void node_fields(const FlowGrid& g, const std::vector<qfloat>& eta, int i,
                        DerivedFields& out) {
    qfloat eta_r, eta_rr;
    apply_stencils(g, eta, i, eta_r, eta_rr);
    qfloat phi = g.phi0[i] + eta[i];
    qfloat phi_r = g.phi0_r[i] + eta_r;
    qfloat phi_rr = g.phi0_rr[i] + eta_rr;
    qfloat psi = g.n_dim - (g.n_dim - 1) * phi_r / phi - phi_rr / phi_r;
    out.phi[i] = phi;
    out.phi_r[i] = phi_r;
    out.phi_rr[i] = phi_rr;
    out.psi[i] = psi;
    out.dpsi[i] = psi - g.psi0[i];
}

// Pass 2: psi_r and the Ricci eigenvalues at one node.
inline void node_eigen(const FlowGrid& g, int i, DerivedFields& out) {
    qfloat psi_r = g.psi0_r[i] + apply_d1(g, out.dpsi, i);
    out.psi_r[i] = psi_r;
    out.lambda1[i] = out.psi[i] / out.phi[i];
    out.lambda2[i] = psi_r / out.phi_r[i];
}

void check_kahler(const FlowGrid& g, const DerivedFields& d, double t) {
    for (int i = 0; i < g.m; ++i) {
        if (!(d.phi[i] > 0) || !qfinite(d.phi[i]))
            throw FlowSingularity("flow: phi lost positivity at node " + std::to_string(i), i,
                                  (double)g.r[i], t);
        if (!(d.phi_r[i] > 0) || !qfinite(d.phi_r[i]))
            throw FlowSingularity("flow: discrete phi_r lost positivity at node " + std::to_string(i),
                                  i, (double)g.r[i], t);
    }
}

DerivedFields alloc_fields(int m) {
    DerivedFields d;
    for (auto* v : {&d.phi, &d.phi_r, &d.phi_rr, &d.psi, &d.dpsi, &d.psi_r, &d.lambda1, &d.lambda2})
        v->resize(m);
    return d;
}

DerivedFields compute_derived(const FlowState& state, bool parallel) {
    const FlowGrid& g = state.grid();
    const auto& eta = state.eta();
    DerivedFields d = alloc_fields(g.m);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < g.m; ++i) node_fields(g, eta, i, d);
    } else {
        for (int i = 0; i < g.m; ++i) node_fields(g, eta, i, d);
    }
    check_kahler(g, d, state.t());
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < g.m; ++i) node_eigen(g, i, d);
    } else {
        for (int i = 0; i < g.m; ++i) node_eigen(g, i, d);
    }
    return d;
}

// A = M - gamma dt J: interior rows delta_ij - gamma dt d(-psi_i)/d(eta_j),
// cap-constraint rows gamma dt Z (mass zero, J = -Z).
void assemble_ros2_matrix(const FlowGrid& g, const DerivedFields& d, qfloat gdt,
                          BandMatrix<qfloat>& A) {
    const int n = g.n_dim;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.m; ++i) {
        int start = g.row_start(i), size = g.row_size(i);
        int b = g.constraint_of[i];
        if (b >= 0) {
            const auto& c = g.constraints[b];
            for (int s = 0; s < 6; ++s) A.at(i, c.start + s) = gdt * c.z[s];
            continue;
        }
        qfloat phi = d.phi[i], phi_r = d.phi_r[i], phi_rr = d.phi_rr[i];
        qfloat inv_phi2 = 1 / (phi * phi);
        qfloat inv_phir = 1 / phi_r;
        qfloat inv_phir2 = inv_phir * inv_phir;
        for (int s = 0; s < size; ++s) {
            int j = start + s;
            qfloat d1 = g.d1_weight(i, s);
            qfloat d2 = g.d2_weight(i, s);
            // J_ij = (n-1)(d1 phi - phi_r delta)/phi^2 + (d2 phi_r - phi_rr d1)/phi_r^2
            qfloat jij = (n - 1) * (d1 * phi - (j == i ? phi_r : qfloat(0))) * inv_phi2 +
                         (d2 * phi_r - phi_rr * d1) * inv_phir2;
            A.at(i, j) = (j == i ? qfloat(1) : qfloat(0)) - gdt * jij;
        }
    }
}

std::vector<qfloat> negate_psi(const DerivedFields& d) {
    std::vector<qfloat> f(d.psi.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = -d.psi[i];
    return f;
}

}  // namespace

bool FlowGrid::is_report_node(int i) const {
    if (is_constraint_node(i)) return false;
    int start = row_start(i), size = row_size(i);
    return !is_constraint_node(start) && !is_constraint_node(start + size - 1);
}

int FlowGrid::row_start(int i) const {
    int e = edge_index(*this, i);
    return e < 0 ? i - 2 : edge[e].start;
}

int FlowGrid::row_size(int i) const { return edge_index(*this, i) < 0 ? 5 : 6; }

qfloat FlowGrid::d1_weight(int i, int offset) const {
    int e = edge_index(*this, i);
    return e < 0 ? d1_central[offset] : edge[e].d1[offset];
}

qfloat FlowGrid::d2_weight(int i, int offset) const {
    int e = edge_index(*this, i);
    return e < 0 ? d2_central[offset] : edge[e].d2[offset];
}

std::vector<double> FlowState::grid_r() const {
    std::vector<double> out(grid_->m);
    for (int i = 0; i < grid_->m; ++i) out[i] = (double)grid_->r[i];
    return out;
}

std::vector<double> FlowState::phi_values() const {
    std::vector<double> out(grid_->m);
    for (int i = 0; i < grid_->m; ++i) out[i] = (double)(grid_->phi0[i] + eta_[i]);
    return out;
}

FlowState init_state(const RadialProfile& profile, const SolverConfig& config) {
    FlowState s;
    s.profile_ = std::make_shared<RadialProfile>(profile);
    s.grid_ = build_grid(profile, config);
    s.eta_.assign(config.m, qfloat(0));
    s.t_ = 0;
    return s;
}

DerivedFields derived_fields(const FlowState& state) { return compute_derived(state, true); }

DerivedFields derived_fields_serial(const FlowState& state) {
    return compute_derived(state, false);
}

std::vector<double> rhs(const FlowState& state) {
    DerivedFields d = derived_fields(state);
    std::vector<double> out(d.psi.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (double)(-d.psi[i]);
    return out;
}

FlowState step(const FlowState& state, double dt) {
    if (!(dt >= 0) || !std::isfinite(dt)) throw std::invalid_argument("step: dt must be >= 0");
    if (dt == 0) return state;

    const FlowGrid& g = state.grid();
    const qfloat dtq(dt);
    const qfloat gamma = ros2_gamma();

    // Mass-weighted Rosenbrock: PDE rows evolve by eta_t = -psi, cap rows
    // carry the algebraic constraint Z eta = 0 (index-1 DAE). L-stability
    // makes the constraint defect decay to R(inf) = 0 per step.
    auto stage_rhs = [&](const FlowState& s, const DerivedFields& d) {
        std::vector<qfloat> f = negate_psi(d);
        for (const auto& c : g.constraints) {
            qfloat acc = 0;
            for (int i = 0; i < 6; ++i) acc += c.z[i] * s.eta_[c.start + i];
            f[c.node] = -acc;
        }
        return f;
    };

    DerivedFields d0 = derived_fields(state);
    BandMatrix<qfloat> A(g.m, kBand, kBand);
    assemble_ros2_matrix(g, d0, gamma * dtq, A);
    A.factor();

    std::vector<qfloat> k1 = stage_rhs(state, d0);
    A.solve(k1);

    FlowState stage = state;
    for (int i = 0; i < g.m; ++i) stage.eta_[i] += dtq * k1[i];
    stage.t_ = state.t_ + dtq;  // stage time only used for diagnostics
    DerivedFields d1 = derived_fields(stage);

    std::vector<qfloat> k2 = stage_rhs(stage, d1);
    for (int i = 0; i < g.m; ++i)
        if (!g.is_constraint_node(i)) k2[i] -= 2 * k1[i];  // -2 M k1
    A.solve(k2);

    FlowState next = state;
    for (int i = 0; i < g.m; ++i)
        next.eta_[i] += dtq * (qfloat(1.5) * k1[i] + qfloat(0.5) * k2[i]);
    next.t_ = state.t_ + dtq;
    derived_fields(next);  // re-check the discrete Kahler condition
    return next;
}

std::vector<Snapshot> evolve(const FlowState& initial, const SolverConfig& config) {
    if (!(config.t_end >= 0) || config.t_end > 1e-1)
        throw std::invalid_argument("evolve: t_end must lie in [0, 1e-1] (short-time regime)");

    std::vector<double> events;
    for (double t : config.snapshot_times)
        if (t > initial.t() && t <= config.t_end * (1 + 1e-12)) events.push_back(t);
    events.push_back(config.t_end);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                 events.end());

    std::vector<Snapshot> snaps;
    snaps.push_back({initial, derived_fields(initial), initial.t()});

    const double dt_target = config.cfl_safety * kBaseDt;
    FlowState cur = initial;
    for (double te : events) {
        double span = te - cur.t();
        if (span <= 0) continue;
        int nsteps = std::max(1, (int)std::ceil(span / dt_target - 1e-12));
        double dt = span / nsteps;
        for (int k = 0; k < nsteps; ++k) cur = step(cur, dt);
        snaps.push_back({cur, derived_fields(cur), cur.t()});
    }
    return snaps;
}

PsiResidual psi_equation_residual(const Snapshot& s0, const Snapshot& s1, const Snapshot& s2) {
    const FlowGrid& g = s1.state.grid();
    const int n = g.n_dim;
    qfloat dt_lo = s1.state.t_q() - s0.state.t_q();
    qfloat dt_hi = s2.state.t_q() - s1.state.t_q();
    if (!(dt_lo > 0) || !(dt_hi > 0) ||
        (double)qabs(dt_hi - dt_lo) > 1e-9 * (double)(dt_hi + dt_lo))
        throw std::invalid_argument("psi_equation_residual: snapshots must be equally spaced in t");

    PsiResidual out;
    out.t = s1.t;
    out.node_residual.resize(g.m);
    qfloat two_dt = dt_lo + dt_hi;
    qfloat max_all = 0, max_int = 0;
    for (int i = 0; i < g.m; ++i) {
        qfloat psi_t = (s2.fields.psi[i] - s0.fields.psi[i]) / two_dt;
        qfloat d1, psi_rr;
        apply_stencils(g, s1.fields.psi, i, d1, psi_rr);
        qfloat phi = s1.fields.phi[i], phi_r = s1.fields.phi_r[i], phi_rr = s1.fields.phi_rr[i];
        qfloat psi_r = s1.fields.psi_r[i];
        qfloat rhs_val = psi_rr / phi_r - (phi_rr / (phi_r * phi_r) - (n - 1) / phi) * psi_r -
                         (n - 1) * phi_r * s1.fields.psi[i] / (phi * phi);
        qfloat res = qabs(psi_t - rhs_val);
        out.node_residual[i] = (double)res;
        max_all = qmax(max_all, res);
        if (i >= 6 && i < g.m - 6 && g.is_report_node(i)) max_int = qmax(max_int, res);
    }
    out.max_residual = (double)max_all;
    out.max_interior_residual = (double)max_int;
    return out;
}

double analytic_dt_psi_r(const RadialProfile& profile, double r) {
    const auto& p = profile.params();
    if (p.k != 1) throw std::invalid_argument("analytic_dt_psi_r: derived for k = 1 only");
    if (profile.mode() == ProfileMode::PaperSmoothed && !(r <= -p.delta))
        throw std::invalid_argument("analytic_dt_psi_r: valid on the ray r <= -delta only");
    qfloat er = qexp(qfloat(r));
    qfloat phi = profile.phi_q(qfloat(r));
    qfloat num = qfloat((p.n - 1) * (p.n - 1)) * er * (er - qfloat(p.c));
    return (double)(num / qpow_int(phi, 2 * p.n + 1));
}

namespace detail {
double dt_psi_r_left_ray(const RadialProfile& profile, double r) {
    const auto& p = profile.params();
    if (profile.mode() == ProfileMode::PaperSmoothed && !(r <= -p.delta))
        throw std::invalid_argument("dt_psi_r_left_ray: valid on the ray r <= -delta only");
    qfloat ekr = qexp(qfloat(p.k) * qfloat(r));
    qfloat phi = profile.phi_q(qfloat(r));
    qfloat num = qfloat((p.n - 1) * (p.n - p.k)) * ekr * (ekr - qfloat(p.k) * qfloat(p.c));
    return (double)(num / qpow_int(phi, 2 * p.n + 1));
}
}  // namespace detail

}  // namespace krf
