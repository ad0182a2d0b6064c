#pragma once

// Kahler-Ricci flow reduced to the radial variable: phi_t = -psi with
//   psi = n - (n-1) phi_r / phi - phi_rr / phi_r.
//
// The state is the deviation eta(r, t) = phi - phi_0 from the initial
// profile; spatial derivatives combine the profile's analytic derivatives
// with 4th-order finite differences of eta (one-sided rows at the ends,
// fitted to the local cap basis). The linearized diffusion coefficient
// 1/phi_r grows like e^{|r|} toward the caps, so time stepping is a
// linearly implicit L-stable two-stage Rosenbrock scheme with the exact
// banded Jacobian, and the state is kept in quad precision (the flow
// observables are ratios of e^{-|r|}-sized quantities).

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "krf/profile.hpp"
#include "krf/qfloat.hpp"

namespace krf {

struct SolverConfig {
    double r_min = -28.0;
    double r_max = 14.0;
    int m = 4096;              // grid nodes
    double cfl_safety = 0.2;   // scales the accuracy-target step 1.25e-4
    double t_end = 1e-3;
    std::vector<double> snapshot_times{2.5e-4, 5e-4, 1e-3};
};

// Discrete Kahler condition failed (phi or discrete phi_r lost positivity).
class FlowSingularity : public std::runtime_error {
public:
    FlowSingularity(const std::string& what, int node_index, double node_r, double time)
        : std::runtime_error(what), node(node_index), r(node_r), t(time) {}
    int node;
    double r;
    double t;
};

// Immutable per-grid data shared by all states on the same grid: node
// positions, analytic profile values, and the finite-difference stencils.
struct FlowGrid {
    int m = 0;
    qfloat h = 0;
    int n_dim = 2, k_twist = 1;
    std::vector<qfloat> r;
    std::vector<qfloat> phi0, phi0_r, phi0_rr, psi0, psi0_r;

    std::array<qfloat, 5> d1_central{}, d2_central{};
    struct EdgeRow {
        int start = 0;
        std::array<qfloat, 6> d1{}, d2{};
    };
    std::array<EdgeRow, 4> edge;  // rows 0, 1, m-2, m-1

    // Cap-regularity constraint rows. Each functional annihilates the local
    // six-point cap basis, so Z eta = 0 pins the discrete solution to the
    // regular branch (the truncated line otherwise admits a secular
    // w log w mode). The outermost two rows per side always carry the
    // constraint; so does every deeper node whose phi0_r sits below the
    // quad-precision headroom of the implicit solves (the "deep zone",
    // where the solution is the cap series to far beyond working
    // precision anyway).
    struct ConstraintRow {
        int node = 0;
        int start = 0;  // leftmost node of the 6-point window
        std::array<qfloat, 6> z{};
    };
    std::vector<ConstraintRow> constraints;
    std::vector<int> constraint_of;  // per node: index into constraints or -1

    int row_start(int i) const;
    int row_size(int i) const;
    qfloat d1_weight(int i, int offset) const;  // offset into the row window
    qfloat d2_weight(int i, int offset) const;
    bool is_constraint_node(int i) const { return constraint_of[i] >= 0; }
    // PDE rows whose stencils see only PDE rows; eigenvalue reports are
    // restricted to these.
    bool is_report_node(int i) const;
};

class FlowState {
public:
    double t() const { return (double)t_; }
    qfloat t_q() const { return t_; }
    int size() const { return grid_->m; }
    const RadialProfile& profile() const { return *profile_; }
    const FlowGrid& grid() const { return *grid_; }
    const std::vector<qfloat>& eta() const { return eta_; }

    std::vector<double> grid_r() const;
    std::vector<double> phi_values() const;

private:
    friend FlowState init_state(const RadialProfile&, const SolverConfig&);
    friend FlowState step(const FlowState&, double);

    std::shared_ptr<const RadialProfile> profile_;
    std::shared_ptr<const FlowGrid> grid_;
    std::vector<qfloat> eta_;
    qfloat t_ = 0;
};

// Fields derived from phi = phi0 + eta on the grid. psi_r is assembled as
// psi0_r + D1(psi - psi0) so that at t = 0 it is exactly the analytic value;
// lambda2 = psi_r / phi_r is the radial Ricci eigenvalue.
struct DerivedFields {
    std::vector<qfloat> phi, phi_r, phi_rr, psi, dpsi, psi_r, lambda1, lambda2;
};

FlowState init_state(const RadialProfile& profile, const SolverConfig& config);

DerivedFields derived_fields(const FlowState& state);         // OpenMP kernel
DerivedFields derived_fields_serial(const FlowState& state);  // reference kernel

// Per-node time derivative of phi, i.e. -psi.
std::vector<double> rhs(const FlowState& state);

// One Rosenbrock step; dt = 0 returns the state unchanged.
FlowState step(const FlowState& state, double dt);

struct Snapshot {
    FlowState state;
    DerivedFields fields;
    double t = 0;
};

// Initial snapshot plus one per requested time <= t_end. Steps are sized
// from cfl_safety and cut exactly onto the snapshot times.
std::vector<Snapshot> evolve(const FlowState& initial, const SolverConfig& config);

// Residual of the derived psi evolution equation
//   psi_t = psi_rr/phi_r - (phi_rr/phi_r^2 - (n-1)/phi) psi_r
//           - (n-1) phi_r psi / phi^2
// with psi_t estimated by central time differencing of three equally spaced
// snapshots and the right side evaluated on the middle one.
struct PsiResidual {
    double t = 0;
    std::vector<double> node_residual;
    double max_residual = 0;           // over all nodes
    double max_interior_residual = 0;  // excluding 6 one-sided rows per edge
};
PsiResidual psi_equation_residual(const Snapshot& s0, const Snapshot& s1, const Snapshot& s2);

// Exact t = 0 rate (n-1)^2 e^r (e^r - c) / phi^(2n+1) of psi_r on the a == 1
// ray: requires k = 1 and r <= -delta in paper-smoothed mode (any r for the
// knopf-constant profile, where the ray is the whole line). Strictly
// negative exactly for r < log c.
double analytic_dt_psi_r(const RadialProfile& profile, double r);

namespace detail {
// General-twist version on the left ray: (n-1)(n-k) e^{kr} (e^{kr} - kc)
// / phi^(2n+1); vanishes at r = log(kc)/k.
double dt_psi_r_left_ray(const RadialProfile& profile, double r);
}  // namespace detail

}  // namespace krf
