#pragma once

// Full n x n complex metric and Ricci matrices at points of C^n \ {0},
// materialized from the radial profile:
//   g_{ab} = e^{-r} phi delta_{ab} + e^{-2r} (phi_r - phi) conj(z^a) z^b
//   R_{ab} = e^{-r} psi delta_{ab} + e^{-2r} (psi_r - psi) conj(z^a) z^b
// plus the generalized Ricci eigenproblem R W = lambda g W and a
// finite-difference cross-check of R = -dd^bar log det g.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "krf/profile.hpp"
#include "krf/qfloat.hpp"

namespace krf {

struct PointCoordinates {
    std::vector<std::complex<double>> z;

    explicit PointCoordinates(std::vector<std::complex<double>> coords);

    int n() const { return static_cast<int>(z.size()); }
    double w() const;  // sum |z^a|^2
    double r() const;  // log w
};

using HermitianForm = Eigen::MatrixXcd;

HermitianForm metric_at(const RadialProfile& profile, const PointCoordinates& z);
HermitianForm ricci_at(const RadialProfile& profile, const PointCoordinates& z);

struct RicciEigenpair {
    double value;
    int multiplicity;
    Eigen::VectorXcd eigenvector;  // one representative (1,0)-direction
};

// Generalized eigenvalues of R W = lambda g W, ascending, clustered by
// multiplicity. Solved by congruence (Cholesky of g) via Eigen.
std::vector<RicciEigenpair> ricci_eigenpairs(const RadialProfile& profile,
                                             const PointCoordinates& z);

// Max-norm difference between ricci_at and the second-order central complex
// finite difference of -log det g. Evaluated in quad precision so the O(h^2)
// truncation is observable down to tiny h.
double check_ricci_identity(const RadialProfile& profile, const PointCoordinates& z, double h);

// det of the metric matrix itself (LU in quad), for the determinant identity
// det g = e^{-n r} phi^{n-1} phi_r.
double metric_det(const RadialProfile& profile, const PointCoordinates& z);

// Max-norm residual between metric_at and the central finite-difference
// complex Hessian of the potential P.
double potential_hessian_residual(const RadialProfile& profile, const PointCoordinates& z,
                                  double h);

}  // namespace krf
