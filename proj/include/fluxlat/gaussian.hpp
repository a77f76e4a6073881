// gaussian.hpp - Quadratic fluctuation Hamiltonian, symplectic diagonalization,
// covariance matrix and site observables

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fluxlat/meanfield.hpp"
#include "fluxlat/model.hpp"

namespace fluxlat {

struct UnconvergedState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadraticForm {
    Eigen::MatrixXd h;   // 4N x 4N symmetric, quadrature order (q1,p1,Q1,P1,...)
    double offset{0.0};  // classical (mean-field) energy at the expansion point
};

struct SymplecticSpectrum {
    Eigen::VectorXd energies; // 2N mode energies, ascending
    Eigen::MatrixXd s;        // symplectic transform, S H S^T diagonal, S Omega S^T = Omega
    bool converged{false};    // false when h was only semidefinite (energies still valid)
    double gap{0.0};
};

struct SiteObservables {
    double photon_number{0.0};
    double entanglement{0.0}; // S_n = (1/2) ln det 2C_n over the 4x4 site block
    bool diverged{false};     // set when the gap is below the divergence threshold
};

// Canonical symplectic form in (q1,p1,Q1,P1,...) order.
Eigen::MatrixXd symplectic_form(int n_modes);

// Fluctuation Hamiltonian displaced to the given mean-field minimizer;
// at x = 0 this is the normal-phase form.
QuadraticForm build_quadratic(const ModelParams& p, const MeanFieldState& state);

// Eigen-decomposition of Omega*h with +/- pairing and symplectic Gram-Schmidt.
// Throws NotPositiveDefinite for indefinite h; semidefinite h yields energies
// only (converged = false).
SymplecticSpectrum symplectic_diagonalize(const QuadraticForm& form);

// Mode energies via Cholesky of h (Williamson route); requires h positive
// definite. Retained as the well-conditioned cross-check and gap oracle.
Eigen::VectorXd symplectic_energies_cholesky(const Eigen::MatrixXd& h);

// C = (1/2) S^T S of the diagonalizing transform.
Eigen::MatrixXd covariance(const SymplecticSpectrum& spec);

// Ground covariance directly from the Cholesky factor and the Schur form of
// the skew matrix L^T Omega L; stable arbitrarily close to the boundary.
Eigen::MatrixXd covariance_cholesky(const Eigen::MatrixXd& h);

std::vector<SiteObservables> observables(const SymplecticSpectrum& spec);

// Well-conditioned route via covariance_cholesky; requires h positive definite.
std::vector<SiteObservables> observables(const QuadraticForm& form);

} // namespace fluxlat
