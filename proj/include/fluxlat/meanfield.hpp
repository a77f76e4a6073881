// meanfield.hpp - Semiclassical energy landscape: minimization, momentum-quadrature
// elimination, effective couplings, frustration classes and first-order boundaries

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fluxlat/model.hpp"

namespace fluxlat {

struct SingularCirculant : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MixedMagnitudes : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeanFieldState {
    Eigen::VectorXd x;      // rescaled position quadratures xbar_n
    Eigen::VectorXd y;      // rescaled momentum quadratures ybar_n
    double energy{0.0};     // rescaled energy (units N_a * Omega)
    std::vector<std::pair<double, double>> spin_angles; // per-site (theta_n, phi_n)
    bool converged{false};
    double grad_norm{0.0};
};

struct EffectiveCouplings {
    std::vector<double> j_eff; // J_m^eff for m = 0..floor(N/2), sum_{n,m} convention
};

struct ConfigClass {
    std::vector<int> signs;  // {+1, -1} per site, or all 0 in the normal phase
    int n_ferro_pairs{0};    // neighboring equal-sign pairs (cyclic)
    int degeneracy{1};       // ground-manifold size
    bool frustrated{false};
};

// Circulant blocks of the quadratic part of the mean-field energy:
// m1 = I + Jbar cos(theta)(S + S^T), m2 = Jbar sin(theta)(S^T - S).
Eigen::MatrixXd circulant_m1(const ModelParams& p);
Eigen::MatrixXd circulant_m2(const ModelParams& p);

// Full mean-field energy in (x, y).
double mf_energy(const ModelParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Stationary y for given x: solves m1 y = m2 x (residual < 1e-12).
Eigen::VectorXd eliminate_y(const ModelParams& p, const Eigen::VectorXd& x);

EffectiveCouplings effective_couplings(const ModelParams& p);

// Symmetric interaction circulant of the eliminated energy (J0 on the
// diagonal, mediated + bare hopping off it); the energy reads
// x.x + x^T C x - (1/2) sum_n sqrt(1 + 4 g^2 x_n^2).
Eigen::MatrixXd interaction_circulant(const ModelParams& p);

// Eliminated-form energy of x alone.
double effective_energy(const ModelParams& p, const Eigen::VectorXd& x);

// Global minimizer by multistart damped Newton: all 2^N sign seeds at the
// uniform-magnitude ansatz plus `restarts` random perturbations (counter-seeded,
// schedule-independent). Lowest-energy stationary point with PSD Hessian wins;
// energy ties within 1e-10 break toward the lexicographically smallest signs.
MeanFieldState minimize(const ModelParams& p, int restarts = 8, std::uint64_t seed = 0);

// Local refinement from a given start (used by boundary bisection and tests).
MeanFieldState refine_from(const ModelParams& p, const Eigen::VectorXd& x0);

ConfigClass classify(const ModelParams& p, const MeanFieldState& state);

// Flux values of first-order boundaries at fixed g, refined to 1e-6.
std::vector<double> first_order_boundary(const ModelParams& p, double g,
                                         double theta_lo = 0.05, double theta_hi = pi - 0.05,
                                         int scan_points = 512);

// minimize + classify for even N.
ConfigClass even_n_frustration_probe(const ModelParams& p, int restarts = 8,
                                     std::uint64_t seed = 0);

} // namespace fluxlat
