// model.hpp - Lattice parameters, dispersion, critical couplings and flux critical points

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fluxlat {

inline constexpr double pi = 3.14159265358979323846;

struct ModelParams {
    int n_sites{3};          // lattice size N
    double omega{1.0};       // cavity frequency (sets the energy unit)
    double omega_atom{50.0}; // atomic frequency Omega
    double j_hop{0.1};       // hopping magnitude J >= 0
    double theta{pi / 4};    // flux per link, radians
    double g{0.0};           // dimensionless coupling 2*lambda/sqrt(omega*Omega)

    // Throws std::invalid_argument listing every violated field.
    void validate(bool flux_interior = false) const;
};

struct NoRootInInterval : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Momenta k_j = -2*pi*j/N for j = 0..N-1, canonicalized to (-pi, pi].
std::vector<double> momentum_grid(int n_sites);
double canonical_momentum(double k);

// omega_k = omega + 2J cos(theta - k)
double dispersion(const ModelParams& p, double k);

// Delta_k = (omega_k - omega_{-k})/4 = J sin(theta) sin(k)
double delta_shift(const ModelParams& p, double k);

// g_c(k) = sqrt(2 omega_k omega_{-k} / (omega (omega_k + omega_{-k})))
double critical_coupling(const ModelParams& p, double k);

struct CriticalMode {
    int j{0};                // index of the minimizing k_j = -2*pi*j/N
    double k{0.0};
    double g_c{0.0};
    bool degenerate{false};  // true at a flux critical point (two-mode tie)
    int j_second{-1};
    double k_second{0.0};
};

// Minimizes g_c over j = 0..floor((N-1)/2); ties within 1e-9 flagged degenerate.
CriticalMode critical_mode(const ModelParams& p);

// Root of g_c(k_i) = g_c(k_j) in theta over (0, pi), bracketed at resolution
// pi/1024 and bisected to |g_c(k_i) - g_c(k_j)| < 1e-12.
double flux_critical_point(const ModelParams& p, double k_i, double k_j);

} // namespace fluxlat
