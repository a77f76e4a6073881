// npspectrum.hpp - Normal-phase excitation spectra (dense, quartic, Rabi limit)

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "fluxlat/model.hpp"

namespace fluxlat {

struct NormalPhaseUnstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OverCritical : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 8x8 quadratic-form matrix of the {k, -k} pair in the normal phase, basis
// (a_k, b_k, a_{-k}, b_{-k}, a_k^dag, b_k^dag, a_{-k}^dag, b_{-k}^dag).
struct BogoliubovBlock {
    double k{0.0};
    Eigen::Matrix<double, 8, 8> matrix_m;
    // metric I_- = diag(I4, -I4); eigenvalues of metric*matrix_m come in +/- pairs
};

BogoliubovBlock bogoliubov_block(const ModelParams& p, double k);

// Four non-negative branch energies of the pair {k, -k}, sorted ascending.
// Throws NormalPhaseUnstable when the block has gone critical (g > g_c(k)).
std::array<double, 4> np_pair_dense(const ModelParams& p, double k);

// Two branch energies of a self-conjugate momentum (k = 0 or pi).
std::array<double, 2> np_self_conjugate_dense(const ModelParams& p, double k);

struct PairSpectrum {
    double k{0.0};
    bool self_conjugate{false};
    std::vector<double> energies; // 4 per pair, 2 for k in {0, pi}
};

// Spectra of all inequivalent momentum blocks (j = 0..floor(N/2)).
std::vector<PairSpectrum> np_spectrum_dense(const ModelParams& p);

// All 2N normal-phase energies, ascending.
std::vector<double> np_all_energies(const ModelParams& p);

struct QuarticSolution {
    double v_k{0.0};     // selected resolvent-cubic root (alpha^2 of the factorization)
    double x_k{0.0};     // radicand of the first quadratic factor
    double y_k{0.0};     // radicand of the second quadratic factor
    double eps1{0.0};    // the two branch energies attached to momentum k,
    double eps2{0.0};    //   eps1 <= eps2 (eps1 < 0 signals g past g_c(k))
    double delta_k{0.0}; // constant shift (omega_k - omega_{-k})/4
    bool dense_fallback{false}; // set when a near-degenerate radicand forced the dense route
};

// Closed-form branch energies of momentum k via the depressed quartic and its
// resolvent-cubic factorization; valid on both sides of g_c.
QuarticSolution np_spectrum_quartic(const ModelParams& p, double k);

struct RabiSpectrum {
    double energy{0.0};  // sqrt(A_k) + 2*Delta_k
    double squeeze{0.0}; // r_k = (1/8) ln[(w_k+w_{-k})/(w_k+w_{-k}-2 w g^2)]
};

// Adiabatic-elimination (Omega/omega -> infinity) spectrum; omega_atom ignored.
RabiSpectrum rabi_limit_spectrum(const ModelParams& p, double k);

// Per-site normal-phase photon number in the Rabi limit,
// (1/N) sum_k [ c_k/(2 sqrt(A_k)) + 2 sqrt(A_k)/c_k - 2 ], c_k = w_k + w_{-k}.
double np_photon_number(const ModelParams& p);

} // namespace fluxlat
