#include "fluxlat/npspectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace fluxlat {

namespace {

double lambda_of(const ModelParams& p) {
    return p.g * std::sqrt(p.omega * p.omega_atom) / 2;
}

// Real roots of z^3 + a2 z^2 + a1 z + a0 (trigonometric/Cardano method).
std::vector<double> cubic_real_roots(double a2, double a1, double a0) {
    double p = a1 - a2 * a2 / 3;
    double q = 2 * a2 * a2 * a2 / 27 - a2 * a1 / 3 + a0;
    double shift = -a2 / 3;
    std::vector<double> roots;
    double disc = q * q / 4 + p * p * p / 27;
    if (disc > 0) {
        double sq = std::sqrt(disc);
        double u = std::cbrt(-q / 2 + sq);
        double v = std::cbrt(-q / 2 - sq);
        roots.push_back(shift + u + v);
    } else if (p == 0 && q == 0) {
        roots.push_back(shift);
    } else {
        double m = 2 * std::sqrt(-p / 3);
        double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
        double phi = std::acos(arg) / 3;
        for (int i = 0; i < 3; i++) {
            roots.push_back(shift + m * std::cos(phi - 2 * pi * i / 3));
        }
    }
    return roots;
}

// Real parts of the roots of e^4 + c3 e^3 + c2 e^2 + c1 e + c0 via the
// companion matrix; robust at multiple roots.
std::array<double, 4> quartic_companion_roots(double c3, double c2, double c1, double c0) {
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    comp(0, 3) = -c0;
    comp(1, 3) = -c1;
    comp(2, 3) = -c2;
    comp(3, 3) = -c3;
    comp(1, 0) = comp(2, 1) = comp(3, 2) = 1;
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    std::array<double, 4> out{};
    for (int i = 0; i < 4; i++) {
        out[i] = es.eigenvalues()(i).real();
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

BogoliubovBlock bogoliubov_block(const ModelParams& p, double k) {
    p.validate();
    double lam = lambda_of(p);
    Eigen::Matrix4d m1 = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d m2 = Eigen::Matrix4d::Zero();
    m1(0, 0) = dispersion(p, k);
    m1(1, 1) = p.omega_atom;
    m1(2, 2) = dispersion(p, -k);
    m1(3, 3) = p.omega_atom;
    m1(0, 1) = m1(1, 0) = -lam;
    m1(2, 3) = m1(3, 2) = -lam;
    m2(0, 3) = m2(3, 0) = -lam;
    m2(1, 2) = m2(2, 1) = -lam;
    BogoliubovBlock blk;
    blk.k = canonical_momentum(k);
    blk.matrix_m.topLeftCorner<4, 4>() = m1;
    blk.matrix_m.topRightCorner<4, 4>() = m2;
    blk.matrix_m.bottomLeftCorner<4, 4>() = m2;
    blk.matrix_m.bottomRightCorner<4, 4>() = m1;
    return blk;
}

std::array<double, 4> np_pair_dense(const ModelParams& p, double k) {
    BogoliubovBlock blk = bogoliubov_block(p, k);
    blk.matrix_m = ((blk.matrix_m + blk.matrix_m.transpose()) / 2).eval();
    Eigen::Matrix<double, 8, 8> metric = Eigen::Matrix<double, 8, 8>::Identity();
    metric.diagonal().tail<4>().setConstant(-1);
    Eigen::EigenSolver<Eigen::Matrix<double, 8, 8>> es(metric * blk.matrix_m, true);
    double scale = std::max(p.omega_atom, p.omega);
    std::array<double, 8> ev{};
    for (int i = 0; i < 8; i++) {
        if (std::abs(es.eigenvalues()(i).imag()) > 1e-8 * scale) {
            throw NormalPhaseUnstable("np_pair_dense: complex excitation energy, g beyond g_c(k)");
        }
        ev[i] = es.eigenvalues()(i).real();
    }

    // The physical branch of each +/- eigenvalue pair carries positive
    // symplectic norm v^dag Sigma v; a negative physical energy stays real just
    // past g_c and is invisible to the sorted eigenvalue multiset alone.
    std::vector<double> phys;
    bool ambiguous = false;
    for (int i = 0; i < 8; i++) {
        double sn = 0;
        for (int r = 0; r < 8; r++) {
            sn += metric(r, r) * std::norm(es.eigenvectors()(r, i));
        }
        if (sn > 1e-6) {
            phys.push_back(ev[i]);
        } else if (sn >= -1e-6) {
            ambiguous = true; // soft-mode norms vanish at the boundary
        }
    }
    if (!ambiguous && phys.size() == 4) {
        std::sort(phys.begin(), phys.end());
        if (phys[0] < -1e-10 * scale) {
            throw NormalPhaseUnstable("np_pair_dense: negative branch energy, g beyond g_c(k)");
        }
        std::array<double, 4> out{};
        for (int i = 0; i < 4; i++) {
            out[i] = std::max(phys[i], 0.0);
        }
        return out;
    }

    std::sort(ev.begin(), ev.end());
    std::array<double, 4> out{};
    for (int i = 0; i < 4; i++) {
        if (std::abs(ev[4 + i] + ev[3 - i]) > 1e-7 * scale) {
            throw NormalPhaseUnstable("np_pair_dense: +/- pairing broken, g beyond g_c(k)");
        }
        out[i] = ev[4 + i];
        if (out[i] < 0) {
            if (out[i] < -1e-8 * scale) {
                throw NormalPhaseUnstable("np_pair_dense: negative branch energy");
            }
            out[i] = 0;
        }
    }
    return out;
}

std::array<double, 2> np_self_conjugate_dense(const ModelParams& p, double k) {
    p.validate();
    double wk = dispersion(p, k);
    double W = p.omega_atom;
    double lam = lambda_of(p);
    // eps^2 roots of s^2 - (wk^2+W^2) s + wk^2 W^2 - 4 lam^2 wk W
    double tr = wk * wk + W * W;
    double det = wk * wk * W * W - 4 * lam * lam * wk * W;
    double disc = std::sqrt(std::max(tr * tr / 4 - det, 0.0));
    double lo = tr / 2 - disc;
    double hi = tr / 2 + disc;
    if (lo < -1e-10 * W * W) {
        throw NormalPhaseUnstable("np_self_conjugate_dense: squared energy negative, g beyond g_c(k)");
    }
    return {std::sqrt(std::max(lo, 0.0)), std::sqrt(hi)};
}

std::vector<PairSpectrum> np_spectrum_dense(const ModelParams& p) {
    p.validate();
    std::vector<PairSpectrum> out;
    for (int j = 0; j <= p.n_sites / 2; j++) {
        double k = canonical_momentum(-2 * pi * j / p.n_sites);
        PairSpectrum ps;
        ps.k = k;
        ps.self_conjugate = (j == 0) || (2 * j == p.n_sites);
        if (ps.self_conjugate) {
            auto e = np_self_conjugate_dense(p, k);
            ps.energies.assign(e.begin(), e.end());
        } else {
            auto e = np_pair_dense(p, k);
            ps.energies.assign(e.begin(), e.end());
        }
        out.push_back(std::move(ps));
    }
    return out;
}

std::vector<double> np_all_energies(const ModelParams& p) {
    std::vector<double> all;
    for (const auto& ps : np_spectrum_dense(p)) {
        all.insert(all.end(), ps.energies.begin(), ps.energies.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

QuarticSolution np_spectrum_quartic(const ModelParams& p, double k) {
    p.validate();
    double a = dispersion(p, k);
    double b = dispersion(p, -k);
    double W = p.omega_atom;
    double dw = a - b;
    double c3 = -dw;
    double c2 = -(W * W + a * b);
    double c1 = dw * W * W;
    double c0 = W * W * (a * b - 0.5 * p.g * p.g * p.omega * (a + b));

    QuarticSolution sol;
    sol.delta_k = dw / 4;

    // depress: eps = u + s removes the cubic term
    double s = dw / 4;
    double dp = 6 * s * s + 3 * c3 * s + c2;
    double dq = 4 * s * s * s + 3 * c3 * s * s + 2 * c2 * s + c1;
    double dr = ((s + c3) * s + c2) * s * s + c1 * s + c0;

    // factor u^4 + dp u^2 + dq u + dr = (u^2 + al u + be)(u^2 - al u + ga),
    // z = al^2 the largest real root of the resolvent cubic
    auto zroots = cubic_real_roots(2 * dp, dp * dp - 4 * dr, -dq * dq);
    double z = *std::max_element(zroots.begin(), zroots.end());
    z = std::max(z, 0.0);
    sol.v_k = z;

    double scale2 = std::max(1.0, dp * dp);
    double al = std::sqrt(z);
    double be, ga;
    if (al > 1e-9 * std::sqrt(scale2)) {
        be = (dp + z - dq / al) / 2;
        ga = (dp + z + dq / al) / 2;
    } else {
        // symmetric quartic (k = 0 or theta in {0, pi}): biquadratic split
        al = 0;
        double disc = std::sqrt(std::max(dp * dp - 4 * dr, 0.0));
        be = (dp - disc) / 2;
        ga = (dp + disc) / 2;
    }
    sol.x_k = al * al - 4 * be;
    sol.y_k = al * al - 4 * ga;

    std::array<double, 4> roots{};
    if (std::min(std::abs(sol.x_k), std::abs(sol.y_k)) < 1e-12 * scale2) {
        roots = quartic_companion_roots(c3, c2, c1, c0);
        sol.dense_fallback = true;
    } else if (sol.x_k >= 0 && sol.y_k >= 0) {
        roots = {(-al - std::sqrt(sol.x_k)) / 2 + s, (-al + std::sqrt(sol.x_k)) / 2 + s,
                 (al - std::sqrt(sol.y_k)) / 2 + s, (al + std::sqrt(sol.y_k)) / 2 + s};
        std::sort(roots.begin(), roots.end());
    } else {
        // complex quartet appears only past the instability; keep real parts
        roots = quartic_companion_roots(c3, c2, c1, c0);
        sol.dense_fallback = true;
    }
    sol.eps1 = roots[2];
    sol.eps2 = roots[3];
    return sol;
}

RabiSpectrum rabi_limit_spectrum(const ModelParams& p, double k) {
    p.validate();
    double c = dispersion(p, k) + dispersion(p, -k);
    double ak = c * c / 4 - c * p.omega * p.g * p.g / 2;
    if (ak < 0) {
        throw OverCritical("rabi_limit_spectrum: A_k < 0, g beyond the Rabi-limit instability");
    }
    RabiSpectrum out;
    out.energy = std::sqrt(ak) + 2 * delta_shift(p, k);
    out.squeeze = std::log(c / (c - 2 * p.omega * p.g * p.g)) / 8;
    return out;
}

double np_photon_number(const ModelParams& p) {
    p.validate();
    double sum = 0;
    for (double k : momentum_grid(p.n_sites)) {
        double c = dispersion(p, k) + dispersion(p, -k);
        double ak = c * c / 4 - c * p.omega * p.g * p.g / 2;
        if (ak <= 0) {
            throw OverCritical("np_photon_number: A_k <= 0, g beyond the Rabi-limit instability");
        }
        double sq = std::sqrt(ak);
        sum += c / (2 * sq) + 2 * sq / c - 2;
    }
    // per-site <a^dag a>; the 1/4 follows from <q^2> + <p^2> of the squeezed modes
    return sum / (4 * p.n_sites);
}

} // namespace fluxlat
