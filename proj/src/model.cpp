#include "fluxlat/model.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace fluxlat {

void ModelParams::validate(bool flux_interior) const {
    std::ostringstream err;
    if (n_sites < 3) {
        err << "n_sites must be >= 3 (got " << n_sites << "); ";
    }
    if (!(omega > 0)) {
        err << "omega must be positive (got " << omega << "); ";
    }
    if (!(omega_atom > 0)) {
        err << "omega_atom must be positive (got " << omega_atom << "); ";
    }
    if (j_hop < 0) {
        err << "j_hop must be non-negative (got " << j_hop << "); ";
    }
    if (!(omega > 2 * j_hop)) {
        err << "omega > 2*j_hop required to keep omega_k positive; ";
    }
    if (g < 0) {
        err << "g must be non-negative (got " << g << "); ";
    }
    if (flux_interior ? !(theta > 0 && theta < pi) : !(theta >= 0 && theta <= pi)) {
        err << "theta must lie in " << (flux_interior ? "(0, pi)" : "[0, pi]")
            << " (got " << theta << "); ";
    }
    std::string msg = err.str();
    if (!msg.empty()) {
        throw std::invalid_argument("invalid ModelParams: " + msg);
    }
}

double canonical_momentum(double k) {
    double x = std::fmod(k, 2 * pi);
    if (x <= -pi) {
        x += 2 * pi;
    } else if (x > pi) {
        x -= 2 * pi;
    }
    return x;
}

std::vector<double> momentum_grid(int n_sites) {
    if (n_sites < 1) {
        throw std::invalid_argument("momentum_grid: n_sites must be positive");
    }
    std::vector<double> ks(n_sites);
    for (int j = 0; j < n_sites; j++) {
        ks[j] = canonical_momentum(-2 * pi * j / n_sites);
    }
    return ks;
}

double dispersion(const ModelParams& p, double k) {
    p.validate();
    return p.omega + 2 * p.j_hop * std::cos(p.theta - k);
}

double delta_shift(const ModelParams& p, double k) {
    return (dispersion(p, k) - dispersion(p, -k)) / 4;
}

double critical_coupling(const ModelParams& p, double k) {
    double a = dispersion(p, k);
    double b = dispersion(p, -k);
    return std::sqrt(2 * a * b / (p.omega * (a + b)));
}

CriticalMode critical_mode(const ModelParams& p) {
    p.validate(true);
    int n_half = (p.n_sites - 1) / 2;
    CriticalMode best;
    best.g_c = std::numeric_limits<double>::infinity();
    std::vector<double> gcs(n_half + 1);
    for (int j = 0; j <= n_half; j++) {
        double k = canonical_momentum(-2 * pi * j / p.n_sites);
        gcs[j] = critical_coupling(p, k);
        if (gcs[j] < best.g_c) {
            best.j = j;
            best.k = k;
            best.g_c = gcs[j];
        }
    }
    for (int j = 0; j <= n_half; j++) {
        if (j != best.j && std::abs(gcs[j] - best.g_c) < 1e-9) {
            best.degenerate = true;
            best.j_second = j;
            best.k_second = canonical_momentum(-2 * pi * j / p.n_sites);
        }
    }
    return best;
}

double flux_critical_point(const ModelParams& p, double k_i, double k_j) {
    if (std::abs(canonical_momentum(k_i) - canonical_momentum(k_j)) < 1e-12) {
        throw std::invalid_argument("flux_critical_point: momenta must differ");
    }
    ModelParams q = p;
    auto f = [&](double th) {
        q.theta = th;
        return critical_coupling(q, k_i) - critical_coupling(q, k_j);
    };
    const int n_scan = 1024;
    double lo = 0, hi = 0, flo = 0;
    bool found = false;
    double prev_th = pi / n_scan * 0.5;
    double prev_f = f(prev_th);
    for (int i = 1; i < n_scan; i++) {
        double th = pi * (i + 0.5) / n_scan;
        double fv = f(th);
        if (prev_f * fv < 0) {
            lo = prev_th;
            hi = th;
            flo = prev_f;
            found = true;
            break;
        }
        prev_th = th;
        prev_f = fv;
    }
    if (!found) {
        throw NoRootInInterval("flux_critical_point: no g_c crossing in (0, pi)");
    }
    for (int it = 0; it < 200; it++) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (std::abs(fm) < 1e-12 && hi - lo < 1e-13) {
            return mid;
        }
        if ((flo <= 0) == (fm <= 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace fluxlat
