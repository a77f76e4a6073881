#include "fluxlat/criticality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace fluxlat {

ScalingFit loglog_fit(const std::vector<std::pair<double, double>>& delta_value) {
    std::vector<std::pair<double, double>> pts;
    for (auto [d, v] : delta_value) {
        if (d > 0 && v > 0 && std::isfinite(v)) {
            pts.emplace_back(std::log(d), std::log(v));
        }
    }
    if (pts.size() < 2) {
        throw std::invalid_argument("loglog_fit: need at least 2 usable points");
    }
    double n = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    double mean_y = sy / n;
    for (auto [x, y] : pts) {
        double r = y - (intercept + slope * x);
        ss_res += r * r;
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    ScalingFit fit;
    fit.exponent = slope;
    fit.prefactor = std::exp(intercept);
    fit.r_squared = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
    auto [dmin, dmax] = std::minmax_element(delta_value.begin(), delta_value.end());
    fit.window_lo = dmin->first;
    fit.window_hi = dmax->first;
    return fit;
}

ScalingFit fit_exponent(const std::vector<std::pair<double, double>>& series,
                        double g_c, Side side) {
    std::vector<std::pair<double, double>> pts;
    for (auto [g, v] : series) {
        double d = side == Side::below ? g_c - g : g - g_c;
        if (d > 0) {
            pts.emplace_back(d, v);
        }
    }
    if (pts.size() < 12) {
        throw std::invalid_argument("fit_exponent: need >= 12 points on the requested side");
    }
    auto [dmin, dmax] = std::minmax_element(pts.begin(), pts.end());
    if (dmax->first < 100 * dmin->first) {
        throw std::invalid_argument("fit_exponent: window must span >= 2 decades");
    }
    ScalingFit fit = loglog_fit(pts);
    fit.side = side;
    if (fit.r_squared < 0.999) {
        throw PoorFit("fit_exponent: r^2 below 0.999, adjust the window");
    }
    return fit;
}

double np_gap(const ModelParams& p) {
    double best = std::numeric_limits<double>::infinity();
    double best_k = 0;
    bool self_conj = true;
    for (const auto& ps : np_spectrum_dense(p)) {
        double mn = *std::min_element(ps.energies.begin(), ps.energies.end());
        if (mn < best) {
            best = mn;
            best_k = ps.k;
            self_conj = ps.self_conjugate;
        }
    }
    if (best < 1e-6 && !self_conj) {
        QuarticSolution sol = np_spectrum_quartic(p, best_k);
        QuarticSolution mirror = np_spectrum_quartic(p, -best_k);
        best = std::max(std::min(sol.eps1, mirror.eps1), 0.0);
    }
    return best;
}

double sp_gap(const ModelParams& p, int restarts, std::uint64_t seed) {
    MeanFieldState st = minimize(p, restarts, seed);
    QuadraticForm form = build_quadratic(p, st);
    try {
        return symplectic_energies_cholesky(form.h).minCoeff();
    } catch (const NotPositiveDefinite&) {
        return symplectic_diagonalize(form).gap;
    }
}

double locate_gc(const ModelParams& p) {
    ModelParams q = p;
    q.validate(true);
    CriticalMode cm = critical_mode(q);
    auto stable = [&](double g) {
        q.g = g;
        try {
            np_spectrum_dense(q);
            return true;
        } catch (const NormalPhaseUnstable&) {
            return false;
        }
    };
    double lo = cm.g_c * 0.9;
    double hi = cm.g_c * 1.1;
    while (!stable(lo)) {
        lo *= 0.9;
    }
    while (stable(hi)) {
        hi *= 1.1;
    }
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        (stable(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> gap_series(const ModelParams& p, double g_c,
                                                  Side side, double window_lo,
                                                  double window_hi, int n_points) {
    std::vector<std::pair<double, double>> out;
    ModelParams q = p;
    for (int i = 0; i < n_points; i++) {
        double frac = n_points == 1 ? 0.0 : static_cast<double>(i) / (n_points - 1);
        double delta = window_lo * std::pow(window_hi / window_lo, frac);
        q.g = side == Side::below ? g_c * (1 - delta) : g_c * (1 + delta);
        double gap = side == Side::below ? np_gap(q) : sp_gap(q);
        out.emplace_back(q.g, gap);
    }
    return out;
}

std::vector<BoundaryPoint> trace_continuous_boundary(const ModelParams& p,
                                                     const std::vector<double>& thetas) {
    std::vector<BoundaryPoint> out;
    ModelParams q = p;
    int prev_j = -1;
    for (double th : thetas) {
        q.theta = th;
        CriticalMode cm = critical_mode(q);
        BoundaryPoint bp;
        bp.theta = th;
        bp.g_c = cm.g_c;
        bp.critical_j = cm.j;
        bp.critical_k = cm.k;
        bp.kink = prev_j >= 0 && cm.j != prev_j;
        prev_j = cm.j;
        out.push_back(bp);
    }
    return out;
}

namespace {

// Gap of one momentum block in the normal phase.
double block_gap(const ModelParams& p, int j) {
    double k = canonical_momentum(-2 * pi * j / p.n_sites);
    if (j == 0 || 2 * j == p.n_sites) {
        auto e = np_self_conjugate_dense(p, k);
        return e[0];
    }
    auto e = np_pair_dense(p, k);
    double gap = e[0];
    if (gap < 1e-6) {
        gap = std::max(std::min(np_spectrum_quartic(p, k).eps1,
                                np_spectrum_quartic(p, -k).eps1), 0.0);
    }
    return gap;
}

} // namespace

MulticriticalReport multicritical_report(const ModelParams& p, double theta_c) {
    ModelParams q = p;
    q.theta = theta_c;
    q.validate(true);
    MulticriticalReport rep;
    rep.theta_c = theta_c;

    // the two modes with the smallest critical couplings
    int n_half = (q.n_sites - 1) / 2;
    std::vector<std::pair<double, int>> ranked;
    for (int j = 0; j <= n_half; j++) {
        ranked.emplace_back(critical_coupling(q, -2 * pi * j / q.n_sites), j);
    }
    std::sort(ranked.begin(), ranked.end());
    rep.g_c = ranked[0].first;
    if (ranked.size() < 2 || std::abs(ranked[1].first - ranked[0].first) > 1e-6) {
        throw std::invalid_argument("multicritical_report: theta_c is not a flux critical point");
    }

    for (int m = 0; m < 2; m++) {
        int j = ranked[m].second;
        std::vector<std::pair<double, double>> series;
        const int n_pts = 25;
        for (int i = 0; i < n_pts; i++) {
            double delta = 1e-5 * std::pow(1e3, static_cast<double>(i) / (n_pts - 1));
            q.g = rep.g_c * (1 - delta);
            series.emplace_back(q.g, block_gap(q, j));
        }
        ScalingFit fit = fit_exponent(series, rep.g_c, Side::below);
        ModeScaling ms;
        ms.k = canonical_momentum(-2 * pi * j / q.n_sites);
        ms.exponent = fit.exponent;
        ms.r_squared = fit.r_squared;
        rep.modes.push_back(ms);
    }

    // tricritical geometry: the first-order line must end at (theta_c, g_c)
    q.g = rep.g_c;
    double theta_margin = 0.35;
    auto fol = first_order_boundary(q, rep.g_c * 1.05,
                                    std::max(0.05, theta_c - theta_margin),
                                    std::min(pi - 0.05, theta_c + theta_margin), 160);
    for (double th : fol) {
        if (std::abs(th - theta_c) < 0.05) {
            rep.first_order_terminates = true;
            rep.first_order_theta = th;
        }
    }

    q.g = rep.g_c * 1.3;
    rep.boundary_degeneracy = classify(q, minimize(q)).degeneracy;
    return rep;
}

std::string to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::NP: return "NP";
        case PhaseLabel::ANP: return "ANP";
        case PhaseLabel::SP: return "SP";
        case PhaseLabel::FSP: return "FSP";
    }
    return "?";
}

PhaseCell classify_cell(const ModelParams& p, bool with_observables) {
    PhaseCell cell;
    cell.theta = p.theta;
    cell.g = p.g;
    try {
        p.validate(true);
        CriticalMode cm = critical_mode(p);
        cell.critical_k_index = cm.j;
        cell.critical_k = cm.k;
        if (p.g < cm.g_c) {
            cell.label = cm.j == 0 ? PhaseLabel::NP : PhaseLabel::ANP;
            cell.gap = np_gap(p);
            cell.energy = -0.5 * p.n_sites;
            cell.config.signs.assign(p.n_sites, 0);
            if (with_observables) {
                MeanFieldState trivial;
                trivial.x = Eigen::VectorXd::Zero(p.n_sites);
                trivial.y = Eigen::VectorXd::Zero(p.n_sites);
                trivial.energy = -0.5 * p.n_sites;
                trivial.converged = true;
                try {
                    cell.site_observables = observables(build_quadratic(p, trivial));
                } catch (const NotPositiveDefinite&) {
                    // exactly critical cell: no Gaussian ground state
                }
            }
        } else {
            MeanFieldState st = minimize(p);
            cell.config = classify(p, st);
            cell.label = cell.config.frustrated ? PhaseLabel::FSP : PhaseLabel::SP;
            cell.energy = st.energy;
            QuadraticForm form = build_quadratic(p, st);
            try {
                cell.gap = symplectic_energies_cholesky(form.h).minCoeff();
            } catch (const NotPositiveDefinite&) {
                cell.gap = symplectic_diagonalize(form).gap;
            }
            if (with_observables) {
                try {
                    cell.site_observables = observables(form);
                } catch (const NotPositiveDefinite&) {
                    // exactly critical cell: no Gaussian ground state
                }
            }
        }
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

std::vector<PhaseCell> sweep_cells(const ModelParams& p, const std::vector<double>& thetas,
                                   const std::vector<double>& gs, int threads,
                                   bool with_observables) {
    std::vector<PhaseCell> cells(thetas.size() * gs.size());
    std::atomic<std::size_t> next{0};
    if (threads < 1) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        threads = std::max(threads, 1);
    }
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) {
                return;
            }
            ModelParams q = p;
            q.theta = thetas[i / gs.size()];
            q.g = gs[i % gs.size()];
            cells[i] = classify_cell(q, with_observables);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; t++) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    return cells;
}

} // namespace fluxlat
