#include "fluxlat/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

namespace fluxlat {

namespace {

Eigen::MatrixXd circulant(int n, std::initializer_list<std::pair<int, double>> entries) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (auto [d, v] : entries) {
        for (int i = 0; i < n; i++) {
            m(i, ((i + d) % n + n) % n) += v;
        }
    }
    return m;
}

double sqrt_term(double g, double xi) {
    return std::sqrt(1 + 4 * g * g * xi * xi);
}

Eigen::VectorXd eff_grad(const Eigen::MatrixXd& c, double g, const Eigen::VectorXd& x) {
    Eigen::VectorXd out = 2 * x + 2 * c * x;
    for (int i = 0; i < x.size(); i++) {
        out(i) -= 2 * g * g * x(i) / sqrt_term(g, x(i));
    }
    return out;
}

Eigen::MatrixXd eff_hess(const Eigen::MatrixXd& c, double g, const Eigen::VectorXd& x) {
    int n = static_cast<int>(x.size());
    Eigen::MatrixXd h = 2 * Eigen::MatrixXd::Identity(n, n) + 2 * c;
    for (int i = 0; i < n; i++) {
        double s = sqrt_term(g, x(i));
        h(i, i) += -2 * g * g / s + 8 * std::pow(g, 4) * x(i) * x(i) / (s * s * s);
    }
    return h;
}

double eff_energy(const Eigen::MatrixXd& c, double g, const Eigen::VectorXd& x) {
    double e = x.dot(x) + x.dot(c * x);
    for (int i = 0; i < x.size(); i++) {
        e -= 0.5 * sqrt_term(g, x(i));
    }
    return e;
}

// Damped Newton descent on the eliminated energy; returns the final iterate.
Eigen::VectorXd newton_descent(const Eigen::MatrixXd& c, double g, Eigen::VectorXd x) {
    int n = static_cast<int>(x.size());
    Eigen::MatrixXd reg = 1e-12 * Eigen::MatrixXd::Identity(n, n);
    for (int it = 0; it < 10000; it++) {
        Eigen::VectorXd gv = eff_grad(c, g, x);
        double gn = gv.cwiseAbs().maxCoeff();
        if (gn < 1e-12) {
            break;
        }
        Eigen::MatrixXd h = eff_hess(c, g, x) + reg;
        Eigen::VectorXd dx = h.ldlt().solve(-gv);
        double e0 = eff_energy(c, g, x);
        double slope = gv.dot(dx);
        double t = 1.0;
        Eigen::VectorXd xn;
        for (int ls = 0; ls < 60; ls++) {
            xn = x + t * dx;
            if (eff_energy(c, g, xn) <= e0 + 1e-4 * t * slope ||
                eff_grad(c, g, xn).cwiseAbs().maxCoeff() < gn) {
                break;
            }
            t /= 2;
        }
        x = xn;
    }
    // full-step polish to the precision floor; the loose stop above leaves
    // x-errors that matter for gap computations very close to the boundary
    for (int it = 0; it < 20; it++) {
        Eigen::VectorXd gv = eff_grad(c, g, x);
        double gn = gv.cwiseAbs().maxCoeff();
        if (gn < 1e-15) {
            break;
        }
        Eigen::VectorXd xn = x + (eff_hess(c, g, x) + reg).ldlt().solve(-gv);
        if (eff_grad(c, g, xn).cwiseAbs().maxCoeff() >= gn) {
            break;
        }
        x = xn;
    }
    return x;
}

// Dominant bond index by per-bond strength; the m = n/2 coupling enters the
// circulant energy twice per distinct bond, so it counts double here.
int dominant_bond(const EffectiveCouplings& jm, int n) {
    auto strength = [&](int m) {
        return std::abs(jm.j_eff[m]) * (2 * m == n ? 2.0 : 1.0);
    };
    int mstar = 1;
    for (int m = 2; m < static_cast<int>(jm.j_eff.size()); m++) {
        if (strength(m) > strength(mstar)) {
            mstar = m;
        }
    }
    return mstar;
}

std::vector<int> sign_pattern(const Eigen::VectorXd& x, double tol = 1e-8) {
    std::vector<int> s(x.size());
    for (int i = 0; i < x.size(); i++) {
        s[i] = std::abs(x(i)) < tol ? 0 : (x(i) > 0 ? 1 : -1);
    }
    return s;
}

double min_critical_coupling(const ModelParams& p) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= (p.n_sites - 1) / 2; j++) {
        best = std::min(best, critical_coupling(p, -2 * pi * j / p.n_sites));
    }
    return best;
}

} // namespace

Eigen::MatrixXd circulant_m1(const ModelParams& p) {
    double jc = p.j_hop / p.omega * std::cos(p.theta);
    return circulant(p.n_sites, {{0, 1.0}, {1, jc}, {-1, jc}});
}

Eigen::MatrixXd circulant_m2(const ModelParams& p) {
    double js = p.j_hop / p.omega * std::sin(p.theta);
    return circulant(p.n_sites, {{1, -js}, {-1, js}});
}

double mf_energy(const ModelParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    p.validate();
    if (x.size() != p.n_sites || y.size() != p.n_sites) {
        throw std::invalid_argument("mf_energy: x, y must have length n_sites");
    }
    Eigen::MatrixXd m1 = circulant_m1(p);
    Eigen::MatrixXd m2 = circulant_m2(p);
    double e = x.dot(m1 * x) + y.dot(m1 * y) - 2 * y.dot(m2 * x);
    for (int i = 0; i < p.n_sites; i++) {
        e -= 0.5 * sqrt_term(p.g, x(i));
    }
    return e;
}

Eigen::VectorXd eliminate_y(const ModelParams& p, const Eigen::VectorXd& x) {
    p.validate();
    Eigen::MatrixXd m1 = circulant_m1(p);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m1);
    Eigen::VectorXd rhs = circulant_m2(p) * x;
    Eigen::VectorXd y = lu.solve(rhs);
    if ((m1 * y - rhs).cwiseAbs().maxCoeff() > 1e-12 * (1 + x.cwiseAbs().maxCoeff())) {
        throw SingularCirculant("eliminate_y: circulant solve failed the residual check");
    }
    return y;
}

Eigen::MatrixXd interaction_circulant(const ModelParams& p) {
    Eigen::MatrixXd m1 = circulant_m1(p);
    Eigen::MatrixXd m2 = circulant_m2(p);
    double jc = p.j_hop / p.omega * std::cos(p.theta);
    Eigen::MatrixXd mediated = m2 * m1.partialPivLu().solve(m2);
    return mediated + circulant(p.n_sites, {{1, jc}, {-1, jc}});
}

EffectiveCouplings effective_couplings(const ModelParams& p) {
    p.validate();
    Eigen::MatrixXd c = interaction_circulant(p);
    EffectiveCouplings out;
    int n = p.n_sites;
    for (int m = 0; m <= n / 2; m++) {
        double row0 = c(0, m);
        out.j_eff.push_back(m == 0 || 2 * m == n ? row0 : 2 * row0);
    }
    return out;
}

double effective_energy(const ModelParams& p, const Eigen::VectorXd& x) {
    return eff_energy(interaction_circulant(p), p.g, x);
}

MeanFieldState refine_from(const ModelParams& p, const Eigen::VectorXd& x0) {
    p.validate(true);
    Eigen::MatrixXd c = interaction_circulant(p);
    Eigen::VectorXd x = newton_descent(c, p.g, x0);
    MeanFieldState st;
    st.x = x;
    st.y = eliminate_y(p, x);
    st.energy = mf_energy(p, st.x, st.y);
    st.grad_norm = eff_grad(c, p.g, x).cwiseAbs().maxCoeff();
    st.converged = st.grad_norm < 1e-11;
    for (int i = 0; i < p.n_sites; i++) {
        double th_n = std::acos(-1.0 / sqrt_term(p.g, x(i)));
        double phi_n = x(i) > 0 ? pi : 0.0;
        st.spin_angles.emplace_back(th_n, phi_n);
    }
    return st;
}

MeanFieldState minimize(const ModelParams& p, int restarts, std::uint64_t seed) {
    p.validate(true);
    if (restarts < 1) {
        throw std::invalid_argument("minimize: restarts must be >= 1");
    }
    int n = p.n_sites;
    Eigen::MatrixXd c = interaction_circulant(p);
    double xm = 0.3;
    if (p.g > 1) {
        xm = std::max(0.3, 0.5 / p.g * std::sqrt(std::max(std::pow(p.g, 4) - 1, 0.0)));
    }

    std::vector<Eigen::VectorXd> seeds;
    seeds.push_back(Eigen::VectorXd::Zero(n));
    if (n <= 16) {
        for (int mask = 0; mask < (1 << n); mask++) {
            Eigen::VectorXd s(n);
            for (int i = 0; i < n; i++) {
                s(i) = ((mask >> i) & 1) ? xm : -xm;
            }
            seeds.push_back(s);
        }
    }
    for (int r = 0; r < restarts; r++) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + r + 1);
        std::normal_distribution<double> dist(0.0, xm);
        Eigen::VectorXd s(n);
        for (int i = 0; i < n; i++) {
            s(i) = dist(rng);
        }
        seeds.push_back(s);
    }
    if (n == 3) {
        // warm start from the asymptotic frustrated solution near g_c
        EffectiveCouplings jm = effective_couplings(p);
        double gc2 = 1 + jm.j_eff[0] - jm.j_eff[1] / 2;
        if (gc2 > 0 && p.g > std::sqrt(gc2)) {
            double gc = std::sqrt(gc2);
            double d = p.g - gc;
            double t = 1.0 / (std::sqrt(3.0) * gc);
            double u = t * std::sqrt(d);
            double w = 2 * t * std::sqrt(d);
            for (int rot = 0; rot < 3; rot++) {
                Eigen::VectorXd s(3);
                for (int i = 0; i < 3; i++) {
                    s(i) = (i == rot) ? -w : u;
                }
                seeds.push_back(s);
                seeds.push_back(-s);
            }
        }
    }

    bool have_best = false;
    double best_e = 0;
    Eigen::VectorXd best_x;
    double best_gn = std::numeric_limits<double>::infinity();
    Eigen::VectorXd fallback_x = Eigen::VectorXd::Zero(n);
    for (const auto& s : seeds) {
        Eigen::VectorXd x = newton_descent(c, p.g, s);
        double gn = eff_grad(c, p.g, x).cwiseAbs().maxCoeff();
        double e = eff_energy(c, p.g, x);
        if (gn < best_gn) {
            best_gn = gn;
            fallback_x = x;
        }
        if (gn > 1e-11) {
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(eff_hess(c, p.g, x));
        if (hs.eigenvalues().minCoeff() < -1e-9) {
            continue;
        }
        if (!have_best || e < best_e - 1e-10) {
            have_best = true;
            best_e = e;
            best_x = x;
        } else if (std::abs(e - best_e) <= 1e-10 &&
                   sign_pattern(x) < sign_pattern(best_x)) {
            best_x = x;
        }
    }
    MeanFieldState st = refine_from(p, have_best ? best_x : fallback_x);
    st.converged = have_best;
    return st;
}

ConfigClass classify(const ModelParams& p, const MeanFieldState& state) {
    p.validate(true);
    int n = p.n_sites;
    ConfigClass out;
    double amax = state.x.cwiseAbs().maxCoeff();
    double amin = state.x.cwiseAbs().minCoeff();
    if (amax < 1e-8) {
        out.signs.assign(n, 0);
        return out; // normal phase: unfrustrated, degeneracy 1
    }
    if (amin < 1e-8) {
        throw MixedMagnitudes("classify: some quadratures at numerical zero, others not");
    }
    out.signs = sign_pattern(state.x);
    for (int i = 0; i < n; i++) {
        if (out.signs[i] == out.signs[(i + 1) % n]) {
            out.n_ferro_pairs++;
        }
    }

    // frustration: the dominant effective bond J_{m*} is unsatisfied somewhere
    EffectiveCouplings jm = effective_couplings(p);
    int mstar = dominant_bond(jm, n);
    for (int i = 0; i < n; i++) {
        if (jm.j_eff[mstar] * state.x(i) * state.x((i + mstar) % n) > 0) {
            out.frustrated = true;
            break;
        }
    }

    // degeneracy: distinct sign patterns whose descent ties the global minimum
    Eigen::MatrixXd c = interaction_circulant(p);
    double mag = state.x.cwiseAbs().mean();
    double e_min = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, std::vector<int>>> minima;
    for (int mask = 0; mask < (1 << n); mask++) {
        Eigen::VectorXd s(n);
        for (int i = 0; i < n; i++) {
            s(i) = ((mask >> i) & 1) ? mag : -mag;
        }
        Eigen::VectorXd x = newton_descent(c, p.g, s);
        if (eff_grad(c, p.g, x).cwiseAbs().maxCoeff() > 1e-10 ||
            x.cwiseAbs().minCoeff() < 1e-8) {
            continue;
        }
        double e = eff_energy(c, p.g, x);
        e_min = std::min(e_min, e);
        minima.emplace_back(e, sign_pattern(x));
    }
    std::set<std::vector<int>> tied;
    for (const auto& [e, sg] : minima) {
        if (e <= e_min + 1e-10) {
            tied.insert(sg);
        }
    }
    out.degeneracy = static_cast<int>(tied.size());

    // the tied manifold must contain the whole dihedral x Z2 orbit of the state
    for (int rot = 0; rot < n; rot++) {
        for (int refl = 0; refl < 2; refl++) {
            for (int flip : {1, -1}) {
                std::vector<int> img(n);
                for (int i = 0; i < n; i++) {
                    int src = refl ? ((n - i) % n) : i;
                    img[i] = flip * out.signs[(src + rot) % n];
                }
                if (!tied.count(img)) {
                    throw NonConvergence("classify: symmetry image of the minimizer lost its energy tie");
                }
            }
        }
    }
    return out;
}

namespace {

struct ScanClass {
    bool superradiant{false};
    bool frustrated{false};
    int n_ferro{0};
    double energy{0.0};
    std::vector<int> signs;
};

ScanClass scan_classify(const ModelParams& p) {
    ScanClass out;
    MeanFieldState st = minimize(p, 4, 17);
    out.energy = st.energy;
    if (st.x.cwiseAbs().maxCoeff() < 1e-8) {
        return out;
    }
    out.superradiant = true;
    out.signs = sign_pattern(st.x);
    for (int i = 0; i < p.n_sites; i++) {
        if (out.signs[i] == out.signs[(i + 1) % p.n_sites]) {
            out.n_ferro++;
        }
    }
    EffectiveCouplings jm = effective_couplings(p);
    int mstar = dominant_bond(jm, p.n_sites);
    for (int i = 0; i < p.n_sites; i++) {
        if (jm.j_eff[mstar] * st.x(i) * st.x((i + mstar) % p.n_sites) > 0) {
            out.frustrated = true;
            break;
        }
    }
    return out;
}

// Lowest energy reachable from a given sign pattern at flux theta.
double class_energy(ModelParams q, double theta, const std::vector<int>& signs, double mag) {
    q.theta = theta;
    Eigen::MatrixXd c = interaction_circulant(q);
    Eigen::VectorXd s(q.n_sites);
    for (int i = 0; i < q.n_sites; i++) {
        s(i) = signs[i] * mag;
    }
    Eigen::VectorXd x = newton_descent(c, q.g, s);
    return eff_energy(c, q.g, x);
}

} // namespace

std::vector<double> first_order_boundary(const ModelParams& p, double g,
                                         double theta_lo, double theta_hi, int scan_points) {
    ModelParams q = p;
    q.g = g;
    std::vector<double> boundaries;
    double mag = std::max(0.3, 0.5 / g * std::sqrt(std::max(std::pow(g, 4) - 1, 0.0)));
    ScanClass prev;
    double prev_th = 0;
    bool have_prev = false;
    for (int i = 0; i < scan_points; i++) {
        double th = theta_lo + (theta_hi - theta_lo) * i / (scan_points - 1);
        q.theta = th;
        if (g <= min_critical_coupling(q)) {
            have_prev = false;
            continue;
        }
        ScanClass cur = scan_classify(q);
        if (!cur.superradiant) {
            have_prev = false;
            continue;
        }
        if (have_prev &&
            (cur.frustrated != prev.frustrated || cur.n_ferro != prev.n_ferro)) {
            // refine by bisection on the energy crossing of the two classes
            double lo = prev_th, hi = th;
            auto f = [&](double t) {
                return class_energy(q, t, prev.signs, mag) - class_energy(q, t, cur.signs, mag);
            };
            double flo = f(lo);
            for (int it = 0; it < 60 && hi - lo > 1e-6; it++) {
                double mid = 0.5 * (lo + hi);
                double fm = f(mid);
                if ((flo <= 0) == (fm <= 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            boundaries.push_back(0.5 * (lo + hi));
        }
        prev = cur;
        prev_th = th;
        have_prev = true;
    }
    return boundaries;
}

ConfigClass even_n_frustration_probe(const ModelParams& p, int restarts, std::uint64_t seed) {
    if (p.n_sites % 2 != 0) {
        throw std::invalid_argument("even_n_frustration_probe: n_sites must be even");
    }
    MeanFieldState st = minimize(p, restarts, seed);
    return classify(p, st);
}

} // namespace fluxlat
