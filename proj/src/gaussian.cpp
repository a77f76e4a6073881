#include "fluxlat/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace fluxlat {

Eigen::MatrixXd symplectic_form(int n_modes) {
    Eigen::MatrixXd o = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    for (int m = 0; m < n_modes; m++) {
        o(2 * m, 2 * m + 1) = 1;
        o(2 * m + 1, 2 * m) = -1;
    }
    return o;
}

QuadraticForm build_quadratic(const ModelParams& p, const MeanFieldState& state) {
    p.validate();
    if (!state.converged) {
        throw UnconvergedState("build_quadratic: mean-field state did not converge");
    }
    if (state.x.size() != p.n_sites) {
        throw std::invalid_argument("build_quadratic: state size mismatch");
    }
    int n = p.n_sites;
    double lam = p.g * std::sqrt(p.omega * p.omega_atom) / 2;
    double jc = p.j_hop * std::cos(p.theta);
    double js = p.j_hop * std::sin(p.theta);
    QuadraticForm form;
    form.h = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    form.offset = state.energy;
    auto& h = form.h;
    for (int site = 0; site < n; site++) {
        double xn = state.x(site);
        double s = std::sqrt(1 + 4 * p.g * p.g * xn * xn);
        double w_eff = p.omega_atom * s;
        double lam_eff = lam * (xn < 0 ? -1.0 : 1.0) / s;
        int i = 4 * site;
        int m = 4 * ((site + 1) % n);
        h(i, i) = p.omega;
        h(i + 1, i + 1) = p.omega;
        h(i + 2, i + 2) = w_eff;
        h(i + 3, i + 3) = w_eff;
        h(i, i + 2) = h(i + 2, i) = 2 * lam_eff;
        // photon hopping: J cos(theta)(q_n q_{n+1} + p_n p_{n+1})
        //              + J sin(theta)(q_{n+1} p_n - q_n p_{n+1})
        h(i, m) += jc;
        h(m, i) += jc;
        h(i + 1, m + 1) += jc;
        h(m + 1, i + 1) += jc;
        h(m, i + 1) += js;
        h(i + 1, m) += js;
        h(i, m + 1) -= js;
        h(m + 1, i) -= js;
    }
    return form;
}

SymplecticSpectrum symplectic_diagonalize(const QuadraticForm& form) {
    const Eigen::MatrixXd& h = form.h;
    int dim = static_cast<int>(h.rows());
    if (dim % 4 != 0 || h.cols() != dim) {
        throw std::invalid_argument("symplectic_diagonalize: form must be 4N x 4N");
    }
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-10 * h.cwiseAbs().maxCoeff()) {
        throw std::invalid_argument("symplectic_diagonalize: form must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hev(h, Eigen::EigenvaluesOnly);
    double scale = hev.eigenvalues().cwiseAbs().maxCoeff();
    double min_ev = hev.eigenvalues().minCoeff();
    if (min_ev < -1e-8 * scale) {
        throw NotPositiveDefinite("symplectic_diagonalize: form is indefinite");
    }
    bool definite = min_ev > 1e-12 * scale;

    Eigen::MatrixXd omega = symplectic_form(dim / 2);
    Eigen::EigenSolver<Eigen::MatrixXd> es(omega * h, definite);

    std::vector<int> idx;
    for (int i = 0; i < dim; i++) {
        if (es.eigenvalues()(i).imag() > 0) {
            idx.push_back(i);
        }
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return es.eigenvalues()(a).imag() < es.eigenvalues()(b).imag();
    });

    SymplecticSpectrum spec;
    if (static_cast<int>(idx.size()) != dim / 2 || !definite) {
        // semidefinite (or zero-mode) input: energies only, from |Im| pairing
        Eigen::VectorXd mags(dim);
        for (int i = 0; i < dim; i++) {
            mags(i) = std::abs(es.eigenvalues()(i).imag());
        }
        std::sort(mags.data(), mags.data() + dim);
        spec.energies.resize(dim / 2);
        for (int m = 0; m < dim / 2; m++) {
            spec.energies(m) = mags(2 * m);
        }
        spec.gap = spec.energies(0);
        spec.converged = false;
        return spec;
    }

    spec.energies.resize(dim / 2);
    for (int m = 0; m < dim / 2; m++) {
        spec.energies(m) = es.eigenvalues()(idx[m]).imag();
    }
    spec.gap = spec.energies(0);

    // group near-degenerate modes and orthonormalize in the <v, w>_h metric
    Eigen::MatrixXcd vecs(dim, dim / 2);
    for (int m = 0; m < dim / 2; m++) {
        vecs.col(m) = es.eigenvectors().col(idx[m]);
    }
    Eigen::MatrixXd t(dim, dim);
    int col = 0;
    int grp_start = 0;
    for (int m = 1; m <= dim / 2; m++) {
        bool boundary = (m == dim / 2) ||
            std::abs(spec.energies(m) - spec.energies(grp_start)) >
                1e-8 * (1 + std::abs(spec.energies(grp_start)));
        if (!boundary) {
            continue;
        }
        std::vector<Eigen::VectorXcd> basis;
        for (int i = grp_start; i < m; i++) {
            Eigen::VectorXcd v = vecs.col(i);
            for (const auto& u : basis) {
                std::complex<double> num = u.adjoint() * h * v;
                std::complex<double> den = u.adjoint() * h * u;
                v -= u * (num / den);
            }
            basis.push_back(v);
        }
        for (const auto& v : basis) {
            Eigen::VectorXd a = v.real();
            Eigen::VectorXd b = v.imag();
            double sgn = a.dot(omega * b);
            if (sgn < 0) {
                b = -b;
                sgn = -sgn;
            }
            double norm = std::sqrt(sgn);
            t.col(col++) = a / norm;
            t.col(col++) = b / norm;
        }
        grp_start = m;
    }
    spec.s = t.transpose();

    double symp_err = (spec.s * omega * spec.s.transpose() - omega).cwiseAbs().maxCoeff();
    Eigen::MatrixXd d = spec.s * h * spec.s.transpose();
    Eigen::MatrixXd off = d - Eigen::MatrixXd(d.diagonal().asDiagonal());
    spec.converged = symp_err < 1e-8 && off.cwiseAbs().maxCoeff() < 1e-8 * scale;
    return spec;
}

Eigen::VectorXd symplectic_energies_cholesky(const Eigen::MatrixXd& h) {
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("symplectic_energies_cholesky: form is not positive definite");
    }
    int dim = static_cast<int>(h.rows());
    Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd a = l.transpose() * symplectic_form(dim / 2) * l;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    Eigen::VectorXd mags(dim);
    for (int i = 0; i < dim; i++) {
        mags(i) = std::abs(es.eigenvalues()(i).imag());
    }
    std::sort(mags.data(), mags.data() + dim);
    Eigen::VectorXd out(dim / 2);
    for (int m = 0; m < dim / 2; m++) {
        out(m) = mags(2 * m);
    }
    return out;
}

Eigen::MatrixXd covariance_cholesky(const Eigen::MatrixXd& h) {
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("covariance_cholesky: form is not positive definite");
    }
    int dim = static_cast<int>(h.rows());
    Eigen::MatrixXd omega = symplectic_form(dim / 2);
    Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd a = l.transpose() * omega * l; // real skew-symmetric
    // C = (1/2) Omega^T L |A|^{-1} L^T Omega with |A| = sqrt(-A^2); the Schur
    // form of a skew matrix is block diagonal with [[0, e], [-e, 0]] blocks,
    // so |A|^{-1} = U diag(1/e) U^T with U orthogonal. Stable arbitrarily
    // close to the boundary, unlike inverting the eigenvector matrix.
    Eigen::RealSchur<Eigen::MatrixXd> schur(a);
    const Eigen::MatrixXd& u = schur.matrixU();
    const Eigen::MatrixXd& t = schur.matrixT();
    Eigen::VectorXd inv_abs(dim);
    for (int i = 0; i < dim; i += 2) {
        double e = std::abs(t(i, i + 1) - t(i + 1, i)) / 2;
        if (!(e > 0)) {
            throw NotPositiveDefinite("covariance_cholesky: zero mode in the skew form");
        }
        inv_abs(i) = inv_abs(i + 1) = 1 / e;
    }
    Eigen::MatrixXd core = u * inv_abs.asDiagonal() * u.transpose();
    Eigen::MatrixXd lo = l.transpose() * omega;
    return 0.5 * lo.transpose() * core * lo;
}

Eigen::MatrixXd covariance(const SymplecticSpectrum& spec) {
    if (!spec.converged || spec.s.size() == 0) {
        throw NotPositiveDefinite("covariance: no converged symplectic transform available");
    }
    return 0.5 * (spec.s.transpose() * spec.s);
}

namespace {

std::vector<SiteObservables> observables_of(const Eigen::MatrixXd& c, double gap) {
    int n = static_cast<int>(c.rows()) / 4;
    bool near_critical = gap < 1e-6;
    std::vector<SiteObservables> out(n);
    for (int site = 0; site < n; site++) {
        int i = 4 * site;
        out[site].photon_number = 0.5 * (c(i, i) + c(i + 1, i + 1) - 1);
        Eigen::Matrix4d block = 2 * c.block<4, 4>(i, i);
        out[site].entanglement = 0.5 * std::log(block.determinant());
        out[site].diverged = near_critical;
    }
    return out;
}

} // namespace

std::vector<SiteObservables> observables(const SymplecticSpectrum& spec) {
    return observables_of(covariance(spec), spec.gap);
}

std::vector<SiteObservables> observables(const QuadraticForm& form) {
    double gap = symplectic_energies_cholesky(form.h).minCoeff();
    return observables_of(covariance_cholesky(form.h), gap);
}

} // namespace fluxlat
