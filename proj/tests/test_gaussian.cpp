#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fluxlat/gaussian.hpp"
#include "fluxlat/meanfield.hpp"
#include "fluxlat/model.hpp"
#include "fluxlat/npspectrum.hpp"

using namespace fluxlat;

namespace {

ModelParams base(int n, double theta, double g) {
    ModelParams p;
    p.n_sites = n;
    p.theta = theta;
    p.g = g;
    return p;
}

MeanFieldState trivial_state(int n) {
    MeanFieldState st;
    st.x = Eigen::VectorXd::Zero(n);
    st.y = Eigen::VectorXd::Zero(n);
    st.energy = -0.5 * n;
    st.converged = true;
    return st;
}

double min_gc(const ModelParams& p) {
    double best = 1e300;
    for (int j = 0; j <= (p.n_sites - 1) / 2; j++) {
        best = std::min(best, critical_coupling(p, -2 * pi * j / p.n_sites));
    }
    return best;
}

} // namespace

TEST_CASE("single oscillator: energy and identity transform") {
    QuadraticForm form;
    form.h = Eigen::MatrixXd::Zero(4, 4);
    form.h.diagonal() << 0.7, 0.7, 2.0, 2.0;
    SymplecticSpectrum spec = symplectic_diagonalize(form);
    REQUIRE(spec.converged);
    CHECK(spec.energies(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(spec.energies(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((spec.s - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("two-mode squeezing and beam-splitter closed forms") {
    double w = 1.3, lam = 0.4;
    QuadraticForm sq;
    sq.h = Eigen::MatrixXd::Zero(4, 4);
    sq.h.diagonal().setConstant(w);
    sq.h(0, 2) = sq.h(2, 0) = lam;  // q1 q2
    sq.h(1, 3) = sq.h(3, 1) = -lam; // -p1 p2
    SymplecticSpectrum s1 = symplectic_diagonalize(sq);
    REQUIRE(s1.converged);
    double eps = std::sqrt(w * w - lam * lam);
    CHECK(s1.energies(0) == doctest::Approx(eps).epsilon(1e-10));
    CHECK(s1.energies(1) == doctest::Approx(eps).epsilon(1e-10));

    QuadraticForm bs;
    bs.h = sq.h;
    bs.h(1, 3) = bs.h(3, 1) = lam; // beam splitter instead
    SymplecticSpectrum s2 = symplectic_diagonalize(bs);
    REQUIRE(s2.converged);
    CHECK(s2.energies(0) == doctest::Approx(w - lam).epsilon(1e-10));
    CHECK(s2.energies(1) == doctest::Approx(w + lam).epsilon(1e-10));

    // Cholesky route agrees
    auto e1 = symplectic_energies_cholesky(sq.h);
    CHECK(e1(0) == doctest::Approx(eps).epsilon(1e-10));
    CHECK(e1(1) == doctest::Approx(eps).epsilon(1e-10));
}

TEST_CASE("normal-phase form reproduces the momentum-space spectrum") {
    for (double g_frac : {0.0, 0.5, 0.9}) {
        for (int n : {3, 4, 5}) {
            ModelParams p = base(n, 1.1, 0.0);
            p.g = g_frac * min_gc(p);
            QuadraticForm form = build_quadratic(p, trivial_state(n));
            SymplecticSpectrum spec = symplectic_diagonalize(form);
            REQUIRE(spec.converged);
            auto expect = np_all_energies(p);
            REQUIRE(spec.energies.size() == static_cast<int>(expect.size()));
            for (int i = 0; i < spec.energies.size(); i++) {
                CHECK(std::abs(spec.energies(i) - expect[i]) < 1e-9);
            }
        }
    }
}

TEST_CASE("decoupled limit has bare oscillator energies") {
    ModelParams p = base(3, 1.1, 0.0);
    auto spec = symplectic_diagonalize(build_quadratic(p, trivial_state(3)));
    std::vector<double> expect;
    for (double k : momentum_grid(3)) {
        expect.push_back(dispersion(p, k));
    }
    expect.insert(expect.end(), 3, p.omega_atom);
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 6; i++) {
        CHECK(spec.energies(i) == doctest::Approx(expect[i]).epsilon(1e-10));
    }
}

TEST_CASE("symplectic invariants and purity hold everywhere converged") {
    for (double th : {pi / 4, 3 * pi / 4}) {
        for (double frac : {0.5, 1.2, 1.5}) {
            ModelParams p = base(3, th, 0.0);
            p.g = frac * min_gc(p);
            MeanFieldState st = frac < 1 ? trivial_state(3) : minimize(p);
            auto spec = symplectic_diagonalize(build_quadratic(p, st));
            REQUIRE(spec.converged);
            Eigen::MatrixXd omega = symplectic_form(6);
            CHECK((spec.s * omega * spec.s.transpose() - omega).cwiseAbs().maxCoeff() < 1e-8);
            Eigen::MatrixXd c = covariance(spec);
            Eigen::EigenSolver<Eigen::MatrixXd> es(omega * c, false);
            for (int i = 0; i < 12; i++) {
                CHECK(std::abs(std::abs(es.eigenvalues()(i).imag()) - 0.5) < 1e-8);
            }
        }
    }
}

TEST_CASE("superradiant spectrum is gapped away from criticality") {
    ModelParams p = base(3, pi / 4, 0.0);
    p.g = 1.2 * min_gc(p);
    MeanFieldState st = minimize(p);
    auto spec = symplectic_diagonalize(build_quadratic(p, st));
    REQUIRE(spec.converged);
    CHECK(spec.gap > 1e-3);
    CHECK(spec.energies.minCoeff() == doctest::Approx(spec.gap));
    // Cholesky oracle agrees with the eigen route
    auto chol = symplectic_energies_cholesky(build_quadratic(p, st).h);
    for (int i = 0; i < spec.energies.size(); i++) {
        CHECK(std::abs(spec.energies(i) - chol(i)) < 1e-9);
    }
}

TEST_CASE("unconverged states are rejected") {
    ModelParams p = base(3, pi / 4, 0.5);
    MeanFieldState st = trivial_state(3);
    st.converged = false;
    CHECK_THROWS_AS(build_quadratic(p, st), UnconvergedState);
}

TEST_CASE("indefinite and semidefinite forms") {
    QuadraticForm form;
    form.h = Eigen::MatrixXd::Zero(4, 4);
    form.h.diagonal() << 1.0, 1.0, -0.5, -0.5;
    CHECK_THROWS_AS(symplectic_diagonalize(form), NotPositiveDefinite);
    CHECK_THROWS_AS(symplectic_energies_cholesky(form.h), NotPositiveDefinite);

    // exactly critical normal-phase form: energies only
    ModelParams p = base(3, pi / 4, 0.0);
    p.g = min_gc(p);
    auto spec = symplectic_diagonalize(build_quadratic(p, trivial_state(3)));
    CHECK_FALSE(spec.converged);
    CHECK(spec.gap < 1e-4);
    CHECK(spec.energies.size() == 6);
}

TEST_CASE("coupling sign at vanishing order parameter does not affect the spectrum") {
    ModelParams p = base(3, pi / 4, 0.6);
    MeanFieldState plus = trivial_state(3);
    MeanFieldState minus = trivial_state(3);
    minus.x = Eigen::VectorXd::Constant(3, -0.0); // negative zero picks the other lambda sign
    auto e1 = symplectic_diagonalize(build_quadratic(p, plus)).energies;
    auto e2 = symplectic_diagonalize(build_quadratic(p, minus)).energies;
    CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Schur-route covariance matches the transform route") {
    for (double th : {pi / 4, 3 * pi / 4}) {
        for (double frac : {0.5, 1.3}) {
            ModelParams p = base(3, th, 0.0);
            p.g = frac * min_gc(p);
            MeanFieldState st = frac < 1 ? trivial_state(3) : minimize(p);
            QuadraticForm form = build_quadratic(p, st);
            auto spec = symplectic_diagonalize(form);
            REQUIRE(spec.converged);
            Eigen::MatrixXd c1 = covariance(spec);
            Eigen::MatrixXd c2 = covariance_cholesky(form.h);
            CHECK((c1 - c2).cwiseAbs().maxCoeff() < 1e-8);
            auto o1 = observables(spec);
            auto o2 = observables(form);
            for (int n = 0; n < 3; n++) {
                CHECK(std::abs(o1[n].photon_number - o2[n].photon_number) < 1e-8);
                CHECK(std::abs(o1[n].entanglement - o2[n].entanglement) < 1e-8);
            }
        }
    }
    // single oscillator closed form
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
    h.diagonal() << 0.5, 2.0, 3.0, 3.0;
    Eigen::MatrixXd c = covariance_cholesky(h);
    CHECK(c(0, 0) == doctest::Approx(0.5 * std::sqrt(2.0 / 0.5)).epsilon(1e-12));
    CHECK(c(1, 1) == doctest::Approx(0.5 * std::sqrt(0.5 / 2.0)).epsilon(1e-12));
}

TEST_CASE("vacuum observables vanish") {
    ModelParams p = base(3, pi / 4, 0.0);
    auto obs = observables(symplectic_diagonalize(build_quadratic(p, trivial_state(3))));
    for (const auto& o : obs) {
        CHECK(std::abs(o.photon_number) < 1e-10);
        CHECK(std::abs(o.entanglement) < 1e-10);
        CHECK_FALSE(o.diverged);
    }
}

TEST_CASE("entanglement is non-negative and positive once coupled") {
    ModelParams p = base(3, pi / 4, 0.0);
    p.g = 0.8 * min_gc(p);
    auto obs = observables(symplectic_diagonalize(build_quadratic(p, trivial_state(3))));
    for (const auto& o : obs) {
        CHECK(o.entanglement > 0);
        CHECK(o.photon_number > 0);
    }
}

TEST_CASE("translation invariance of observables for uniform mean fields") {
    ModelParams p = base(5, 3 * pi / 4, 0.0);
    p.g = 1.3 * min_gc(p);
    MeanFieldState st = minimize(p);
    auto obs = observables(symplectic_diagonalize(build_quadratic(p, st)));
    for (int i = 1; i < 5; i++) {
        CHECK(std::abs(obs[i].photon_number - obs[0].photon_number) < 1e-8);
        CHECK(std::abs(obs[i].entanglement - obs[0].entanglement) < 1e-8);
    }
}

TEST_CASE("covariance photon number matches the Rabi-limit formula") {
    ModelParams p = base(3, pi / 4, 0.0);
    p.omega_atom = 1e4;
    p.g = 0.8 * min_gc(p);
    auto obs = observables(symplectic_diagonalize(build_quadratic(p, trivial_state(3))));
    double expect = np_photon_number(p);
    CHECK(obs[0].photon_number == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("divergence flag near criticality") {
    ModelParams p = base(3, 3 * pi / 4, 0.0);
    double gc0 = min_gc(p);
    p.g = gc0 * (1 - 1e-13); // gap ~ sqrt(delta), well under the divergence threshold
    auto spec = symplectic_diagonalize(build_quadratic(p, trivial_state(3)));
    if (spec.converged) {
        auto obs = observables(spec);
        CHECK(obs[0].diverged);
    } else {
        CHECK(spec.gap < 1e-4);
    }
}
