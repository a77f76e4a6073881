#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fluxlat/criticality.hpp"

using namespace fluxlat;

namespace {

ModelParams base(int n, double theta, double g) {
    ModelParams p;
    p.n_sites = n;
    p.theta = theta;
    p.g = g;
    return p;
}

std::vector<std::pair<double, double>> synthetic(double a, double e, int n_pts,
                                                 double lo, double hi) {
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < n_pts; i++) {
        double d = lo * std::pow(hi / lo, static_cast<double>(i) / (n_pts - 1));
        out.emplace_back(d, a * std::pow(d, e));
    }
    return out;
}

std::vector<std::pair<double, double>> gap_series_deltas(const ModelParams& p, double gc,
                                                         Side side, double lo, double hi,
                                                         int n_pts) {
    std::vector<std::pair<double, double>> out;
    for (auto [g, gap] : gap_series(p, gc, side, lo, hi, n_pts)) {
        out.emplace_back(std::abs(g - gc), gap);
    }
    return out;
}

} // namespace

TEST_CASE("log-log fit recovers exact power laws") {
    auto fit = loglog_fit(synthetic(2.5, 1.5, 20, 1e-6, 1e-2));
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(fit.prefactor == doctest::Approx(2.5).epsilon(1e-8));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.window_lo == doctest::Approx(1e-6));
    CHECK(fit.window_hi == doctest::Approx(1e-2));
}

TEST_CASE("fit preconditions: point count, decade span, fit quality, side filter") {
    double gc = 1.0;
    // series straddling g_c: only the requested side is used
    std::vector<std::pair<double, double>> series;
    for (auto [d, v] : synthetic(1.0, 2.0, 15, 1e-5, 1e-2)) {
        series.emplace_back(gc - d, v);
        series.emplace_back(gc + d, 3 * std::pow(d, 0.5));
    }
    auto below = fit_exponent(series, gc, Side::below);
    auto above = fit_exponent(series, gc, Side::above);
    CHECK(below.exponent == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(above.exponent == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(below.side == Side::below);
    CHECK(above.side == Side::above);

    std::vector<std::pair<double, double>> few;
    for (auto [d, v] : synthetic(1.0, 1.0, 11, 1e-5, 1e-2)) {
        few.emplace_back(gc - d, v);
    }
    CHECK_THROWS_AS(fit_exponent(few, gc, Side::below), std::invalid_argument);

    std::vector<std::pair<double, double>> narrow;
    for (auto [d, v] : synthetic(1.0, 1.0, 15, 1e-3, 5e-2)) {
        narrow.emplace_back(gc - d, v);
    }
    CHECK_THROWS_AS(fit_exponent(narrow, gc, Side::below), std::invalid_argument);

    // strongly curved data on a wide window: r^2 gate fires
    std::vector<std::pair<double, double>> curved;
    for (int i = 0; i < 20; i++) {
        double d = 1e-5 * std::pow(1e3, i / 19.0);
        curved.emplace_back(gc - d, d * std::exp(0.5 * std::sin(3 * std::log(d))));
    }
    CHECK_THROWS_AS(fit_exponent(curved, gc, Side::below), PoorFit);
}

TEST_CASE("normal-phase gap: positive below, closing at the boundary") {
    ModelParams p = base(3, pi / 4, 0.5);
    CHECK(np_gap(p) > 0.1);
    CriticalMode cm = critical_mode(p);
    p.g = cm.g_c * (1 - 1e-8);
    double tiny = np_gap(p);
    CHECK(tiny > 0);
    CHECK(tiny < 1e-4);
    // conditioned branch agrees with the closed-form linear slope
    p.g = cm.g_c * (1 - 1e-10);
    CHECK(np_gap(p) == doctest::Approx(tiny * 1e-2).epsilon(1e-3));
}

TEST_CASE("gap-closing coupling matches the closed form") {
    ModelParams p = base(3, pi / 4, 0.0);
    CHECK(locate_gc(p) == doctest::Approx(0.9555877536231465).epsilon(1e-6));
    ModelParams q = base(5, 1.2, 0.0);
    CHECK(locate_gc(q) == doctest::Approx(critical_mode(q).g_c).epsilon(1e-6));
}

TEST_CASE("gap exponents on the continuous boundary") {
    // twisted side: linear closing from below
    ModelParams p = base(3, pi / 4, 0.0);
    double gc = critical_mode(p).g_c;
    auto fit = fit_exponent(gap_series(p, gc, Side::below, 1e-5, 2e-3, 15), gc, Side::below);
    CHECK(fit.exponent == doctest::Approx(1.0).epsilon(0.02));

    // window halving moves the estimate by little
    auto fit2 = loglog_fit(gap_series_deltas(p, gc, Side::below, 1e-5, 1e-4, 15));
    CHECK(std::abs(fit2.exponent - fit.exponent) < 0.02);

    // uniform side: square-root closing on both sides
    ModelParams m = base(3, 3 * pi / 4, 0.0);
    double gcm = critical_mode(m).g_c;
    auto mf = fit_exponent(gap_series(m, gcm, Side::below, 1e-5, 2e-3, 15), gcm, Side::below);
    CHECK(mf.exponent == doctest::Approx(0.5).epsilon(0.02));
    auto mfa = fit_exponent(gap_series(m, gcm, Side::above, 1e-4, 1.5e-2, 13), gcm, Side::above);
    CHECK(mfa.exponent == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("ordered-phase gap is positive away from the boundary") {
    ModelParams p = base(3, pi / 4, 0.0);
    p.g = 1.2 * critical_mode(p).g_c;
    CHECK(sp_gap(p) > 1e-3);
    ModelParams m = base(3, 3 * pi / 4, 0.0);
    m.g = 1.2 * critical_mode(m).g_c;
    CHECK(sp_gap(m) > 1e-3);
}

TEST_CASE("continuous boundary: kink counts per lattice size") {
    std::vector<double> thetas;
    for (int i = 0; i < 200; i++) {
        thetas.push_back(0.02 + (pi - 0.04) * i / 199.0);
    }
    ModelParams p3 = base(3, pi / 4, 0.0);
    auto b3 = trace_continuous_boundary(p3, thetas);
    int kinks3 = 0;
    double kink_theta = 0;
    for (const auto& bp : b3) {
        if (bp.kink) {
            kinks3++;
            kink_theta = bp.theta;
        }
    }
    CHECK(kinks3 == 1);
    CHECK(kink_theta == doctest::Approx(1.6690304542362964).epsilon(0.02));

    ModelParams p5 = base(5, pi / 4, 0.0);
    int kinks5 = 0;
    for (const auto& bp : trace_continuous_boundary(p5, thetas)) {
        kinks5 += bp.kink ? 1 : 0;
    }
    CHECK(kinks5 == 2);

    ModelParams flat = base(3, pi / 4, 0.0);
    flat.j_hop = 0.0;
    for (const auto& bp : trace_continuous_boundary(flat, thetas)) {
        CHECK_FALSE(bp.kink);
        CHECK(bp.g_c == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("cell classification covers all four phases") {
    ModelParams np = base(3, 3 * pi / 4, 0.5);
    PhaseCell c = classify_cell(np);
    CHECK(c.label == PhaseLabel::NP);
    CHECK(c.critical_k_index == 0);
    CHECK(c.error.empty());
    CHECK(c.gap > 0);
    for (int s : c.config.signs) {
        CHECK(s == 0);
    }

    ModelParams anp = base(3, pi / 4, 0.5);
    CHECK(classify_cell(anp).label == PhaseLabel::ANP);
    CHECK(classify_cell(anp).critical_k_index == 1);

    ModelParams sp = base(3, 3 * pi / 4, 0.0);
    sp.g = 1.3 * critical_mode(sp).g_c;
    PhaseCell cs = classify_cell(sp, true);
    CHECK(cs.label == PhaseLabel::SP);
    CHECK(cs.config.n_ferro_pairs == 3);
    CHECK(cs.config.degeneracy == 2);
    REQUIRE(cs.site_observables.size() == 3);
    CHECK(cs.site_observables[0].photon_number > 0);

    ModelParams fsp = base(3, pi / 4, 0.0);
    fsp.g = 1.2 * critical_mode(fsp).g_c;
    PhaseCell cf = classify_cell(fsp);
    CHECK(cf.label == PhaseLabel::FSP);
    CHECK(cf.config.frustrated);
    CHECK(cf.config.degeneracy == 6);
    CHECK(cf.energy < -1.5);

    ModelParams bad = base(3, 0.0, 0.5);
    CHECK_FALSE(classify_cell(bad).error.empty());
}

TEST_CASE("concurrent sweep is deterministic and theta-major ordered") {
    std::vector<double> thetas{0.8, 1.4, 2.0, 2.6};
    std::vector<double> gs{0.5, 1.0, 1.4};
    ModelParams p = base(3, pi / 4, 0.0);
    auto a = sweep_cells(p, thetas, gs, 4);
    auto b = sweep_cells(p, thetas, gs, 2);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); i++) {
        CHECK(a[i].theta == thetas[i / 3]);
        CHECK(a[i].g == gs[i % 3]);
        CHECK(a[i].theta == b[i].theta);
        CHECK(a[i].g == b[i].g);
        CHECK(a[i].label == b[i].label);
        CHECK(a[i].gap == b[i].gap);
        CHECK(a[i].energy == b[i].energy);
        // serial reference
        ModelParams q = p;
        q.theta = a[i].theta;
        q.g = a[i].g;
        PhaseCell ref = classify_cell(q);
        CHECK(a[i].label == ref.label);
        CHECK(a[i].gap == doctest::Approx(ref.gap).epsilon(1e-12));
    }
}

TEST_CASE("multicritical point report for the three-site lattice") {
    ModelParams p = base(3, pi / 4, 0.0);
    double theta_c = flux_critical_point(p, 0.0, -2 * pi / 3);
    auto rep = multicritical_report(p, theta_c);
    CHECK(rep.g_c == doctest::Approx(critical_coupling(base(3, theta_c, 0.0), 0.0)).epsilon(1e-9));
    REQUIRE(rep.modes.size() == 2);
    double e0 = std::min(rep.modes[0].exponent, rep.modes[1].exponent);
    double e1 = std::max(rep.modes[0].exponent, rep.modes[1].exponent);
    CHECK(e0 == doctest::Approx(0.5).epsilon(0.1));
    CHECK(e1 == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rep.first_order_terminates);
    CHECK(rep.first_order_theta == doctest::Approx(theta_c).epsilon(0.03));
    CHECK(rep.boundary_degeneracy == 8); // uniform pair coexists with the six frustrated patterns

    CHECK_THROWS_AS(multicritical_report(p, 0.5), std::invalid_argument);
}
