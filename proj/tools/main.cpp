// fluxlat CLI: batch sweeps over (g, theta) with CSV/JSON artifacts.
// Subcommands: spectrum, phase-diagram, meanfield, exponent, observables, boundary.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluxlat/criticality.hpp"

using namespace fluxlat;
using nlohmann::json;

namespace {

struct Range {
    double lo{0.0};
    double hi{0.0};
    int steps{1}; // 1 means a scalar value
};

// "min:max:steps" inclusive of both endpoints, or a bare scalar.
Range parse_range(const std::string& spec) {
    Range r;
    if (spec.find(':') == std::string::npos) {
        r.lo = r.hi = std::stod(spec);
        return r;
    }
    std::istringstream in(spec);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c)) {
        throw std::invalid_argument("range must be min:max:steps (got '" + spec + "')");
    }
    r.lo = std::stod(a);
    r.hi = std::stod(b);
    r.steps = std::stoi(c);
    if (r.steps < 2) {
        throw std::invalid_argument("range steps must be >= 2 (got '" + spec + "')");
    }
    if (!(r.hi > r.lo)) {
        throw std::invalid_argument("range needs max > min (got '" + spec + "')");
    }
    return r;
}

std::vector<double> expand(const Range& r) {
    std::vector<double> vals(r.steps);
    for (int i = 0; i < r.steps; i++) {
        vals[i] = r.steps == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (r.steps - 1);
    }
    return vals;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        if (!out.good()) {
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

std::string signs_string(const std::vector<int>& signs) {
    std::string s;
    for (int v : signs) {
        s += v > 0 ? '+' : (v < 0 ? '-' : '0');
    }
    return s;
}

// 2N physical excitation energies about the self-consistent ground state.
Eigen::VectorXd excitations(const ModelParams& p, int restarts, std::uint64_t seed) {
    CriticalMode cm = critical_mode(p);
    if (p.g < cm.g_c) {
        auto e = np_all_energies(p);
        return Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<int>(e.size()));
    }
    MeanFieldState st = minimize(p, restarts, seed);
    QuadraticForm form = build_quadratic(p, st);
    try {
        return symplectic_energies_cholesky(form.h);
    } catch (const NotPositiveDefinite&) {
        return symplectic_diagonalize(form).energies;
    }
}

// Minimal static SVG: one polyline per spectrum branch.
std::string svg_lines(const std::vector<double>& xs,
                      const std::vector<Eigen::VectorXd>& rows) {
    const int w = 640, h = 420, m = 40;
    double ymax = 0;
    for (const auto& r : rows) {
        ymax = std::max(ymax, r.maxCoeff());
    }
    double xmin = xs.front(), xmax = xs.back();
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    int n_branch = static_cast<int>(rows.front().size());
    for (int b = 0; b < n_branch; b++) {
        out << "<polyline fill='none' stroke='hsl(" << (b * 360 / n_branch)
            << ",60%,45%)' stroke-width='1' points='";
        for (std::size_t i = 0; i < xs.size(); i++) {
            double px = m + (w - 2 * m) * (xs[i] - xmin) / (xmax - xmin);
            double py = h - m - (h - 2 * m) * rows[i](b) / ymax;
            out << fmt(px) << "," << fmt(py) << " ";
        }
        out << "'/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string svg_heatmap(const std::vector<PhaseCell>& cells, std::size_t n_theta,
                        std::size_t n_g) {
    const int w = 640, h = 640;
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "'>\n";
    double cw = static_cast<double>(w) / n_theta;
    double ch = static_cast<double>(h) / n_g;
    for (std::size_t i = 0; i < cells.size(); i++) {
        const char* color = "#cccccc";
        if (cells[i].error.empty()) {
            switch (cells[i].label) {
                case PhaseLabel::NP: color = "#f4f4f4"; break;
                case PhaseLabel::ANP: color = "#a8c8e8"; break;
                case PhaseLabel::SP: color = "#e8b86c"; break;
                case PhaseLabel::FSP: color = "#c85454"; break;
            }
        }
        std::size_t it = i / n_g, ig = i % n_g;
        out << "<rect x='" << fmt(it * cw) << "' y='" << fmt(h - (ig + 1) * ch) << "' width='"
            << fmt(cw + 0.5) << "' height='" << fmt(ch + 0.5) << "' fill='" << color << "'/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

struct Cli {
    ModelParams model;
    std::string theta_spec{"1.5708"};
    std::string g_spec{"0"};
    std::string side{"below"};
    std::string window{"1e-5:1e-2"};
    int fit_points{20};
    std::string out;
    std::string svg;
    int restarts{8};
    std::uint64_t seed{0};
    int threads{0};
    double first_order_g{0.0}; // boundary subcommand: also trace the first-order line at this g
};

int run_spectrum(const Cli& c) {
    ModelParams p = c.model;
    p.theta = parse_range(c.theta_spec).lo;
    p.validate(true);
    auto gs = expand(parse_range(c.g_spec));
    std::ostringstream csv;
    csv << "g";
    for (int i = 1; i <= 2 * p.n_sites; i++) {
        csv << ",eps_" << i;
    }
    csv << "\n";
    std::vector<Eigen::VectorXd> rows;
    std::size_t failures = 0;
    for (double g : gs) {
        p.g = g;
        csv << fmt(g);
        try {
            Eigen::VectorXd e = excitations(p, c.restarts, c.seed);
            rows.push_back(e);
            for (int i = 0; i < e.size(); i++) {
                csv << "," << fmt(e(i));
            }
        } catch (const std::exception&) {
            failures++;
            for (int i = 0; i < 2 * p.n_sites; i++) {
                csv << ",nan";
            }
        }
        csv << "\n";
    }
    atomic_write(c.out, csv.str());
    if (!c.svg.empty() && !rows.empty() && failures == 0) {
        atomic_write(c.svg, svg_lines(gs, rows));
    }
    std::printf("%zu cells, %zu failures\n", gs.size(), failures);
    return failures ? 2 : 0;
}

int run_phase_diagram(const Cli& c) {
    auto thetas = expand(parse_range(c.theta_spec));
    auto gs = expand(parse_range(c.g_spec));
    auto cells = sweep_cells(c.model, thetas, gs, c.threads);
    std::ostringstream csv;
    csv << "theta,g,label,critical_k_index,gap,energy,signs,n_ferro_pairs,degeneracy\n";
    std::size_t failures = 0;
    for (const auto& cell : cells) {
        if (!cell.error.empty()) {
            failures++;
            csv << fmt(cell.theta) << "," << fmt(cell.g) << ",ERR,,,,,,\n";
            continue;
        }
        csv << fmt(cell.theta) << "," << fmt(cell.g) << "," << to_string(cell.label) << ","
            << cell.critical_k_index << "," << fmt(cell.gap) << "," << fmt(cell.energy) << ","
            << signs_string(cell.config.signs) << "," << cell.config.n_ferro_pairs << ","
            << cell.config.degeneracy << "\n";
    }
    atomic_write(c.out, csv.str());
    if (!c.svg.empty()) {
        atomic_write(c.svg, svg_heatmap(cells, thetas.size(), gs.size()));
    }
    std::printf("%zu cells, %zu failures\n", cells.size(), failures);
    return failures ? 2 : 0;
}

int run_meanfield(const Cli& c) {
    ModelParams p = c.model;
    p.theta = parse_range(c.theta_spec).lo;
    p.validate(true);
    auto gs = expand(parse_range(c.g_spec));
    std::ostringstream csv;
    csv << "g,energy,grad_norm,signs,n_ferro_pairs,degeneracy,frustrated";
    for (int n = 1; n <= p.n_sites; n++) {
        csv << ",x_" << n;
    }
    csv << "\n";
    std::size_t failures = 0;
    for (double g : gs) {
        p.g = g;
        try {
            MeanFieldState st = minimize(p, c.restarts, c.seed);
            ConfigClass cls = classify(p, st);
            csv << fmt(g) << "," << fmt(st.energy) << "," << fmt(st.grad_norm) << ","
                << signs_string(cls.signs) << "," << cls.n_ferro_pairs << "," << cls.degeneracy
                << "," << (cls.frustrated ? 1 : 0);
            for (int n = 0; n < p.n_sites; n++) {
                csv << "," << fmt(st.x(n));
            }
            csv << "\n";
        } catch (const std::exception&) {
            failures++;
            csv << fmt(g) << ",nan,nan,,,,";
            for (int n = 0; n < p.n_sites; n++) {
                csv << ",nan";
            }
            csv << "\n";
        }
    }
    atomic_write(c.out, csv.str());
    std::printf("%zu cells, %zu failures\n", gs.size(), failures);
    return failures ? 2 : 0;
}

int run_exponent(const Cli& c) {
    ModelParams p = c.model;
    p.theta = parse_range(c.theta_spec).lo;
    p.validate(true);
    std::istringstream in(c.window);
    std::string a, b;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':')) {
        throw std::invalid_argument("window must be lo:hi in relative |g/g_c - 1|");
    }
    double lo = std::stod(a), hi = std::stod(b);
    Side side = c.side == "above" ? Side::above : Side::below;
    double g_c = locate_gc(p);
    auto series = gap_series(p, g_c, side, lo, hi, c.fit_points);
    ScalingFit fit = fit_exponent(series, g_c, side);
    json j;
    j["exponent"] = fit.exponent;
    j["prefactor"] = fit.prefactor;
    j["r2"] = fit.r_squared;
    j["window_lo"] = fit.window_lo;
    j["window_hi"] = fit.window_hi;
    j["side"] = c.side;
    j["g_c"] = g_c;
    atomic_write(c.out, j.dump(2) + "\n");
    std::printf("%d cells, 0 failures\n", c.fit_points);
    return 0;
}

int run_observables(const Cli& c) {
    ModelParams p = c.model;
    p.theta = parse_range(c.theta_spec).lo;
    p.validate(true);
    auto gs = expand(parse_range(c.g_spec));
    std::ostringstream csv;
    csv << "g,site,photon_number,entanglement,diverged_flag\n";
    std::size_t failures = 0;
    for (double g : gs) {
        p.g = g;
        PhaseCell cell = classify_cell(p, true);
        if (!cell.error.empty() || cell.site_observables.empty()) {
            failures++;
            for (int n = 0; n < p.n_sites; n++) {
                csv << fmt(g) << "," << n << ",nan,nan,1\n";
            }
            continue;
        }
        for (int n = 0; n < p.n_sites; n++) {
            const auto& o = cell.site_observables[n];
            csv << fmt(g) << "," << n << "," << fmt(o.photon_number) << ","
                << fmt(o.entanglement) << "," << (o.diverged ? 1 : 0) << "\n";
        }
    }
    atomic_write(c.out, csv.str());
    std::printf("%zu cells, %zu failures\n", gs.size(), failures);
    return failures ? 2 : 0;
}

int run_boundary(const Cli& c) {
    auto thetas = expand(parse_range(c.theta_spec));
    auto points = trace_continuous_boundary(c.model, thetas);
    std::ostringstream csv;
    csv << "kind,theta,g,critical_k_index,kink\n";
    for (const auto& bp : points) {
        csv << "continuous," << fmt(bp.theta) << "," << fmt(bp.g_c) << "," << bp.critical_j
            << "," << (bp.kink ? 1 : 0) << "\n";
    }
    if (c.first_order_g > 0) {
        for (double th : first_order_boundary(c.model, c.first_order_g,
                                              thetas.front(), thetas.back())) {
            csv << "first_order," << fmt(th) << "," << fmt(c.first_order_g) << ",-1,0\n";
        }
    }
    atomic_write(c.out, csv.str());
    std::printf("%zu cells, 0 failures\n", points.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dicke lattice with synthetic flux: spectra, phase diagrams, exponents"};
    app.require_subcommand(1);
    app.set_config("--config")->description("flat key=value file, '#' comments; flags override");

    Cli c;
    app.add_option("--n", c.model.n_sites, "number of lattice sites");
    app.add_option("--omega", c.model.omega, "cavity frequency");
    app.add_option("--omega-atom", c.model.omega_atom, "atomic frequency");
    app.add_option("--jbar", c.model.j_hop, "hopping magnitude");
    app.add_option("--theta", c.theta_spec, "flux: scalar or min:max:steps");
    app.add_option("--g", c.g_spec, "coupling: scalar or min:max:steps");
    app.add_option("--side", c.side, "exponent fit side: below|above")
        ->check(CLI::IsMember({"below", "above"}));
    app.add_option("--window", c.window, "exponent fit window lo:hi in |g/g_c - 1|");
    app.add_option("--fit-points", c.fit_points, "points in the exponent fit window");
    app.add_option("--out", c.out, "output artifact path")->required();
    app.add_option("--svg", c.svg, "optional SVG plot path");
    app.add_option("--restarts", c.restarts, "extra random minimizer starts");
    app.add_option("--seed", c.seed, "seed for the random starts");
    app.add_option("--threads", c.threads, "worker threads (0 = hardware)");
    app.add_option("--first-order-g", c.first_order_g,
                   "boundary: also trace the first-order line at this coupling");

    auto* sc_spectrum = app.add_subcommand("spectrum", "excitation energies along a g sweep");
    auto* sc_pd = app.add_subcommand("phase-diagram", "classified (theta, g) grid");
    auto* sc_mf = app.add_subcommand("meanfield", "mean-field minimizer along a g sweep");
    auto* sc_exp = app.add_subcommand("exponent", "gap exponent fit near the boundary");
    auto* sc_obs = app.add_subcommand("observables", "per-site photon number and entanglement");
    auto* sc_bnd = app.add_subcommand("boundary", "continuous boundary trace over theta");
    for (auto* sc : {sc_spectrum, sc_pd, sc_mf, sc_exp, sc_obs, sc_bnd}) {
        sc->fallthrough(true); // shared options may appear after the subcommand
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    try {
        if (sc_spectrum->parsed()) {
            code = run_spectrum(c);
        } else if (sc_pd->parsed()) {
            code = run_phase_diagram(c);
        } else if (sc_mf->parsed()) {
            code = run_meanfield(c);
        } else if (sc_exp->parsed()) {
            code = run_exponent(c);
        } else if (sc_obs->parsed()) {
            code = run_observables(c);
        } else if (sc_bnd->parsed()) {
            code = run_boundary(c);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("wall time %.2f s\n", secs);
    return code;
}
