// criticality.hpp - Exponent fits, boundary tracing, multicritical reports and
// phase-diagram cells

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluxlat/gaussian.hpp"
#include "fluxlat/meanfield.hpp"
#include "fluxlat/model.hpp"
#include "fluxlat/npspectrum.hpp"

namespace fluxlat {

struct PoorFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Side { below, above };

struct ScalingFit {
    double exponent{0.0};
    double prefactor{0.0};
    double r_squared{0.0};
    double window_lo{0.0}; // in |g - g_c|
    double window_hi{0.0};
    Side side{Side::below};
};

// Log-log least squares without preconditions (building block, also used for
// narrow windows where the full contract cannot be met).
ScalingFit loglog_fit(const std::vector<std::pair<double, double>>& delta_value);

// Slope of ln(value) vs ln|g - g_c| on the requested side. Requires >= 12
// points spanning >= 2 decades; throws PoorFit when r^2 < 0.999.
ScalingFit fit_exponent(const std::vector<std::pair<double, double>>& series,
                        double g_c, Side side);

// Normal-phase gap: minimum excitation energy over all momentum blocks; tiny
// gaps are taken from the closed-form quartic route for conditioning.
double np_gap(const ModelParams& p);

// Superradiant-phase gap at the mean-field minimizer.
double sp_gap(const ModelParams& p, int restarts = 4, std::uint64_t seed = 0);

// Gap-closing coupling located by bisection on normal-phase stability (1e-10).
double locate_gc(const ModelParams& p);

// Gap series at relative offsets delta = |g/g_c - 1| log-spaced in
// [window_lo, window_hi]; entries are (g, gap).
std::vector<std::pair<double, double>> gap_series(const ModelParams& p, double g_c,
                                                  Side side, double window_lo,
                                                  double window_hi, int n_points);

struct BoundaryPoint {
    double theta{0.0};
    double g_c{0.0};
    int critical_j{0};
    double critical_k{0.0};
    bool kink{false}; // argmin mode index changed from the previous grid point
};

std::vector<BoundaryPoint> trace_continuous_boundary(const ModelParams& p,
                                                     const std::vector<double>& thetas);

struct ModeScaling {
    double k{0.0};
    double exponent{0.0};
    double r_squared{0.0};
};

struct MulticriticalReport {
    double theta_c{0.0};
    double g_c{0.0};
    std::vector<ModeScaling> modes;   // the two simultaneously critical modes
    bool first_order_terminates{false};
    double first_order_theta{0.0};    // boundary location at the probe coupling
    int boundary_degeneracy{0};       // ground-manifold size at theta_c above g_c
};

MulticriticalReport multicritical_report(const ModelParams& p, double theta_c);

enum class PhaseLabel { NP, ANP, SP, FSP };
std::string to_string(PhaseLabel label);

struct PhaseCell {
    double theta{0.0};
    double g{0.0};
    PhaseLabel label{PhaseLabel::NP};
    int critical_k_index{0};
    double critical_k{0.0};
    double gap{0.0};
    double energy{0.0};
    ConfigClass config;
    std::vector<SiteObservables> site_observables;
    std::string error; // non-empty when a module failed for this cell
};

PhaseCell classify_cell(const ModelParams& p, bool with_observables = false);

// theta-major, then g; cells computed concurrently, assembled deterministically.
std::vector<PhaseCell> sweep_cells(const ModelParams& p, const std::vector<double>& thetas,
                                   const std::vector<double>& gs, int threads,
                                   bool with_observables = false);

} // namespace fluxlat
