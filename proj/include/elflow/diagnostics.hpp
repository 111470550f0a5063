#pragma once
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "elflow/flow_solver.hpp"

namespace elflow {

// Gaps below this floor are clamped before taking logarithms.
constexpr double kGapFloor = 1e-12;

struct LojasiewiczFit {
    double theta_hat = 0.0;  // clamped to (0, 1/2]
    double theta_raw = 0.0;  // 1 - 1/slope before clamping
    double slope = 0.0;
    double C_hat = 0.0;
    double fit_r2 = 0.0;
    int samples = 0;
};

struct DecayFit {
    double rate = 0.0;  // slope of log(gap) against t
    double fit_r2 = 0.0;
    int samples = 0;
};

struct CompactnessReport {
    double initial_diam = 0.0;
    double max_bbox_diam = 0.0;
    double length_lo = 0.0, length_hi = 0.0;
    double initial_length = 0.0;
    BoundingBox hull;  // union of all sampled boxes
    // max_bbox_diam <= 2 initial_diam + 2 initial_length
    bool within_envelope = false;
};

struct DissipationCheck {
    int intervals = 0;
    int passed = 0;
    int energy_increases = 0;
    double fraction() const { return intervals > 0 ? static_cast<double>(passed) / intervals : 0.0; }
};

struct ConvergenceReport {
    std::vector<std::pair<double, double>> energy_gap_series;
    double E0 = 0.0, E_inf = 0.0;
    double E_final = 0.0;
    double u_integral = 0.0;          // step-resolved when the trace carries it, else over samples
    double u_integral_samples = 0.0;  // trapezoid over the sampled u values
    bool integral_bounded = false;    // u_integral <= (E0 - E_inf) * 1.05 + 1e-12
    bool gap_nonincreasing = false;
    bool have_fit = false, have_decay = false;
    LojasiewiczFit lojasiewicz;
    DecayFit decay;
    double theta_hat = 0.0, C_hat = 0.0, fit_r2 = 0.0, decay_rate = 0.0;
    double max_bbox_diam = 0.0;
    std::pair<double, double> length_range{0.0, 0.0};
    int h_violations = 0;
    std::vector<std::string> warnings;
};

double energy_gap(double energy, double E_inf);

// Integral of u and gap monotonicity; EmptyTrace on an empty trace.
ConvergenceReport dissipation_report(const FlowTrace& trace, double E_inf);

// Regression of log(gap) on log(dual_norm) over samples after the first 20% with gap in (1e-10, sigma).
LojasiewiczFit fit_lojasiewicz(const FlowTrace& trace, double E_inf,
                               double sigma = std::numeric_limits<double>::infinity());

// Regression of log(gap) on t over the tail half of the samples with gap above the floor.
DecayFit decay_rate_fit(const FlowTrace& trace, double E_inf);

CompactnessReport compactness_report(const FlowTrace& trace);

// |dE/dt + mean u| <= rel_tol (mean u + 1) per sample interval; energy increases beyond
// 1e-3 dt (1 + u) are counted separately.
DissipationCheck check_dissipation_identity(const FlowTrace& trace, double rel_tol = 0.05);

// Number of sample intervals where gap^theta grows by more than tol.
int h_function_violations(const FlowTrace& trace, double E_inf, double theta, double tol = 1e-10);

// Final energy minus the remaining dissipation u_final / kappa, with kappa the exponential rate of u
// fitted over the tail half; the final energy itself when no decaying tail is found.
double limit_energy_estimate(const FlowTrace& trace);

// Complete report with E_inf from limit_energy_estimate; fitting failures become warnings.
ConvergenceReport convergence_report(const FlowTrace& trace);
ConvergenceReport convergence_report(const FlowTrace& trace, double E_inf);

// Trace with the given energy gap and dual norm at the listed times; dissipation is dual_norm^2.
FlowTrace synthetic_trace(const std::vector<double>& times, double E_inf, const std::function<double(double)>& gap,
                          const std::function<double(double)>& dual_norm);

}  // namespace elflow
