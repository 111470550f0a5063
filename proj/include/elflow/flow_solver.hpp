#pragma once
#include <functional>
#include <string>
#include <vector>

#include "elflow/curve_geometry.hpp"

namespace elflow {

struct FlowConfig {
    double mu = 1.0;
    double dt = 0.0;  // <= 0 selects 0.1 h^2 with h = length / n_nodes
    int n_nodes = 200;
    double t_max = 200.0;
    double u_tol = 1e-8;
    double rho_min = 1e-3;
    double len_min = 1e-3;
    int reparam_every = 0;  // steps between uniform resamplings, 0 disables
    int snapshot_every = 200;
    bool require_admissible = true;
    double admissible_tol = 1e-6;
    double fourth_order_tol = 1e-4;
    int max_retries = 10;
    double startup_fraction = 1e-3;  // first step is dt * fraction, growing geometrically up to dt
    double startup_growth = 1.05;
};

struct AdmissibilityResidual {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityResidual> residuals;
    bool pass = false;
    std::string summary() const;
};

struct FlowState {
    DiscreteCurve curve;
    double time = 0.0;
    long step = 0;
    GeometryCache cache;
};

struct TraceSample {
    double t = 0, energy = 0, dissipation = 0, length = 0;
    BoundingBox bbox;
    double tangency = 0, dual_norm = 0;
    long step = 0;
    double dissipated = 0;  // step-resolved trapezoid of u over [0, t]
};

struct FlowTrace {
    std::vector<TraceSample> samples;
};

enum class StopReason { Converged, MaxTimeReached, LengthCollapse, BoundaryTangency, StepFailure };
const char* stop_reason_name(StopReason r);

struct RunResult {
    FlowState final_state;
    FlowTrace trace;
    StopReason reason = StopReason::MaxTimeReached;
    double dt = 0.0;
    long steps = 0;
    long monotonicity_violations = 0;
    double length_lo = 0.0, length_hi = 0.0;
    std::string message;
};

// Residuals are scaled to the natural length 1/sqrt(mu) so that the check is invariant under the mu-scaling family.
AdmissibilityReport check_admissible(const DiscreteCurve& curve, double mu, double rho, double tol = 1e-6,
                                     double fourth_order_tol = 1e-4);

FlowState make_state(const DiscreteCurve& curve, double time = 0.0, long step = 0);
double default_dt(const DiscreteCurve& curve, int n_nodes);
// One linearly implicit step of size dt; throws StepFailure.
FlowState step(const FlowState& state, const FlowConfig& config, double dt);
FlowState step(const FlowState& state, const FlowConfig& config);
TraceSample sample_state(const FlowState& state, double mu);

using SampleCallback = std::function<void(const FlowState&, const TraceSample&)>;
RunResult run(const DiscreteCurve& initial, const FlowConfig& config, const SampleCallback& on_sample = {});

}  // namespace elflow
