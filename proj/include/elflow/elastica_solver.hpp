#pragma once
#include <array>
#include <string>
#include <vector>

#include "elflow/curve_geometry.hpp"

namespace elflow {

struct ShootingParams {
    double a = 0.0;     // k_s(0)
    double phi0 = 0.0;  // launch angle
    double L = 0.0;     // length
};

struct ShootingState {
    double k = 0, w = 0, theta = 0, x = 0, y = 0;
};

struct ShootingResult {
    DiscreteCurve curve;
    std::vector<ShootingState> states;
    ShootingState terminal;
};

enum class ElasticaKind { Arc, Loop };
const char* kind_name(ElasticaKind k);

struct BoundaryResiduals {
    double k0 = 0, kL = 0, attach_L = 0, third_0 = 0, third_L = 0;
    double max_abs() const;
};

struct ElasticaSolution {
    ShootingParams params;
    double mu = 1.0;
    int n_steps = 0;
    DiscreteCurve curve;
    double ode_residual = 0.0;
    BoundaryResiduals bc_residuals;
    ElasticaKind kind = ElasticaKind::Arc;
    bool degenerate = false;
    double energy = 0.0;
    double turning = 0.0;       // total variation of the tangent angle
    double endpoint_gap = 0.0;  // |x(L) - x(0)|
    int iterations = 0;
};

struct ElasticaOptions {
    int n_steps = 2048;
    int max_iter = 100;
    double tol = 1e-10;
    bool eliminate = true;  // use a = -mu cos(phi0) / (2 sin(phi0)) and solve for (phi0, L)
    int scan_phi = 64;
    int scan_steps = 1024;
    double phi_min = 0.1;
    double L_min = 0.5;  // scaled by 1/sqrt(mu)
    double L_max = 6.0;  // scaled by 1/sqrt(mu)
};

ShootingResult integrate_shooting(const ShootingParams& p, double mu, int n_steps);
std::array<double, 4> residual_vector(const ShootingParams& p, double mu, int n_steps = 2048);
double eliminated_slope(double phi0, double mu);

ElasticaSolution solve(double mu, const ShootingParams& guess, const ElasticaOptions& opt = {});
ElasticaKind classify(const ElasticaSolution& s);
ElasticaKind classify_curve(const DiscreteCurve& curve, const std::vector<double>& theta, bool* degenerate = nullptr);
bool has_self_intersection(const DiscreteCurve& curve);

// Newton seeds from sign changes of y(L) at successive zeros of k over a grid of launch angles.
std::vector<ShootingParams> seed_scan(double mu, const ElasticaOptions& opt = {});
std::vector<ShootingParams> seed_scan_serial(double mu, const ElasticaOptions& opt = {});
// All distinct solutions reachable from the seed scan, sorted by energy then launch angle.
std::vector<ElasticaSolution> find_elasticae(double mu, const ElasticaOptions& opt = {});

// Solution curve resampled to N intervals, uniform in arclength, endpoints snapped onto the axis.
DiscreteCurve elastica_curve(const ShootingParams& p, double mu, int N);
// Lowest-energy arc for the given mu with launch angle below pi/2.
ElasticaSolution reference_arc(double mu, const ElasticaOptions& opt = {});

}  // namespace elflow
