#pragma once
#include <array>
#include <cstdint>
#include <vector>

#include "elflow/curve_geometry.hpp"

namespace elflow {

struct VariationReport {
    double analytic = 0.0;
    double finite_difference = 0.0;
    double eps = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    double observed_order = 0.0;
};

struct GradientData {
    Field interior;                     // (2 k_ss + k^3 - mu k) nu per node
    std::array<double, 2> boundary_coeff{};  // (-2 k_s nu + mu tau)_1 at x = 0 and x = 1
    double dual_norm = 0.0;
};

double energy(const DiscreteCurve& curve, double mu);
double energy(const GeometryCache& cache, double mu);
// Quadrature length sum ds, the length seen by the energy.
double quadrature_length(const GeometryCache& cache);
double bending_energy(const GeometryCache& cache);

// Normal velocity V = -2 k_ss - k^3 + mu k per node.
std::vector<double> normal_velocity(const GeometryCache& cache, double mu);
// Third-order boundary residual 2 k_s tau_2 + mu tau_1 at node i.
double third_order_residual(const GeometryCache& cache, double mu, int i);

GradientData gradient(const DiscreteCurve& curve, double mu);
GradientData gradient(const GeometryCache& cache, double mu);
// int V^2 ds
double dissipation(const GeometryCache& cache, const std::vector<double>& V);

// Directional derivative of the discrete energy along X (weak form).
double first_variation(const DiscreteCurve& curve, double mu, const Field& X);
// Interior integral of the gradient field plus the explicit boundary terms.
double first_variation_strong(const DiscreteCurve& curve, double mu, const Field& X);
double second_variation(const DiscreteCurve& curve, double mu, const Field& X, const Field& Y);
VariationReport verify_variation(const DiscreteCurve& curve, double mu, const Field& X, const std::vector<double>& eps_list);

double default_fd_eps(const DiscreteCurve& curve);
DiscreteCurve displaced(const DiscreteCurve& curve, const Field& X, double eps);

// Smooth low-mode field with components bounded by `amplitude`; X_2 vanishes at both ends when constrained.
Field random_smooth_field(int N, std::uint64_t seed, double amplitude, bool constrained);
// Uniform double in [-1, 1) from the top 53 bits of a 64-bit draw.
double unit_symmetric(std::uint64_t bits);

}  // namespace elflow
