#include "elflow/energy_variations.hpp"

#include <algorithm>
#include <random>

namespace elflow {

namespace {

void require_mu(double mu) {
    if (!(mu > 0.0)) throw Error(ErrorKind::NonPositiveMu, "mu must be positive");
}

void require_field(const DiscreteCurve& curve, const Field& X) {
    if (X.size() != curve.nodes.size()) throw Error(ErrorKind::DimensionMismatch, "field length differs from node count");
    if (curve.constrained && (X.front().y != 0.0 || X.back().y != 0.0))
        throw Error(ErrorKind::ConstraintViolation, "X_2 must vanish at constrained endpoints");
}

}  // namespace

double quadrature_length(const GeometryCache& cache) {
    double s = 0.0;
    for (double w : cache.ds_weight) s += w;
    return s;
}

double bending_energy(const GeometryCache& cache) {
    double s = 0.0;
    for (std::size_t i = 0; i < cache.k.size(); ++i) s += cache.ds_weight[i] * cache.k[i] * cache.k[i];
    return s;
}

double energy(const GeometryCache& cache, double mu) {
    require_mu(mu);
    return bending_energy(cache) + mu * quadrature_length(cache);
}

double energy(const DiscreteCurve& curve, double mu) {
    require_mu(mu);
    return energy(build_cache(curve), mu);
}

std::vector<double> normal_velocity(const GeometryCache& cache, double mu) {
    std::vector<double> V(cache.k.size());
    for (std::size_t i = 0; i < V.size(); ++i) {
        const double k = cache.k[i];
        V[i] = -2.0 * cache.ds2_k[i] - k * k * k + mu * k;
    }
    return V;
}

double third_order_residual(const GeometryCache& cache, double mu, int i) {
    return 2.0 * cache.ds_k[i] * cache.tau[i].y + mu * cache.tau[i].x;
}

double dissipation(const GeometryCache& cache, const std::vector<double>& V) {
    double u = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) u += cache.ds_weight[i] * V[i] * V[i];
    return u;
}

GradientData gradient(const GeometryCache& cache, double mu) {
    require_mu(mu);
    GradientData g;
    const std::vector<double> V = normal_velocity(cache, mu);
    g.interior.resize(V.size());
    for (std::size_t i = 0; i < V.size(); ++i) g.interior[i] = (-V[i]) * cache.nu[i];
    g.boundary_coeff = {third_order_residual(cache, mu, 0), third_order_residual(cache, mu, cache.N)};
    const double l2 = dissipation(cache, V);
    g.dual_norm = std::sqrt(g.boundary_coeff[0] * g.boundary_coeff[0] + g.boundary_coeff[1] * g.boundary_coeff[1] + l2);
    return g;
}

GradientData gradient(const DiscreteCurve& curve, double mu) { return gradient(build_cache(curve), mu); }

double first_variation(const DiscreteCurve& curve, double mu, const Field& X) {
    require_mu(mu);
    require_field(curve, X);
    const GeometryCache c = build_cache(curve);
    const Stencils& s = *c.stencils;
    const Field dX = param_derivative(s, 1, X);
    const Field ddX = param_derivative(s, 2, X);
    const auto& q = s.quadrature();
    double total = 0.0;
    for (int i = 0; i <= c.N; ++i) {
        const double v = c.speed[i];
        const double k = c.k[i];
        const double dv = dot(c.tau[i], dX[i]);
        const double dk = (cross(dX[i], c.d2[i]) + cross(c.d1[i], ddX[i])) / (v * v * v) - 3.0 * k * dv / v;
        total += q[i] * (2.0 * k * dk * v + (k * k + mu) * dv);
    }
    return total;
}

double first_variation_strong(const DiscreteCurve& curve, double mu, const Field& X) {
    require_mu(mu);
    require_field(curve, X);
    const GeometryCache c = build_cache(curve);
    const Field dX = param_derivative(*c.stencils, 1, X);
    const std::vector<double> V = normal_velocity(c, mu);
    double total = 0.0;
    for (int i = 0; i <= c.N; ++i) total -= c.ds_weight[i] * V[i] * dot(c.nu[i], X[i]);
    auto boundary = [&](int i) {
        const double k = c.k[i];
        const Vec2 dsX = (1.0 / c.speed[i]) * dX[i];
        const Vec2 f = (-2.0 * c.ds_k[i]) * c.nu[i] + (mu - k * k) * c.tau[i];
        return 2.0 * k * dot(c.nu[i], dsX) + dot(f, X[i]);
    };
    return total + boundary(c.N) - boundary(0);
}

DiscreteCurve displaced(const DiscreteCurve& curve, const Field& X, double eps) {
    DiscreteCurve out = curve;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) out.nodes[i] = out.nodes[i] + eps * X[i];
    return out;
}

double default_fd_eps(const DiscreteCurve& curve) {
    double m = 0.0;
    for (const Vec2& p : curve.nodes) m = std::max({m, std::abs(p.x), std::abs(p.y)});
    return 1e-4 * (1.0 + m);
}

double second_variation(const DiscreteCurve& curve, double mu, const Field& X, const Field& Y) {
    require_field(curve, X);
    require_field(curve, Y);
    const double eta = default_fd_eps(curve);
    const double plus = first_variation(displaced(curve, Y, eta), mu, X);
    const double minus = first_variation(displaced(curve, Y, -eta), mu, X);
    return (plus - minus) / (2.0 * eta);
}

VariationReport verify_variation(const DiscreteCurve& curve, double mu, const Field& X, const std::vector<double>& eps_list) {
    if (eps_list.size() < 2) throw Error(ErrorKind::InvalidArgument, "verify_variation needs two step sizes");
    VariationReport r;
    r.analytic = first_variation(curve, mu, X);
    std::vector<double> errs;
    for (double eps : eps_list) {
        const double fd = (energy(displaced(curve, X, eps), mu) - energy(displaced(curve, X, -eps), mu)) / (2.0 * eps);
        if (errs.empty()) {
            r.finite_difference = fd;
            r.eps = eps;
        }
        errs.push_back(std::abs(fd - r.analytic));
    }
    r.abs_err = errs[0];
    const double scale = std::max(std::abs(r.analytic), std::abs(r.finite_difference));
    r.rel_err = scale > 0.0 ? r.abs_err / scale : 0.0;
    r.observed_order = (errs[0] > 0.0 && errs[1] > 0.0) ? std::log(errs[0] / errs[1]) / std::log(eps_list[0] / eps_list[1]) : 0.0;
    return r;
}

double unit_symmetric(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

Field random_smooth_field(int N, std::uint64_t seed, double amplitude, bool constrained) {
    std::mt19937_64 rng(seed);
    constexpr int kModes = 3;
    double cx[kModes + 1], cy[kModes + 1];
    for (int j = 0; j <= kModes; ++j) {
        cx[j] = unit_symmetric(rng());
        cy[j] = unit_symmetric(rng());
    }
    const double pi = std::acos(-1.0);
    Field X(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double x = static_cast<double>(i) / N;
        double a = cx[0], b = constrained ? 0.0 : cy[0];
        for (int j = 1; j <= kModes; ++j) {
            a += cx[j] * std::cos(j * pi * x) / j;
            b += cy[j] * std::sin(j * pi * x) / j;
        }
        X[i] = {amplitude * a / (kModes + 1), amplitude * b / (kModes + 1)};
    }
    if (constrained) {
        X.front().y = 0.0;
        X.back().y = 0.0;
    }
    return X;
}

}  // namespace elflow
