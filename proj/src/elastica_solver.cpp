#include "elflow/elastica_solver.hpp"

#include <algorithm>
#include <limits>

namespace elflow {

namespace {

const double kPi = std::acos(-1.0);

ShootingState rhs(const ShootingState& s, double mu) {
    return {s.w, 0.5 * (mu * s.k - s.k * s.k * s.k), s.k, std::cos(s.theta), std::sin(s.theta)};
}

ShootingState axpy(const ShootingState& s, double h, const ShootingState& d) {
    return {s.k + h * d.k, s.w + h * d.w, s.theta + h * d.theta, s.x + h * d.x, s.y + h * d.y};
}

ShootingState rk4_step(const ShootingState& s, double h, double mu) {
    const ShootingState k1 = rhs(s, mu);
    const ShootingState k2 = rhs(axpy(s, 0.5 * h, k1), mu);
    const ShootingState k3 = rhs(axpy(s, 0.5 * h, k2), mu);
    const ShootingState k4 = rhs(axpy(s, h, k3), mu);
    return {s.k + h / 6.0 * (k1.k + 2 * k2.k + 2 * k3.k + k4.k), s.w + h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w),
            s.theta + h / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta),
            s.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.y + h / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y)};
}

bool finite(const ShootingState& s) {
    return std::isfinite(s.k) && std::isfinite(s.w) && std::isfinite(s.theta) && std::isfinite(s.x) && std::isfinite(s.y);
}

std::vector<ShootingState> integrate_states(const ShootingParams& p, double mu, int n_steps) {
    std::vector<ShootingState> out(n_steps + 1);
    out[0] = {0.0, p.a, p.phi0, 0.0, 0.0};
    const double h = p.L / n_steps;
    for (int i = 0; i < n_steps; ++i) {
        out[i + 1] = rk4_step(out[i], h, mu);
        if (!finite(out[i + 1])) throw Error(ErrorKind::NonFinite, "shooting state blew up");
    }
    return out;
}

// Small dense solve with partial pivoting; A is n x n row-major.
bool dense_solve(std::vector<double> A, std::vector<double>& b, int n) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
        if (std::abs(A[piv * n + c]) < 1e-300) return false;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(A[c * n + j], A[piv * n + j]);
            std::swap(b[c], b[piv]);
        }
        for (int r = c + 1; r < n; ++r) {
            const double f = A[r * n + c] / A[c * n + c];
            for (int j = c; j < n; ++j) A[r * n + j] -= f * A[c * n + j];
            b[r] -= f * b[c];
        }
    }
    for (int c = n - 1; c >= 0; --c) {
        double s = b[c];
        for (int j = c + 1; j < n; ++j) s -= A[c * n + j] * b[j];
        b[c] = s / A[c * n + c];
    }
    return true;
}

struct Problem {
    double mu;
    const ElasticaOptions& opt;

    ShootingParams params(const std::vector<double>& x) const {
        if (opt.eliminate) return {eliminated_slope(x[0], mu), x[0], x[1]};
        return {x[0], x[1], x[2]};
    }
    std::vector<double> unknowns(const ShootingParams& p) const {
        if (opt.eliminate) return {p.phi0, p.L};
        return {p.a, p.phi0, p.L};
    }
    bool valid(const std::vector<double>& x) const {
        const ShootingParams p = params(x);
        return p.L > 0.0 && p.phi0 > 0.0 && p.phi0 < kPi && std::isfinite(p.a);
    }
    std::vector<double> residual(const std::vector<double>& x) const {
        const auto r = residual_vector(params(x), mu, opt.n_steps);
        if (opt.eliminate) return {r[0], r[1]};
        return {r[0], r[1], r[2], r[3]};
    }
};

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sum_sq(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x * x;
    return m;
}

std::vector<ShootingParams> scan_impl(double mu, const ElasticaOptions& opt, bool parallel) {
    const int n_phi = opt.scan_phi;
    const double sq = std::sqrt(mu);
    const double L_max = opt.L_max / sq;
    const double L_min = opt.L_min / sq;
    std::vector<std::vector<std::pair<double, double>>> zeros(n_phi);
    auto scan_one = [&](int j) {
        const double phi = opt.phi_min + (kPi - 2.0 * opt.phi_min) * j / (n_phi - 1);
        std::vector<ShootingState> st;
        try {
            st = integrate_states({eliminated_slope(phi, mu), phi, L_max}, mu, opt.scan_steps);
        } catch (const Error&) {
            return;
        }
        const double h = L_max / opt.scan_steps;
        for (int i = 1; i < opt.scan_steps; ++i) {
            const double k0 = st[i].k, k1 = st[i + 1].k;
            if ((k0 < 0.0 && k1 > 0.0) || (k0 > 0.0 && k1 < 0.0) || (k1 == 0.0 && k0 != 0.0)) {
                const double w = k0 / (k0 - k1);
                zeros[j].push_back({h * (i + w), st[i].y + w * (st[i + 1].y - st[i].y)});
            }
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j < n_phi; ++j) scan_one(j);
    } else {
        for (int j = 0; j < n_phi; ++j) scan_one(j);
    }
    std::vector<ShootingParams> seeds;
    for (int j = 0; j + 1 < n_phi; ++j) {
        const double pa = opt.phi_min + (kPi - 2.0 * opt.phi_min) * j / (n_phi - 1);
        const double pb = opt.phi_min + (kPi - 2.0 * opt.phi_min) * (j + 1) / (n_phi - 1);
        const std::size_t m = std::min(zeros[j].size(), zeros[j + 1].size());
        for (std::size_t z = 0; z < m; ++z) {
            const auto [La, ya] = zeros[j][z];
            const auto [Lb, yb] = zeros[j + 1][z];
            if (!((ya < 0.0 && yb > 0.0) || (ya > 0.0 && yb < 0.0))) continue;
            const double w = ya / (ya - yb);
            const double phi = pa + w * (pb - pa);
            const double L = La + w * (Lb - La);
            if (L < L_min || L > L_max) continue;
            seeds.push_back({eliminated_slope(phi, mu), phi, L});
        }
    }
    return seeds;
}

}  // namespace

const char* kind_name(ElasticaKind k) { return k == ElasticaKind::Arc ? "Arc" : "Loop"; }

double BoundaryResiduals::max_abs() const {
    return std::max({std::abs(k0), std::abs(kL), std::abs(attach_L), std::abs(third_0), std::abs(third_L)});
}

double eliminated_slope(double phi0, double mu) { return -mu * std::cos(phi0) / (2.0 * std::sin(phi0)); }

ShootingResult integrate_shooting(const ShootingParams& p, double mu, int n_steps) {
    if (n_steps < 64) throw Error(ErrorKind::InvalidArgument, "n_steps must be at least 64");
    if (!(p.L > 0.0)) throw Error(ErrorKind::InvalidArgument, "L must be positive");
    ShootingResult r;
    r.states = integrate_states(p, mu, n_steps);
    r.terminal = r.states.back();
    r.curve.nodes.resize(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) r.curve.nodes[i] = {r.states[i].x, r.states[i].y};
    return r;
}

std::array<double, 4> residual_vector(const ShootingParams& p, double mu, int n_steps) {
    const ShootingState t = integrate_states(p, mu, n_steps).back();
    return {t.k, t.y, 2.0 * p.a * std::sin(p.phi0) + mu * std::cos(p.phi0),
            2.0 * t.w * std::sin(t.theta) + mu * std::cos(t.theta)};
}

bool has_self_intersection(const DiscreteCurve& curve) {
    const int n = curve.intervals();
    const auto& p = curve.nodes;
    double len = 0.0;
    for (int i = 0; i < n; ++i) len += norm(p[i + 1] - p[i]);
    const bool closed_ends = norm(p[n] - p[0]) <= 1e-9 * len;
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
    auto on_segment = [](Vec2 a, Vec2 b, Vec2 c) {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
    };
    auto intersects = [&](Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
        const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
        if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
        if (o1 == 0 && on_segment(a, b, c)) return true;
        if (o2 == 0 && on_segment(a, b, d)) return true;
        if (o3 == 0 && on_segment(c, d, a)) return true;
        if (o4 == 0 && on_segment(c, d, b)) return true;
        return false;
    };
    int found = 0;
#pragma omp parallel for reduction(| : found) schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
        if (found) continue;
        for (int j = i + 2; j < n; ++j) {
            if (closed_ends && i == 0 && j == n - 1) continue;
            if (intersects(p[i], p[i + 1], p[j], p[j + 1])) {
                found = 1;
                break;
            }
        }
    }
    return found != 0;
}

ElasticaKind classify_curve(const DiscreteCurve& curve, const std::vector<double>& theta, bool* degenerate) {
    double turning = 0.0;
    for (std::size_t i = 0; i + 1 < theta.size(); ++i) turning += std::abs(theta[i + 1] - theta[i]);
    if (degenerate) *degenerate = turning < 1e-12;
    if (turning >= 2.0 * kPi) return ElasticaKind::Loop;
    if (has_self_intersection(curve)) return ElasticaKind::Loop;
    return ElasticaKind::Arc;
}

ElasticaKind classify(const ElasticaSolution& s) {
    const ShootingResult r = integrate_shooting(s.params, s.mu, s.n_steps);
    std::vector<double> theta(r.states.size());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = r.states[i].theta;
    return classify_curve(r.curve, theta);
}

ElasticaSolution solve(double mu, const ShootingParams& guess, const ElasticaOptions& opt) {
    if (!(mu > 0.0)) throw Error(ErrorKind::NonPositiveMu, "mu must be positive");
    Problem prob{mu, opt};
    std::vector<double> x = prob.unknowns(guess);
    if (!prob.valid(x)) throw Error(ErrorKind::InvalidArgument, "seed outside the parameter domain");
    const int n = static_cast<int>(x.size());
    std::vector<double> r = prob.residual(x);
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (max_abs(r) <= 1e-3 * opt.tol) break;
        const int m = static_cast<int>(r.size());
        std::vector<double> J(static_cast<std::size_t>(m) * n);
        for (int j = 0; j < n; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
            std::vector<double> xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const auto rp = prob.residual(xp);
            const auto rm = prob.residual(xm);
            for (int i = 0; i < m; ++i) J[i * n + j] = (rp[i] - rm[i]) / (2.0 * h);
        }
        // Gauss-Newton normal equations (square case reduces to Newton).
        std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0), g(n, 0.0);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b)
                for (int i = 0; i < m; ++i) A[a * n + b] += J[i * n + a] * J[i * n + b];
            for (int i = 0; i < m; ++i) g[a] += J[i * n + a] * r[i];
        }
        if (m == n) {
            A.assign(J.begin(), J.end());
            g = r;
        }
        if (!dense_solve(A, g, n)) throw Error(ErrorKind::SingularJacobian, "shooting Jacobian is singular");
        double lambda = 1.0;
        const double f0 = sum_sq(r);
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
            std::vector<double> xn = x;
            for (int j = 0; j < n; ++j) xn[j] -= lambda * g[j];
            if (!prob.valid(xn)) continue;
            std::vector<double> rn;
            try {
                rn = prob.residual(xn);
            } catch (const Error&) {
                continue;
            }
            if (sum_sq(rn) < f0) {
                x = xn;
                r = rn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    const ShootingParams p = prob.params(x);
    const auto full = residual_vector(p, mu, opt.n_steps);
    ElasticaSolution s;
    s.params = p;
    s.mu = mu;
    s.n_steps = opt.n_steps;
    s.iterations = it;
    s.bc_residuals = {0.0, full[0], full[1], full[2], full[3]};
    if (!(s.bc_residuals.max_abs() <= opt.tol))
        throw Error(ErrorKind::NoConvergence, "boundary residuals stalled at " + std::to_string(s.bc_residuals.max_abs()));

    const ShootingResult coarse = integrate_shooting(p, mu, opt.n_steps);
    const ShootingResult fine = integrate_shooting(p, mu, 2 * opt.n_steps);
    double ode = 0.0, kmax = 0.0, turning = 0.0;
    for (int i = 0; i <= opt.n_steps; ++i) {
        const ShootingState& a = coarse.states[i];
        const ShootingState& b = fine.states[2 * i];
        ode = std::max({ode, std::abs(a.k - b.k), std::abs(a.w - b.w), std::abs(a.theta - b.theta), std::abs(a.x - b.x),
                        std::abs(a.y - b.y)});
        kmax = std::max(kmax, std::abs(a.k));
    }
    s.ode_residual = ode;
    if (kmax < 1e-12) throw Error(ErrorKind::NoConvergence, "Newton reached the degenerate straight line");
    std::vector<double> theta(coarse.states.size());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = coarse.states[i].theta;
    for (std::size_t i = 0; i + 1 < theta.size(); ++i) turning += std::abs(theta[i + 1] - theta[i]);
    s.turning = turning;
    s.curve = coarse.curve;
    const double drift = s.curve.nodes.back().y;
    for (int i = 0; i <= opt.n_steps; ++i) s.curve.nodes[i].y -= drift * i / opt.n_steps;
    s.curve.nodes.back().y = 0.0;
    s.curve.constrained = true;
    s.kind = classify_curve(s.curve, theta, &s.degenerate);
    // Simpson rule for int k^2 ds (n_steps is even by construction of the refinement check).
    const double h = p.L / opt.n_steps;
    double simpson = 0.0;
    for (int i = 0; i <= opt.n_steps; ++i) {
        const double k2 = coarse.states[i].k * coarse.states[i].k;
        const double w = (i == 0 || i == opt.n_steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        simpson += w * k2;
    }
    s.energy = simpson * h / 3.0 + mu * p.L;
    s.endpoint_gap = std::abs(coarse.terminal.x);
    return s;
}

std::vector<ShootingParams> seed_scan(double mu, const ElasticaOptions& opt) { return scan_impl(mu, opt, true); }
std::vector<ShootingParams> seed_scan_serial(double mu, const ElasticaOptions& opt) { return scan_impl(mu, opt, false); }

std::vector<ElasticaSolution> find_elasticae(double mu, const ElasticaOptions& opt) {
    const std::vector<ShootingParams> seeds = seed_scan(mu, opt);
    std::vector<ElasticaSolution> found;
    for (const ShootingParams& seed : seeds) {
        ElasticaSolution s;
        try {
            s = solve(mu, seed, opt);
        } catch (const Error&) {
            continue;
        }
        bool duplicate = false;
        for (const ElasticaSolution& f : found) {
            const double d = std::abs(f.params.a - s.params.a) + std::abs(f.params.phi0 - s.params.phi0) +
                             std::abs(f.params.L - s.params.L);
            if (d < 1e-6) duplicate = true;
        }
        if (!duplicate) found.push_back(std::move(s));
    }
    std::sort(found.begin(), found.end(), [](const ElasticaSolution& a, const ElasticaSolution& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        return a.params.phi0 < b.params.phi0;
    });
    return found;
}

ElasticaSolution reference_arc(double mu, const ElasticaOptions& opt) {
    for (ElasticaSolution& s : find_elasticae(mu, opt))
        if (s.kind == ElasticaKind::Arc && s.params.phi0 < 0.5 * kPi) return s;
    throw Error(ErrorKind::NoConvergence, "no arc found for mu = " + std::to_string(mu));
}

DiscreteCurve elastica_curve(const ShootingParams& p, double mu, int N) {
    constexpr int kSub = 16;
    const ShootingResult r = integrate_shooting(p, mu, kSub * N);
    DiscreteCurve c;
    c.constrained = true;
    c.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) c.nodes[i] = r.curve.nodes[static_cast<std::size_t>(kSub) * i];
    if (std::abs(c.nodes.back().y) > 1e-6 * p.L)
        throw Error(ErrorKind::ConstraintViolation, "shooting parameters do not return to the axis");
    const double drift = c.nodes.back().y;
    for (int i = 0; i <= N; ++i) c.nodes[i].y -= drift * i / N;
    c.nodes.front().y = 0.0;
    c.nodes.back().y = 0.0;
    return c;
}

}  // namespace elflow
