#include "elflow/flow_solver.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "elflow/banded.hpp"
#include "elflow/energy_variations.hpp"

namespace elflow {

namespace {

constexpr int kBand = 22;

// Third-order residual as a function of the first three parameter derivatives at an endpoint.
double third_order_from_derivatives(const std::array<double, 6>& q, double mu) {
    const Vec2 a{q[0], q[1]}, b{q[2], q[3]}, c{q[4], q[5]};
    const double v = norm(a);
    const double C = cross(a, b);
    const double C1 = cross(a, c);
    const double v1 = dot(a, b) / v;
    const double k1 = C1 / (v * v * v) - 3.0 * C * v1 / (v * v * v * v);
    const double ks = k1 / v;
    return 2.0 * (a.y / v) * ks + mu * (a.x / v);
}

// Linearization of the third-order residual at node i0 with respect to all node coordinates.
void third_order_row(const Stencils& s, const std::vector<Vec2>& p, int i0, double mu, BandedMatrix& M, int row,
                     double& residual) {
    std::array<double, 6> q{};
    for (int m = 1; m <= 3; ++m) {
        const Vec2 d = s.apply<Vec2>(m, i0, [&](int j) { return p[j]; });
        q[2 * (m - 1)] = d.x;
        q[2 * (m - 1) + 1] = d.y;
    }
    residual = third_order_from_derivatives(q, mu);
    std::array<double, 6> grad{};
    for (int r = 0; r < 6; ++r) {
        const double scale = std::max(std::hypot(q[r & ~1], q[r | 1]), 1e-12);
        const double h = 1e-6 * scale;
        std::array<double, 6> qp = q, qm = q;
        qp[r] += h;
        qm[r] -= h;
        grad[r] = (third_order_from_derivatives(qp, mu) - third_order_from_derivatives(qm, mu)) / (2.0 * h);
    }
    M.clear_row(row);
    for (int m = 1; m <= 3; ++m) {
        const StencilRow& sr = s.row(m, i0);
        for (std::size_t j = 0; j < sr.w.size(); ++j) {
            const int node = sr.start + static_cast<int>(j);
            M.at(row, 2 * node) += grad[2 * (m - 1)] * sr.w[j];
            M.at(row, 2 * node + 1) += grad[2 * (m - 1) + 1] * sr.w[j];
        }
    }
}

double tangency_of(const GeometryCache& c) { return std::min(c.tau.front().y, c.tau.back().y); }

}  // namespace

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "Converged";
        case StopReason::MaxTimeReached: return "MaxTimeReached";
        case StopReason::LengthCollapse: return "LengthCollapse";
        case StopReason::BoundaryTangency: return "BoundaryTangency";
        case StopReason::StepFailure: return "StepFailure";
    }
    return "Unknown";
}

std::string AdmissibilityReport::summary() const {
    std::ostringstream os;
    os << (pass ? "admissible" : "not admissible");
    for (const auto& r : residuals)
        if (!r.pass) os << "; " << r.name << " = " << r.value << " (limit " << r.limit << ")";
    return os.str();
}

AdmissibilityReport check_admissible(const DiscreteCurve& curve, double mu, double rho, double tol, double fourth_order_tol) {
    const GeometryCache c = build_cache(curve);
    const Stencils& s = *c.stencils;
    const std::vector<double> V = normal_velocity(c, mu);
    AdmissibilityReport rep;
    rep.pass = true;
    auto add = [&](const std::string& name, double value, double limit, bool pass) {
        rep.residuals.push_back({name, value, limit, pass});
        rep.pass = rep.pass && pass;
    };
    // Residuals are measured in units of the natural length 1/sqrt(mu).
    const double unit = 1.0 / std::sqrt(mu);
    const int ends[2] = {0, c.N};
    for (int e = 0; e < 2; ++e) {
        const int i = ends[e];
        const std::string tag = e == 0 ? "_0" : "_1";
        const double attach = std::abs(curve.nodes[i].y) / unit;
        add("attachment" + tag, attach, tol, attach <= tol);
        const Vec2 d2 = s.apply<Vec2>(2, i, [&](int j) { return curve.nodes[j]; });
        const double second = norm(d2) / unit;
        add("second_order" + tag, second, tol, second <= tol);
        const double third = std::abs(third_order_residual(c, mu, i)) * unit * unit;
        add("third_order" + tag, third, tol, third <= tol);
        const double margin = c.tau[i].y - rho;
        add("non_degeneracy" + tag, margin, 0.0, margin >= 0.0);
        const double fourth = std::abs(V[i] * c.nu[i].y) * unit * unit * unit;
        add("fourth_order" + tag, fourth, fourth_order_tol, fourth <= fourth_order_tol);
    }
    return rep;
}

FlowState make_state(const DiscreteCurve& curve, double time, long step_index) {
    FlowState st;
    st.curve = curve;
    st.time = time;
    st.step = step_index;
    st.cache = build_cache(curve);
    return st;
}

double default_dt(const DiscreteCurve& curve, int n_nodes) {
    double len = 0.0;
    for (int i = 0; i < curve.intervals(); ++i) len += norm(curve.nodes[i + 1] - curve.nodes[i]);
    const double h = len / n_nodes;
    return 0.1 * h * h;
}

FlowState step(const FlowState& state, const FlowConfig& config, double dt) {
    const GeometryCache& c = state.cache;
    const Stencils& s = *c.stencils;
    const std::vector<Vec2>& p = state.curve.nodes;
    const int N = c.N;
    const int n = 2 * (N + 1);
    const double mu = config.mu;
    const std::vector<double> V = normal_velocity(c, mu);
    const Field d4 = param_derivative(s, 4, p);

    BandedMatrix M(n, kBand, kBand);
    std::vector<double> b(n, 0.0);
    for (int i = 0; i <= N; ++i) {
        const double v = c.speed[i];
        const double coef = 2.0 / (v * v * v * v);
        const double T = -coef * dot(d4[i], c.tau[i]) - 6.0 * c.k[i] * c.ds_k[i];
        const Vec2 F = V[i] * c.nu[i] + T * c.tau[i];
        const StencilRow& r = s.row(4, i);
        for (int comp = 0; comp < 2; ++comp) {
            const int row = 2 * i + comp;
            M.at(row, row) += 1.0;
            for (std::size_t j = 0; j < r.w.size(); ++j) M.at(row, 2 * (r.start + static_cast<int>(j)) + comp) += dt * coef * r.w[j];
        }
        b[2 * i] = dt * F.x;
        b[2 * i + 1] = dt * F.y;
    }
    for (int e = 0; e < 2; ++e) {
        const int i0 = e == 0 ? 0 : N;
        const int i1 = e == 0 ? 1 : N - 1;
        M.clear_row(2 * i0 + 1);
        M.at(2 * i0 + 1, 2 * i0 + 1) = 1.0;
        b[2 * i0 + 1] = 0.0;
        const StencilRow& r2 = s.row(2, i0);
        const int rows[2] = {2 * i0, 2 * i1};
        for (int comp = 0; comp < 2; ++comp) {
            const int row = rows[comp];
            M.clear_row(row);
            double current = 0.0;
            for (std::size_t j = 0; j < r2.w.size(); ++j) {
                const int node = r2.start + static_cast<int>(j);
                M.at(row, 2 * node + comp) = r2.w[j];
                current += r2.w[j] * (comp == 0 ? p[node].x : p[node].y);
            }
            b[row] = -current;
        }
        double residual = 0.0;
        third_order_row(s, p, i0, mu, M, 2 * i1 + 1, residual);
        b[2 * i1 + 1] = -residual;
    }
    const int info = M.solve(b);
    if (info != 0) throw Error(ErrorKind::StepFailure, "banded solve failed (info " + std::to_string(info) + ")");

    DiscreteCurve next = state.curve;
    for (int i = 0; i <= N; ++i) {
        next.nodes[i].x += b[2 * i];
        next.nodes[i].y += b[2 * i + 1];
    }
    next.nodes.front().y = 0.0;
    next.nodes.back().y = 0.0;
    const long index = state.step + 1;
    if (config.reparam_every > 0 && index % config.reparam_every == 0) {
        try {
            next = resample_uniform(next, N);
        } catch (const Error& err) {
            throw Error(ErrorKind::StepFailure, std::string("resampling failed: ") + err.what());
        }
    }
    try {
        return make_state(next, state.time + dt, index);
    } catch (const Error& err) {
        throw Error(ErrorKind::StepFailure, std::string("curve lost regularity: ") + err.what());
    }
}

FlowState step(const FlowState& state, const FlowConfig& config) {
    const double dt = config.dt > 0.0 ? config.dt : default_dt(state.curve, state.cache.N);
    return step(state, config, dt);
}

TraceSample sample_state(const FlowState& state, double mu) {
    const GeometryCache& c = state.cache;
    TraceSample t;
    t.t = state.time;
    t.step = state.step;
    t.energy = energy(c, mu);
    const GradientData g = gradient(c, mu);
    t.dual_norm = g.dual_norm;
    t.dissipation = dissipation(c, normal_velocity(c, mu));
    t.length = c.total_len;
    t.bbox = bounding_box(state.curve);
    t.tangency = tangency_of(c);
    return t;
}

RunResult run(const DiscreteCurve& initial, const FlowConfig& config, const SampleCallback& on_sample) {
    if (!(config.mu > 0.0)) throw Error(ErrorKind::NonPositiveMu, "mu must be positive");
    if (!(config.rho_min > 0.0 && config.rho_min < 1.0)) throw Error(ErrorKind::InvalidArgument, "rho_min must lie in (0,1)");
    if (config.snapshot_every <= 0) throw Error(ErrorKind::InvalidArgument, "snapshot_every must be positive");
    if (!(config.startup_fraction > 0.0 && config.startup_fraction <= 1.0 && config.startup_growth > 1.0))
        throw Error(ErrorKind::InvalidArgument, "startup ramp needs fraction in (0,1] and growth > 1");
    initial.validate();
    if (!initial.constrained) throw Error(ErrorKind::ConstraintViolation, "flow requires a constrained curve");
    DiscreteCurve start = initial;
    if (start.intervals() != config.n_nodes) start = resample_uniform(start, config.n_nodes);
    if (config.require_admissible) {
        const AdmissibilityReport rep =
            check_admissible(start, config.mu, config.rho_min, config.admissible_tol, config.fourth_order_tol);
        if (!rep.pass) throw Error(ErrorKind::InvalidArgument, "initial curve: " + rep.summary());
    }
    RunResult out;
    out.dt = config.dt > 0.0 ? config.dt : default_dt(start, config.n_nodes);
    FlowState state = make_state(start);
    double last_energy = energy(state.cache, config.mu);
    out.length_lo = out.length_hi = state.cache.total_len;
    double dissipated = 0.0;
    auto record = [&](const FlowState& st) {
        TraceSample smp = sample_state(st, config.mu);
        smp.dissipated = dissipated;
        out.trace.samples.push_back(smp);
        if (on_sample) on_sample(st, smp);
    };
    record(state);
    while (true) {
        const GeometryCache& c = state.cache;
        const double len = c.total_len;
        out.length_lo = std::min(out.length_lo, len);
        out.length_hi = std::max(out.length_hi, len);
        const double u = dissipation(c, normal_velocity(c, config.mu));
        bool stop = true;
        if (!std::isfinite(u)) {
            out.reason = StopReason::StepFailure;
            out.message = "non-finite dissipation";
        } else if (len < config.len_min) {
            out.reason = StopReason::LengthCollapse;
        } else if (tangency_of(c) < config.rho_min) {
            out.reason = StopReason::BoundaryTangency;
        } else if (u < config.u_tol) {
            out.reason = StopReason::Converged;
        } else if (state.time >= config.t_max) {
            out.reason = StopReason::MaxTimeReached;
        } else {
            stop = false;
        }
        if (stop) break;
        double dt = out.dt;
        if (config.startup_fraction < 1.0)
            dt *= std::min(1.0, config.startup_fraction * std::pow(config.startup_growth, static_cast<double>(state.step)));
        bool advanced = false;
        std::string failure;
        for (int attempt = 0; attempt <= config.max_retries; ++attempt, dt *= 0.5) {
            try {
                FlowState next = step(state, config, dt);
                state = std::move(next);
                advanced = true;
                break;
            } catch (const Error& err) {
                failure = err.what();
            }
        }
        if (!advanced) {
            out.reason = StopReason::StepFailure;
            out.message = failure;
            break;
        }
        const double e = energy(state.cache, config.mu);
        const double u_next = dissipation(state.cache, normal_velocity(state.cache, config.mu));
        dissipated += 0.5 * dt * (u + u_next);
        if (e > last_energy + 1e-3 * dt * (1.0 + u)) ++out.monotonicity_violations;
        last_energy = e;
        if (state.step % config.snapshot_every == 0) record(state);
    }
    if (out.trace.samples.back().step != state.step) record(state);
    out.steps = state.step;
    out.final_state = std::move(state);
    return out;
}

}  // namespace elflow
