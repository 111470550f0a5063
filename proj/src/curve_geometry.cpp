#include "elflow/curve_geometry.hpp"

#include <algorithm>
#include <limits>

#include "elflow/banded.hpp"

namespace elflow {

namespace {

constexpr int kParallelMinNodes = 4096;

struct NodeGeometry {
    Vec2 d1, d2, tau, nu;
    double speed, k, ds_k, ds2_k;
};

// Arclength geometry at node i from direct parameter derivatives up to fourth order.
NodeGeometry node_geometry(const Stencils& s, const std::vector<Vec2>& p, int i) {
    auto get = [&](int j) { return p[j]; };
    const Vec2 a = s.apply<Vec2>(1, i, get);
    const Vec2 b = s.apply<Vec2>(2, i, get);
    const Vec2 c = s.apply<Vec2>(3, i, get);
    const Vec2 d = s.apply<Vec2>(4, i, get);
    NodeGeometry g{};
    g.d1 = a;
    g.d2 = b;
    const double v = norm(a);
    g.speed = v;
    g.tau = (1.0 / v) * a;
    g.nu = perp(g.tau);
    const double C = cross(a, b);
    const double C1 = cross(a, c);
    const double C2 = cross(b, c) + cross(a, d);
    const double v1 = dot(a, b) / v;
    const double v2 = (dot(b, b) + dot(a, c)) / v - dot(a, b) * dot(a, b) / (v * v * v);
    const double v3 = v * v * v;
    const double v4 = v3 * v;
    const double v5 = v4 * v;
    const double k = C / v3;
    const double k1 = C1 / v3 - 3.0 * C * v1 / v4;
    const double k2 = C2 / v3 - 6.0 * C1 * v1 / v4 - 3.0 * C * v2 / v4 + 12.0 * C * v1 * v1 / v5;
    g.k = k;
    g.ds_k = k1 / v;
    g.ds2_k = (k2 - k1 * v1 / v) / (v * v);
    return g;
}

void fill_node(GeometryCache& out, const Stencils& s, const std::vector<Vec2>& p, int i) {
    const NodeGeometry g = node_geometry(s, p, i);
    out.d1[i] = g.d1;
    out.d2[i] = g.d2;
    out.speed[i] = g.speed;
    out.tau[i] = g.tau;
    out.nu[i] = g.nu;
    out.k[i] = g.k;
    out.ds_k[i] = g.ds_k;
    out.ds2_k[i] = g.ds2_k;
    out.ds_weight[i] = s.quadrature()[i] * g.speed;
}

void fill_third(GeometryCache& out, const Stencils& s, int i) {
    const double d = s.apply<double>(1, i, [&](int j) { return out.ds2_k[j]; });
    out.ds3_k[i] = d / out.speed[i];
}

GeometryCache prepare(const DiscreteCurve& curve) {
    curve.validate();
    GeometryCache out;
    const int N = curve.intervals();
    out.N = N;
    out.stencils = stencils_for(N);
    out.seg_len.resize(N);
    out.total_len = 0.0;
    for (int i = 0; i < N; ++i) {
        out.seg_len[i] = norm(curve.nodes[i + 1] - curve.nodes[i]);
        out.total_len += out.seg_len[i];
    }
    const std::size_t n = N + 1;
    out.speed.resize(n);
    out.d1.resize(n);
    out.d2.resize(n);
    out.tau.resize(n);
    out.nu.resize(n);
    out.k.resize(n);
    out.ds_k.resize(n);
    out.ds2_k.resize(n);
    out.ds3_k.resize(n);
    out.ds_weight.resize(n);
    return out;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

std::vector<Vec2> densify(const DiscreteCurve& c, int refine) {
    ChordSpline spline(c.nodes);
    const auto& t = spline.knots();
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(c.intervals()) * refine + 1);
    for (int i = 0; i < c.intervals(); ++i)
        for (int j = 0; j < refine; ++j) out.push_back(spline(t[i] + (t[i + 1] - t[i]) * j / refine));
    out.push_back(c.nodes.back());
    return out;
}

double directed_distance(const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
    double worst = 0.0;
    const int n = static_cast<int>(from.size());
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < to.size(); ++j) best = std::min(best, point_segment_distance(from[i], to[j], to[j + 1]));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

void DiscreteCurve::validate() const {
    if (intervals() < 16) throw Error(ErrorKind::InvalidArgument, "curve needs at least 16 intervals");
    for (const Vec2& p : nodes)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(ErrorKind::NonFinite, "non-finite node");
    for (int i = 0; i < intervals(); ++i)
        if (nodes[i + 1].x == nodes[i].x && nodes[i + 1].y == nodes[i].y)
            throw Error(ErrorKind::ZeroSegment, "coincident nodes at segment " + std::to_string(i));
    if (constrained && (nodes.front().y != 0.0 || nodes.back().y != 0.0))
        throw Error(ErrorKind::ConstraintViolation, "constrained curve has an endpoint off the axis");
}

GeometryCache build_cache(const DiscreteCurve& curve) {
    GeometryCache out = prepare(curve);
    const Stencils& s = *out.stencils;
    const int n = out.N + 1;
#pragma omp parallel if (n >= kParallelMinNodes)
    {
#pragma omp for schedule(static)
        for (int i = 0; i < n; ++i) fill_node(out, s, curve.nodes, i);
#pragma omp for schedule(static)
        for (int i = 0; i < n; ++i) fill_third(out, s, i);
    }
    return out;
}

GeometryCache build_cache_serial(const DiscreteCurve& curve) {
    GeometryCache out = prepare(curve);
    const Stencils& s = *out.stencils;
    const int n = out.N + 1;
    for (int i = 0; i < n; ++i) fill_node(out, s, curve.nodes, i);
    for (int i = 0; i < n; ++i) fill_third(out, s, i);
    return out;
}

Field param_derivative(const Stencils& s, int m, const Field& f) {
    if (static_cast<int>(f.size()) != s.nodes()) throw Error(ErrorKind::DimensionMismatch, "field length");
    Field out(f.size());
    for (int i = 0; i < s.nodes(); ++i) out[i] = s.apply<Vec2>(m, i, [&](int j) { return f[j]; });
    return out;
}

std::vector<double> param_derivative(const Stencils& s, int m, const std::vector<double>& f) {
    if (static_cast<int>(f.size()) != s.nodes()) throw Error(ErrorKind::DimensionMismatch, "field length");
    std::vector<double> out(f.size());
    for (int i = 0; i < s.nodes(); ++i) out[i] = s.apply<double>(m, i, [&](int j) { return f[j]; });
    return out;
}

ChordSpline::ChordSpline(const std::vector<Vec2>& pts) : p_(pts) {
    const int n = static_cast<int>(pts.size()) - 1;
    if (n < 3) throw Error(ErrorKind::InvalidArgument, "spline needs at least four points");
    t_.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double h = norm(pts[i + 1] - pts[i]);
        if (h == 0.0) throw Error(ErrorKind::ZeroSegment, "coincident spline points");
        t_[i + 1] = t_[i] + h;
    }
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = t_[i + 1] - t_[i];
    BandedMatrix A(n + 1, 2, 2);
    std::vector<double> rhs(2 * (n + 1), 0.0);
    A.at(0, 0) = h[1];
    A.at(0, 1) = -(h[0] + h[1]);
    A.at(0, 2) = h[0];
    for (int i = 1; i < n; ++i) {
        A.at(i, i - 1) = h[i - 1];
        A.at(i, i) = 2.0 * (h[i - 1] + h[i]);
        A.at(i, i + 1) = h[i];
        const Vec2 r = 6.0 * ((1.0 / h[i]) * (pts[i + 1] - pts[i]) - (1.0 / h[i - 1]) * (pts[i] - pts[i - 1]));
        rhs[i] = r.x;
        rhs[n + 1 + i] = r.y;
    }
    A.at(n, n - 2) = h[n - 1];
    A.at(n, n - 1) = -(h[n - 2] + h[n - 1]);
    A.at(n, n) = h[n - 2];
    if (A.solve(rhs, 2) != 0) throw Error(ErrorKind::SingularJacobian, "spline system");
    m_.resize(n + 1);
    for (int i = 0; i <= n; ++i) m_[i] = {rhs[i], rhs[n + 1 + i]};
}

Vec2 ChordSpline::operator()(double t) const {
    const int n = static_cast<int>(t_.size()) - 1;
    int i = static_cast<int>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin()) - 1;
    i = std::clamp(i, 0, n - 1);
    const double h = t_[i + 1] - t_[i];
    const double A = (t_[i + 1] - t) / h;
    const double B = (t - t_[i]) / h;
    const double cA = (A * A * A - A) * h * h / 6.0;
    const double cB = (B * B * B - B) * h * h / 6.0;
    return A * p_[i] + B * p_[i + 1] + cA * m_[i] + cB * m_[i + 1];
}

DiscreteCurve resample_uniform(const DiscreteCurve& curve, int M) {
    if (M < 3) throw Error(ErrorKind::InvalidArgument, "resample needs M >= 3");
    ChordSpline spline(curve.nodes);
    const double total = spline.length();
    std::vector<double> t(M + 1);
    for (int i = 0; i <= M; ++i) t[i] = total * i / M;
    std::vector<Vec2> q(M + 1);
    std::vector<double> s(M + 1);
    for (int iter = 0; iter < 100; ++iter) {
        for (int i = 0; i <= M; ++i) q[i] = spline(t[i]);
        s[0] = 0.0;
        for (int i = 0; i < M; ++i) s[i + 1] = s[i] + norm(q[i + 1] - q[i]);
        double change = 0.0;
        std::vector<double> t_new(M + 1);
        t_new[0] = 0.0;
        t_new[M] = total;
        for (int i = 1; i < M; ++i) {
            const double target = s[M] * i / M;
            int j = static_cast<int>(std::upper_bound(s.begin(), s.end(), target) - s.begin()) - 1;
            j = std::clamp(j, 0, M - 1);
            const double w = (target - s[j]) / (s[j + 1] - s[j]);
            t_new[i] = t[j] + w * (t[j + 1] - t[j]);
            change = std::max(change, std::abs(t_new[i] - t[i]));
        }
        t = t_new;
        if (change <= 1e-15 * total) break;
    }
    DiscreteCurve out;
    out.constrained = curve.constrained;
    out.nodes.resize(M + 1);
    for (int i = 0; i <= M; ++i) out.nodes[i] = spline(t[i]);
    out.nodes.front() = curve.nodes.front();
    out.nodes.back() = curve.nodes.back();
    return out;
}

double BoundingBox::diameter() const { return std::hypot(xmax - xmin, ymax - ymin); }

BoundingBox bounding_box(const DiscreteCurve& curve) {
    BoundingBox b;
    b.xmin = b.ymin = std::numeric_limits<double>::infinity();
    b.xmax = b.ymax = -std::numeric_limits<double>::infinity();
    for (const Vec2& p : curve.nodes) {
        b.xmin = std::min(b.xmin, p.x);
        b.xmax = std::max(b.xmax, p.x);
        b.ymin = std::min(b.ymin, p.y);
        b.ymax = std::max(b.ymax, p.y);
    }
    return b;
}

double discrete_ibp_defect(const Field& X, const Field& Y, const GeometryCache& cache) {
    const int n = cache.N + 1;
    if (static_cast<int>(X.size()) != n || static_cast<int>(Y.size()) != n)
        throw Error(ErrorKind::DimensionMismatch, "field length differs from node count");
    const Stencils& s = *cache.stencils;
    const Field dX = param_derivative(s, 1, X);
    const Field dY = param_derivative(s, 1, Y);
    const auto& w = s.quadrature();
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2 t = cache.tau[i];
        const Vec2 dt = (cache.speed[i] * cache.k[i]) * cache.nu[i];
        const Vec2 perp_dX = dX[i] - dot(dX[i], t) * t;
        const Vec2 perp_dY = dY[i] - dot(dY[i], t) * t;
        lhs += w[i] * dot(perp_dX, Y[i]);
        rhs += w[i] * (-dot(X[i], perp_dY) + dot(X[i], t) * dot(Y[i], dt) + dot(X[i], dt) * dot(Y[i], t));
    }
    auto boundary = [&](int i) {
        const Vec2 t = cache.tau[i];
        return dot(X[i] - dot(X[i], t) * t, Y[i]);
    };
    rhs += boundary(n - 1) - boundary(0);
    return std::abs(lhs - rhs);
}

double hausdorff_distance(const DiscreteCurve& a, const DiscreteCurve& b, int refine) {
    const std::vector<Vec2> da = densify(a, refine);
    const std::vector<Vec2> db = densify(b, refine);
    return std::max(directed_distance(da, db), directed_distance(db, da));
}

DiscreteCurve align_horizontal(const DiscreteCurve& a, const DiscreteCurve& b) {
    const double ca = 0.5 * (a.nodes.front().x + a.nodes.back().x);
    const double cb = 0.5 * (b.nodes.front().x + b.nodes.back().x);
    DiscreteCurve out = a;
    for (Vec2& p : out.nodes) p.x += cb - ca;
    return out;
}

DiscreteCurve make_segment(Vec2 a, Vec2 b, int N, bool constrained) {
    DiscreteCurve c;
    c.constrained = constrained;
    c.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double t = static_cast<double>(i) / N;
        c.nodes[i] = (1.0 - t) * a + t * b;
    }
    c.nodes.back() = b;
    return c;
}

DiscreteCurve make_semicircle(double R, int N, double center_x, bool constrained) {
    const double pi = std::acos(-1.0);
    DiscreteCurve c;
    c.constrained = constrained;
    c.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double th = pi * i / N;
        c.nodes[i] = {center_x + R * std::cos(th), R * std::sin(th)};
    }
    c.nodes.front() = {center_x + R, 0.0};
    c.nodes.back() = {center_x - R, 0.0};
    return c;
}

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ZeroSegment: return "ZeroSegment";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonPositiveMu: return "NonPositiveMu";
        case ErrorKind::ConstraintViolation: return "ConstraintViolation";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::SingularJacobian: return "SingularJacobian";
        case ErrorKind::EmptyTrace: return "EmptyTrace";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::StepFailure: return "StepFailure";
        case ErrorKind::ConfigParse: return "ConfigParse";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace elflow
