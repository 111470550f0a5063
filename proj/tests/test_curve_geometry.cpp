#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "elflow/curve_geometry.hpp"
#include "elflow/energy_variations.hpp"
#include "test_util.hpp"

using namespace elflow;
using elflow::test::error_kind;
using elflow::test::kPi;

namespace {

DiscreteCurve make_parabola(int N) {
    DiscreteCurve c;
    for (int i = 0; i <= N; ++i) {
        const double x = -1.0 + 2.0 * i / N;
        c.nodes.push_back({x, x * x});
    }
    return c;
}

double max_curvature_error(double R, int N) {
    const GeometryCache g = build_cache(make_semicircle(R, N));
    double err = 0.0;
    for (double k : g.k) err = std::max(err, std::abs(k - 1.0 / R));
    return err;
}

DiscreteCurve wobbly_curve(int N) {
    DiscreteCurve c;
    for (int i = 0; i <= N; ++i) {
        const double x = static_cast<double>(i) / N;
        c.nodes.push_back({x + 0.05 * std::sin(3.0 * kPi * x), 0.3 * std::sin(kPi * x) + 0.02 * std::sin(7.0 * kPi * x)});
    }
    return c;
}

}  // namespace

TEST_CASE("fornberg weights reproduce the classical three-point stencil") {
    const std::vector<double> w = fornberg_weights(0.0, {-1.0, 0.0, 1.0}, 2);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(-2.0));
    CHECK(w[2] == doctest::Approx(1.0));
}

TEST_CASE("derivative stencils are exact on polynomials up to degree six") {
    const int N = 32;
    const Stencils s(N);
    for (int p = 0; p <= 6; ++p) {
        std::vector<double> f(N + 1);
        for (int i = 0; i <= N; ++i) f[i] = std::pow(static_cast<double>(i) / N, p);
        for (int m = 1; m <= 4; ++m) {
            const std::vector<double> d = param_derivative(s, m, f);
            for (int i = 0; i <= N; ++i) {
                const double x = static_cast<double>(i) / N;
                double exact = 0.0;
                if (p >= m) {
                    exact = 1.0;
                    for (int j = 0; j < m; ++j) exact *= p - j;
                    exact *= std::pow(x, p - m);
                }
                CHECK(std::abs(d[i] - exact) <= 1e-7 * (1.0 + std::abs(exact)));
            }
        }
    }
}

TEST_CASE("quadrature weights sum to one and integrate cubics exactly") {
    const Stencils s(40);
    const std::vector<double>& w = s.quadrature();
    double sum = 0.0, cubic = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double x = i / 40.0;
        sum += w[i];
        cubic += w[i] * x * x * x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cubic == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("straight segment has zero curvature") {
    const GeometryCache g = build_cache(make_segment({0.0, 0.0}, {1.0, 0.0}, 64));
    for (double k : g.k) CHECK(std::abs(k) <= 1e-12);
    CHECK(g.total_len == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("counterclockwise semicircle has curvature one with orthonormal frame") {
    const GeometryCache g = build_cache(make_semicircle(1.0, 256));
    for (int i = 0; i <= 256; ++i) {
        CHECK(std::abs(g.k[i] - 1.0) <= 1e-8);
        CHECK(std::abs(norm(g.tau[i]) - 1.0) <= 1e-12);
        CHECK(std::abs(dot(g.tau[i], g.nu[i])) <= 1e-12);
        CHECK(g.nu[i].x == -g.tau[i].y);
        CHECK(g.nu[i].y == g.tau[i].x);
        CHECK(std::abs(g.ds_k[i]) <= 1e-7);
    }
    CHECK(g.total_len > 0.0);
}

TEST_CASE("curvature error shrinks under grid doubling") {
    const double e16 = max_curvature_error(1.0, 16);
    const double e32 = max_curvature_error(1.0, 32);
    CHECK(e32 < e16);
    CHECK(std::log2(e16 / e32) >= 1.9);
}

TEST_CASE("parabola vertex has curvature two") {
    const DiscreteCurve c = make_parabola(128);
    const GeometryCache g = build_cache(c);
    CHECK(g.k[64] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("parallel and serial cache construction agree bitwise") {
    for (int N : {64, 4096, 8192}) {
        const DiscreteCurve c = wobbly_curve(N);
        const GeometryCache a = build_cache(c);
        const GeometryCache b = build_cache_serial(c);
        CHECK(a.total_len == b.total_len);
        CHECK(a.k == b.k);
        CHECK(a.ds_k == b.ds_k);
        CHECK(a.ds2_k == b.ds2_k);
        CHECK(a.ds3_k == b.ds3_k);
        CHECK(a.ds_weight == b.ds_weight);
    }
}

TEST_CASE("uniform resampling") {
    SUBCASE("already uniform segment is reproduced") {
        const DiscreteCurve c = make_segment({0.0, 0.0}, {1.0, 0.5}, 64);
        const DiscreteCurve r = resample_uniform(c, 64);
        for (int i = 0; i <= 64; ++i) {
            CHECK(std::abs(r.nodes[i].x - c.nodes[i].x) <= 1e-12);
            CHECK(std::abs(r.nodes[i].y - c.nodes[i].y) <= 1e-12);
        }
    }
    SUBCASE("nonuniform segment gives the uniform partition") {
        DiscreteCurve c;
        for (int i = 0; i <= 20; ++i) {
            const double s = static_cast<double>(i) / 20;
            c.nodes.push_back({2.0 * s * s, 0.0});
        }
        const DiscreteCurve r = resample_uniform(c, 10);
        REQUIRE(r.nodes.size() == 11);
        for (int i = 0; i <= 10; ++i) CHECK(std::abs(r.nodes[i].x - 0.2 * i) <= 1e-12);
        CHECK(r.nodes.front().x == 0.0);
        CHECK(r.nodes.back().x == 2.0);
    }
    SUBCASE("clustered semicircle becomes equally spaced and keeps its length") {
        DiscreteCurve c;
        c.constrained = true;
        const int N = 200;
        for (int i = 0; i <= N; ++i) {
            const double s = static_cast<double>(i) / N;
            const double t = kPi * (s - 0.05 * std::sin(2.0 * kPi * s));
            c.nodes.push_back({std::cos(t), std::sin(t)});
        }
        c.nodes.front().y = 0.0;
        c.nodes.back().y = 0.0;
        const DiscreteCurve r = resample_uniform(c, 128);
        const GeometryCache g = build_cache(r);
        const auto [lo, hi] = std::minmax_element(g.seg_len.begin(), g.seg_len.end());
        CHECK(*hi - *lo <= 1e-8);
        CHECK(r.nodes.front().x == c.nodes.front().x);
        CHECK(r.nodes.back().x == c.nodes.back().x);
        CHECK(r.nodes.back().y == 0.0);
        const double arc = quadrature_length(g);
        CHECK(std::abs(arc - kPi) / kPi <= 1e-6);
    }
}

TEST_CASE("chord spline interpolates its nodes") {
    const DiscreteCurve c = make_semicircle(1.0, 32);
    const ChordSpline sp(c.nodes);
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Vec2 p = sp(sp.knots()[i]);
        CHECK(std::abs(p.x - c.nodes[i].x) <= 1e-14);
        CHECK(std::abs(p.y - c.nodes[i].y) <= 1e-14);
    }
    const Vec2 mid = sp(0.5 * sp.length());
    CHECK(std::abs(norm(mid) - 1.0) <= 1e-6);
}

TEST_CASE("bounding box") {
    const BoundingBox seg = bounding_box(make_segment({0.0, 0.0}, {1.0, 0.0}, 16));
    CHECK(seg.xmin == 0.0);
    CHECK(seg.xmax == 1.0);
    CHECK(seg.ymin == 0.0);
    CHECK(seg.ymax == 0.0);

    const BoundingBox semi = bounding_box(make_semicircle(1.0, 256));
    CHECK(semi.xmin == doctest::Approx(-1.0));
    CHECK(semi.xmax == doctest::Approx(1.0));
    CHECK(semi.ymin == doctest::Approx(0.0));
    CHECK(semi.ymax == doctest::Approx(1.0).epsilon(1e-4));

    const BoundingBox moved = bounding_box(make_semicircle(1.0, 256, 3.0));
    CHECK(moved.xmin - semi.xmin == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(moved.xmax - semi.xmax == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(moved.ymax == semi.ymax);
}

TEST_CASE("discrete integration by parts defect") {
    SUBCASE("zero fields give zero defect") {
        const GeometryCache g = build_cache(make_semicircle(1.0, 64));
        const Field zero(65, Vec2{});
        CHECK(discrete_ibp_defect(zero, zero, g) == 0.0);
    }
    SUBCASE("defect decreases under refinement for normal and generic fields") {
        std::vector<double> generic, normal;
        for (int N : {64, 128, 256}) {
            const GeometryCache g = build_cache(make_semicircle(1.0, N));
            generic.push_back(discrete_ibp_defect(random_smooth_field(N, 11, 1.0, false), random_smooth_field(N, 12, 1.0, false), g));
            Field X(N + 1), Y(N + 1);
            for (int i = 0; i <= N; ++i) {
                const double x = static_cast<double>(i) / N;
                X[i] = std::cos(2.0 * x) * g.nu[i];
                Y[i] = (1.0 + x * x) * g.nu[i];
            }
            normal.push_back(discrete_ibp_defect(X, Y, g));
        }
        for (int i = 0; i < 2; ++i) {
            CHECK(std::log2(generic[i] / generic[i + 1]) >= 1.0);
            CHECK(std::log2(normal[i] / normal[i + 1]) >= 1.0);
        }
    }
    SUBCASE("mismatched field lengths are rejected") {
        const GeometryCache g = build_cache(make_semicircle(1.0, 64));
        CHECK(error_kind([&] { discrete_ibp_defect(Field(10), Field(65), g); }) == ErrorKind::DimensionMismatch);
    }
}

TEST_CASE("hausdorff distance and horizontal alignment") {
    const DiscreteCurve a = make_semicircle(1.0, 64);
    CHECK(hausdorff_distance(a, a) == 0.0);
    DiscreteCurve up = a;
    for (Vec2& p : up.nodes) p.y += 0.01;
    up.constrained = false;
    CHECK(hausdorff_distance(a, up) == doctest::Approx(0.01).epsilon(1e-9));

    const DiscreteCurve shifted = make_semicircle(1.0, 64, 0.7);
    const DiscreteCurve back = align_horizontal(shifted, a);
    CHECK(hausdorff_distance(back, a) <= 1e-12);
    CHECK(hausdorff_distance(a, make_semicircle(1.0, 100)) <= 1e-5);
}

TEST_CASE("invalid curves and arguments are rejected with their error kinds") {
    CHECK(error_kind([] { make_segment({0.0, 0.0}, {1.0, 0.0}, 8).validate(); }) == ErrorKind::InvalidArgument);

    DiscreteCurve nan = make_segment({0.0, 0.0}, {1.0, 0.0}, 16);
    nan.nodes[3].x = std::nan("");
    CHECK(error_kind([&] { nan.validate(); }) == ErrorKind::NonFinite);

    DiscreteCurve dup = make_segment({0.0, 0.0}, {1.0, 0.0}, 16);
    dup.nodes[5] = dup.nodes[4];
    CHECK(error_kind([&] { dup.validate(); }) == ErrorKind::ZeroSegment);
    CHECK(error_kind([&] { build_cache(dup); }) == ErrorKind::ZeroSegment);

    DiscreteCurve off = make_semicircle(1.0, 32);
    off.nodes.back().y = 1e-3;
    CHECK(error_kind([&] { off.validate(); }) == ErrorKind::ConstraintViolation);

    CHECK(error_kind([] { Stencils s(8); }) == ErrorKind::InvalidArgument);
    CHECK(error_kind([] { param_derivative(Stencils(16), 1, std::vector<double>(5)); }) == ErrorKind::DimensionMismatch);
    CHECK(error_kind([] { ChordSpline sp({{0, 0}, {1, 0}, {2, 0}}); }) == ErrorKind::InvalidArgument);
    CHECK(error_kind([] { resample_uniform(make_semicircle(1.0, 32), 2); }) == ErrorKind::InvalidArgument);
    CHECK(error_kind([&] { resample_uniform(dup, 32); }) == ErrorKind::ZeroSegment);
}
