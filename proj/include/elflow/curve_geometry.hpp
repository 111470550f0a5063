#pragma once
#include <memory>
#include <vector>

#include "elflow/common.hpp"
#include "elflow/stencils.hpp"

namespace elflow {

// Polyline samples gamma(x_i), x_i = i/N, of a regular planar curve.
struct DiscreteCurve {
    std::vector<Vec2> nodes;
    bool constrained = false;

    int intervals() const { return static_cast<int>(nodes.size()) - 1; }
    // Throws on fewer than 16 intervals, non-finite nodes, zero segments or a detached endpoint.
    void validate() const;
};

struct GeometryCache {
    int N = 0;
    std::shared_ptr<const Stencils> stencils;
    std::vector<double> seg_len;
    double total_len = 0.0;
    std::vector<double> speed;  // |d gamma / dx|
    Field d1, d2;               // parameter derivatives of gamma
    Field tau, nu;
    std::vector<double> k, ds_k, ds2_k, ds3_k;
    std::vector<double> ds_weight;  // quadrature weight times speed, so that sum f_i ds_weight_i ~ int f ds
};

// Parallel over nodes for large N; bitwise identical to build_cache_serial.
GeometryCache build_cache(const DiscreteCurve& curve);
GeometryCache build_cache_serial(const DiscreteCurve& curve);

// Parameter derivative of order m (1..4) of a nodal field.
Field param_derivative(const Stencils& s, int m, const Field& f);
std::vector<double> param_derivative(const Stencils& s, int m, const std::vector<double>& f);

// Cubic interpolant through the nodes, parametrized by cumulative chord length, not-a-knot ends.
class ChordSpline {
public:
    explicit ChordSpline(const std::vector<Vec2>& pts);
    double length() const { return t_.back(); }
    const std::vector<double>& knots() const { return t_; }
    Vec2 operator()(double t) const;

private:
    std::vector<double> t_;
    std::vector<Vec2> p_, m_;
};

DiscreteCurve resample_uniform(const DiscreteCurve& curve, int M);

struct BoundingBox {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    double diameter() const;
};
BoundingBox bounding_box(const DiscreteCurve& curve);

double discrete_ibp_defect(const Field& X, const Field& Y, const GeometryCache& cache);

// Symmetric Hausdorff distance between the spline interpolants of two curves,
// each densified by `refine` points per segment.
double hausdorff_distance(const DiscreteCurve& a, const DiscreteCurve& b, int refine = 16);
// Shifts `a` horizontally so that the midpoint of its endpoints matches that of `b`.
DiscreteCurve align_horizontal(const DiscreteCurve& a, const DiscreteCurve& b);

DiscreteCurve make_segment(Vec2 a, Vec2 b, int N, bool constrained = false);
// Counterclockwise upper semicircle from (c+R, 0) to (c-R, 0).
DiscreteCurve make_semicircle(double R, int N, double center_x = 0.0, bool constrained = true);

}  // namespace elflow
