#pragma once
#include <memory>
#include <vector>

namespace elflow {

// Finite-difference weights for the m-th derivative at z from nodes x (Fornberg recursion).
std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m);

struct StencilRow {
    int start = 0;
    std::vector<double> w;
};

// Sixth-order derivative stencils on the uniform parameter grid x_i = i/N, i = 0..N.
// Centered where the stencil fits, one-sided of width m+6 near the ends.
class Stencils {
public:
    static constexpr int kOrder = 6;
    static constexpr int kBoundaryOrder = 6;
    static constexpr int kMaxDerivative = 4;

    explicit Stencils(int N);

    int nodes() const { return N_ + 1; }
    int intervals() const { return N_; }
    const StencilRow& row(int m, int i) const { return rows_[m - 1][i]; }

    template <class T, class Get>
    T apply(int m, int i, Get&& get) const {
        const StencilRow& r = row(m, i);
        T acc{};
        for (std::size_t j = 0; j < r.w.size(); ++j) acc = acc + r.w[j] * get(r.start + static_cast<int>(j));
        return acc;
    }

    // Gregory end-corrected trapezoid weights in the parameter (sum = 1).
    const std::vector<double>& quadrature() const { return quad_; }

private:
    int N_;
    std::vector<std::vector<StencilRow>> rows_;
    std::vector<double> quad_;
};

// Shared, immutable stencil set for a given N.
std::shared_ptr<const Stencils> stencils_for(int N);

}  // namespace elflow
