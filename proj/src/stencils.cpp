#include "elflow/stencils.hpp"

#include <map>
#include <mutex>

#include "elflow/common.hpp"

namespace elflow {

std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k > 0; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n + 1);
    for (int i = 0; i <= n; ++i) w[i] = c[i][m];
    return w;
}

Stencils::Stencils(int N) : N_(N), rows_(kMaxDerivative) {
    if (N < 16) throw Error(ErrorKind::InvalidArgument, "at least 16 intervals are required");
    for (int m = 1; m <= kMaxDerivative; ++m) {
        const int centered = 2 * ((m + 1) / 2) - 1 + kOrder;
        const int half = centered / 2;
        const int one_sided = m + kBoundaryOrder;
        const double scale = std::pow(static_cast<double>(N), m);
        auto& rows = rows_[m - 1];
        rows.resize(N + 1);
        for (int i = 0; i <= N; ++i) {
            int start = i - half;
            int width = centered;
            if (i - half < 0) {
                start = 0;
                width = one_sided;
            } else if (i + half > N) {
                start = N + 1 - one_sided;
                width = one_sided;
            }
            std::vector<double> x(width);
            for (int j = 0; j < width; ++j) x[j] = static_cast<double>(start + j - i);
            std::vector<double> w = fornberg_weights(0.0, x, m);
            for (double& v : w) v *= scale;
            rows[i] = StencilRow{start, std::move(w)};
        }
    }
    quad_.assign(N + 1, 1.0);
    const double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
    for (int j = 0; j < 3; ++j) {
        quad_[j] = ends[j];
        quad_[N - j] = ends[j];
    }
    for (double& q : quad_) q /= N;
}

std::shared_ptr<const Stencils> stencils_for(int N) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const Stencils>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(N);
    if (it != cache.end()) return it->second;
    auto s = std::make_shared<const Stencils>(N);
    cache.emplace(N, s);
    return s;
}

}  // namespace elflow
