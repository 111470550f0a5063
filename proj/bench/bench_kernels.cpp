#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "elflow/curve_geometry.hpp"
#include "elflow/elastica_solver.hpp"

using namespace elflow;

namespace {

double best_of(int reps, const std::function<void()>& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %10.4f ms  parallel %10.4f ms  speedup %6.2f\n", name, 1e3 * serial, 1e3 * parallel, serial / parallel);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    for (int N : {4096, 32768, 262144}) {
        const DiscreteCurve c = make_semicircle(1.0, N);
        volatile double sink = 0.0;
        const double ts = best_of(5, [&] { sink = sink + build_cache_serial(c).total_len; });
        const double tp = best_of(5, [&] { sink = sink + build_cache(c).total_len; });
        char name[64];
        std::snprintf(name, sizeof name, "build_cache N=%d", N);
        report(name, ts, tp);
    }
    for (double mu : {0.25, 1.0, 4.0}) {
        std::size_t n = 0;
        const double ts = best_of(3, [&] { n += seed_scan_serial(mu).size(); });
        const double tp = best_of(3, [&] { n += seed_scan(mu).size(); });
        char name[64];
        std::snprintf(name, sizeof name, "seed_scan mu=%g", mu);
        report(name, ts, tp);
    }
    return 0;
}
