#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "elflow/diagnostics.hpp"
#include "elflow/elastica_solver.hpp"
#include "test_util.hpp"

using namespace elflow;
using elflow::test::error_kind;

namespace {

std::vector<double> grid(double t0, double t1, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t0 + (t1 - t0) * i / (n - 1);
    return t;
}

}  // namespace

TEST_CASE("known exponent one half is recovered") {
    const double c = 0.8;
    const FlowTrace tr = synthetic_trace(
        grid(0.0, 8.0, 81), 3.0, [](double t) { return std::exp(-2.0 * t); }, [&](double t) { return c * std::exp(-t); });
    const LojasiewiczFit f = fit_lojasiewicz(tr, 3.0);
    CHECK(std::abs(f.theta_hat - 0.5) <= 1e-6);
    CHECK(std::abs(f.theta_raw - 0.5) <= 1e-6);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(f.fit_r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.C_hat == doctest::Approx(1.0 / c).epsilon(1e-6));
}

TEST_CASE("known exponent below one half") {
    const FlowTrace tr = synthetic_trace(
        grid(0.0, 8.0, 81), 0.0, [](double t) { return std::exp(-2.0 * t); }, [](double t) { return std::exp(-4.0 * t / 3.0); });
    const LojasiewiczFit f = fit_lojasiewicz(tr, 0.0);
    CHECK(std::abs(f.theta_hat - 1.0 / 3.0) <= 1e-6);
    const ConvergenceReport r = convergence_report(tr, 0.0);
    CHECK(r.have_fit);
    REQUIRE_FALSE(r.warnings.empty());
    CHECK(r.warnings.front().find("theta_hat") != std::string::npos);
}

TEST_CASE("exponents above one half are clamped") {
    const FlowTrace tr = synthetic_trace(
        grid(0.0, 8.0, 81), 0.0, [](double t) { return std::exp(-2.0 * t); }, [](double t) { return std::exp(-0.5 * t); });
    const LojasiewiczFit f = fit_lojasiewicz(tr, 0.0);
    CHECK(f.theta_raw == doctest::Approx(0.75));
    CHECK(f.theta_hat == 0.5);
}

TEST_CASE("exponential decay rate") {
    const FlowTrace tr = synthetic_trace(
        grid(0.0, 20.0, 101), 1.0, [](double t) { return 3.0 * std::exp(-0.7 * t); }, [](double t) { return std::exp(-0.35 * t); });
    const DecayFit d = decay_rate_fit(tr, 1.0);
    CHECK(std::abs(d.rate + 0.7) <= 1e-6);
    CHECK(d.fit_r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.samples >= 10);
}

TEST_CASE("fits refuse degenerate traces") {
    const FlowTrace flat = synthetic_trace(
        grid(0.0, 1.0, 40), 0.0, [](double) { return 0.5; }, [](double) { return 0.1; });
    CHECK(error_kind([&] { fit_lojasiewicz(flat, 0.0); }) == ErrorKind::InsufficientSamples);
    CHECK(error_kind([&] { decay_rate_fit(flat, 0.0); }) == ErrorKind::InsufficientSamples);

    const FlowTrace one = synthetic_trace({0.0}, 0.0, [](double) { return 1.0; }, [](double) { return 1.0; });
    CHECK(error_kind([&] { fit_lojasiewicz(one, 0.0); }) == ErrorKind::EmptyTrace);
    CHECK(error_kind([&] { decay_rate_fit(one, 0.0); }) == ErrorKind::EmptyTrace);
    CHECK(error_kind([&] { check_dissipation_identity(one); }) == ErrorKind::EmptyTrace);
    const ConvergenceReport r = dissipation_report(one, 0.0);
    CHECK(r.u_integral == 0.0);
    CHECK(r.energy_gap_series.size() == 1);

    const FlowTrace empty;
    CHECK(error_kind([&] { dissipation_report(empty, 0.0); }) == ErrorKind::EmptyTrace);
    CHECK(error_kind([&] { compactness_report(empty); }) == ErrorKind::EmptyTrace);

    const ConvergenceReport soft = convergence_report(flat, 0.0);
    CHECK_FALSE(soft.have_fit);
    CHECK_FALSE(soft.have_decay);
    CHECK(soft.warnings.size() >= 2);
}

TEST_CASE("energy gap is floored before logarithms") {
    CHECK(energy_gap(1.0, 2.0) == kGapFloor);
    CHECK(energy_gap(2.5, 2.0) == 0.5);
}

TEST_CASE("dissipation integral and identity on a consistent trace") {
    const FlowTrace tr = synthetic_trace(
        grid(0.0, 5.0, 501), 2.0, [](double t) { return std::exp(-2.0 * t); }, [](double t) { return std::sqrt(2.0) * std::exp(-t); });
    const ConvergenceReport r = dissipation_report(tr, 2.0);
    CHECK(r.E0 == doctest::Approx(3.0));
    CHECK(r.u_integral == doctest::Approx(r.u_integral_samples));
    CHECK(r.u_integral == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-3));
    CHECK(r.integral_bounded);
    CHECK(r.gap_nonincreasing);
    const DissipationCheck c = check_dissipation_identity(tr);
    CHECK(c.intervals == 500);
    CHECK(c.fraction() == 1.0);
    CHECK(c.energy_increases == 0);
    CHECK(h_function_violations(tr, 2.0, 0.5) == 0);
}

TEST_CASE("energy increase is counted") {
    FlowTrace tr = synthetic_trace(
        grid(0.0, 1.0, 11), 0.0, [](double t) { return 1.0 - 0.5 * t; }, [](double) { return std::sqrt(0.5); });
    tr.samples[5].energy += 0.1;
    const DissipationCheck c = check_dissipation_identity(tr);
    CHECK(c.energy_increases == 1);
    CHECK(c.passed <= c.intervals - 2);
    CHECK_FALSE(dissipation_report(tr, 0.0).gap_nonincreasing);
}

TEST_CASE("step-resolved dissipation takes precedence") {
    FlowTrace tr = synthetic_trace(grid(0.0, 1.0, 3), 0.0, [](double) { return 1.0; }, [](double) { return 1.0; });
    tr.samples[1].dissipated = 0.25;
    tr.samples[2].dissipated = 0.75;
    const ConvergenceReport r = dissipation_report(tr, 0.0);
    CHECK(r.u_integral == 0.75);
    CHECK(r.u_integral_samples == doctest::Approx(1.0));
}

TEST_CASE("limit energy removes the remaining dissipation") {
    const double kappa = 1.5;
    const FlowTrace tr = synthetic_trace(
        grid(0.0, 10.0, 101), 4.0, [&](double t) { return std::exp(-kappa * t); },
        [&](double t) { return std::sqrt(kappa) * std::exp(-0.5 * kappa * t); });
    CHECK(limit_energy_estimate(tr) == doctest::Approx(4.0).epsilon(1e-12));
    const FlowTrace shortr = synthetic_trace(grid(0.0, 1.0, 5), 4.0, [](double) { return 1.0; }, [](double) { return 1.0; });
    CHECK(limit_energy_estimate(shortr) == 5.0);
}

TEST_CASE("stationary start has no dissipation") {
    FlowConfig cfg;
    const ElasticaSolution arc = reference_arc(1.0);
    const RunResult r = run(elastica_curve(arc.params, 1.0, 200), cfg);
    const ConvergenceReport rep = dissipation_report(r.trace, r.trace.samples.back().energy);
    CHECK(rep.u_integral <= 1e-8);
}

TEST_CASE("compactness report follows translations") {
    FlowTrace tr = synthetic_trace(grid(0.0, 1.0, 5), 0.0, [](double) { return 1.0; }, [](double) { return 1.0; });
    tr.samples[2].bbox = {0.0, 2.0, 0.0, 1.0};
    tr.samples[3].length = 0.5;
    const CompactnessReport a = compactness_report(tr);
    FlowTrace moved = tr;
    for (TraceSample& s : moved.samples) {
        s.bbox.xmin += 7.0;
        s.bbox.xmax += 7.0;
    }
    const CompactnessReport b = compactness_report(moved);
    CHECK(a.max_bbox_diam == doctest::Approx(std::sqrt(5.0)));
    CHECK(b.max_bbox_diam == doctest::Approx(a.max_bbox_diam));
    CHECK(b.hull.xmin == doctest::Approx(a.hull.xmin + 7.0));
    CHECK(a.length_lo == 0.5);
    CHECK(a.length_hi == 1.0);
    CHECK(a.within_envelope);
    tr.samples[4].bbox = {0.0, 10.0, 0.0, 0.0};
    CHECK_FALSE(compactness_report(tr).within_envelope);
}
