#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "elflow/cli_io.hpp"
#include "elflow/diagnostics.hpp"
#include "elflow/elastica_solver.hpp"
#include "elflow/energy_variations.hpp"
#include "elflow/flow_solver.hpp"

using namespace elflow;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
    std::printf("criterion %2d %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// Worst row of a verify suite, optionally restricted to labels containing `filter`.
struct SuiteSummary {
    bool pass = true;
    int rows = 0;
    std::string worst;
};

SuiteSummary summarize(const std::vector<CheckRow>& rows, const std::string& filter) {
    SuiteSummary s;
    for (const CheckRow& r : rows) {
        if (!filter.empty() && r.label.find(filter) == std::string::npos) continue;
        ++s.rows;
        if (!r.pass) {
            s.pass = false;
            s.worst += " [" + r.label + " = " + fmt("%.3e", r.value) + "]";
        }
    }
    return s;
}

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream log;
    VerifySelection sel;
    sel.variations = true;
    const std::vector<CheckRow> rows = run_verify(sel, log);
    const double secs = seconds_since(t0);
    double worst_err = 0.0, min_order = 1e300;
    for (const CheckRow& r : rows) {
        if (r.label.find("rel_err") != std::string::npos) worst_err = std::max(worst_err, r.value);
        if (r.label.find("order") != std::string::npos) min_order = std::min(min_order, r.value);
    }
    const SuiteSummary s = summarize(rows, "");
    verdict(1, s.pass && s.rows == 18 && secs < 10.0,
            fmt("max rel_err %.2e, min order %.3f, %.1f s", worst_err, min_order, secs) + s.worst);
}

void criterion_2() {
    std::ostringstream log;
    VerifySelection sel;
    sel.scaling = true;
    const std::vector<CheckRow> rows = run_verify(sel, log);
    double tr = 0.0, dil = 0.0;
    for (const CheckRow& r : rows) {
        if (r.label.find("translation") != std::string::npos) tr = std::max(tr, r.value);
        if (r.label.find("dilation") != std::string::npos) dil = std::max(dil, r.value);
    }
    const SuiteSummary a = summarize(rows, "translation");
    const SuiteSummary b = summarize(rows, "dilation");
    verdict(2, a.pass && b.pass && a.rows == 3 && b.rows == 3,
            fmt("translation max %.2e, dilation max rel %.2e", tr, dil) + a.worst + b.worst);
}

void criterion_3() {
    std::ostringstream log;
    VerifySelection sel;
    sel.ibp = true;
    const std::vector<CheckRow> rows = run_verify(sel, log);
    double min_order = 1e300;
    for (const CheckRow& r : rows) min_order = std::min(min_order, r.value);
    const SuiteSummary s = summarize(rows, "");
    verdict(3, s.pass && s.rows == 4, fmt("min observed order %.2f over 64->128->256", min_order) + s.worst);
}

struct AcceptanceRun {
    RunResult result;
    ConvergenceReport report;
    double seconds = 0.0;
};

AcceptanceRun acceptance_run() {
    FlowConfig cfg;  // mu 1, N 200, dt 0.1 h^2, u_tol 1e-8
    const auto t0 = std::chrono::steady_clock::now();
    AcceptanceRun a;
    a.result = run(arc_perturbed(1e-2, 7, 1.0, cfg.n_nodes), cfg);
    a.seconds = seconds_since(t0);
    a.report = convergence_report(a.result.trace);
    std::printf("acceptance run: %s at t = %.4f after %ld steps (%.1f s), dt %.3e\n", stop_reason_name(a.result.reason),
                a.result.final_state.time, a.result.steps, a.seconds, a.result.dt);
    return a;
}

void criterion_4(const AcceptanceRun& a) {
    const DissipationCheck c = check_dissipation_identity(a.result.trace);
    int strict_increases = 0;
    const auto& s = a.result.trace.samples;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].energy > s[i - 1].energy) ++strict_increases;
    verdict(4, c.fraction() >= 0.95 && strict_increases == 0 && c.energy_increases == 0,
            fmt("identity holds on %.0f of %.0f intervals (%.1f%%), energy increases %.0f", c.passed, c.intervals,
                100.0 * c.fraction(), strict_increases));
}

void criterion_5(const AcceptanceRun& a) {
    const ElasticaSolution arc = reference_arc(1.0);
    const DiscreteCurve oracle = elastica_curve(arc.params, 1.0, 2048);
    const DiscreteCurve final_curve = align_horizontal(a.result.final_state.curve, oracle);
    const double hd = hausdorff_distance(final_curve, oracle);
    const FlowConfig cfg;
    const bool converged = a.result.reason == StopReason::Converged && a.result.final_state.time < cfg.t_max;
    verdict(5, converged && hd <= 1e-4 && a.seconds <= 300.0,
            std::string(stop_reason_name(a.result.reason)) + fmt(", final u %.2e, Hausdorff %.2e, %.1f s",
                                                                 a.result.trace.samples.back().dissipation, hd, a.seconds));
}

void criterion_6(const AcceptanceRun& a) {
    const double c = 0.8;
    std::vector<double> times;
    for (int i = 0; i <= 80; ++i) times.push_back(0.1 * i);
    const FlowTrace syn = synthetic_trace(
        times, 3.0, [](double t) { return std::exp(-2.0 * t); }, [&](double t) { return c * std::exp(-t); });
    const LojasiewiczFit sf = fit_lojasiewicz(syn, 3.0);
    const bool synthetic_ok = std::abs(sf.theta_hat - 0.5) <= 1e-6;
    const ConvergenceReport& r = a.report;
    const bool run_ok = r.have_decay && r.have_fit && r.decay.fit_r2 >= 0.99 && r.theta_hat > 0.0 && r.theta_hat <= 0.5;
    if (r.have_fit && r.theta_hat < 0.45) std::printf("warning: theta_hat %.4f below the soft expectation 0.45\n", r.theta_hat);
    verdict(6, synthetic_ok && run_ok,
            fmt("synthetic theta error %.1e; run decay rate %.3f R2 %.5f, theta_hat %.4f", std::abs(sf.theta_hat - 0.5),
                r.decay.rate, r.decay.fit_r2, r.theta_hat));
}

void criterion_7(const AcceptanceRun& a) {
    const CompactnessReport c = compactness_report(a.result.trace);
    const double envelope = 2.0 * c.initial_diam + 2.0 * c.initial_length;
    verdict(7, c.length_lo > 0.0 && c.within_envelope,
            fmt("length in [%.6f, %.6f], max diameter %.4f <= %.4f", c.length_lo, c.length_hi, c.max_bbox_diam, envelope));
}

void criterion_8() {
    const double pi = std::acos(-1.0);
    const double e1 = std::abs(energy(make_semicircle(1.0, 1000), 1.0) - 2.0 * pi);
    const double e2 = std::abs(energy(make_semicircle(0.5, 1000), 4.0) - 4.0 * pi);
    verdict(8, e1 <= 1e-6 && e2 <= 1e-6, fmt("errors %.2e (R=1, mu=1), %.2e (R=1/2, mu=4)", e1, e2));
}

void criterion_9() {
    double worst_res = 0.0, worst_dual = 0.0, worst_family = 0.0;
    int count = 0;
    bool ok = true;
    const ElasticaSolution base = reference_arc(1.0);
    for (double mu : {0.25, 1.0, 4.0}) {
        const std::vector<ElasticaSolution> sols = find_elasticae(mu);
        if (sols.empty()) ok = false;
        for (const ElasticaSolution& s : sols) {
            ++count;
            worst_res = std::max({worst_res, s.ode_residual, s.bc_residuals.max_abs()});
            worst_dual = std::max(worst_dual, gradient(elastica_curve(s.params, mu, 200), mu).dual_norm);
        }
        const ElasticaSolution r = reference_arc(mu);
        const double lam = std::sqrt(mu);
        worst_family = std::max({worst_family, std::abs(r.params.L - base.params.L / lam), std::abs(r.params.phi0 - base.params.phi0),
                                 std::abs(r.params.a - base.params.a * mu), std::abs(r.energy - base.energy * lam)});
    }
    ok = ok && worst_res <= 1e-10 && worst_family <= 1e-8 && worst_dual <= 1e-6;
    verdict(9, ok, fmt("%.0f solutions, max residual %.2e, family deviation %.2e, max dual_norm %.2e", count, worst_res,
                       worst_family, worst_dual));
}

void criterion_10() {
    FlowConfig cfg;
    cfg.mu = 4.0;
    cfg.t_max = 30.0;
    const auto t0 = std::chrono::steady_clock::now();
    bool nan = false;
    std::string detail;
    try {
        // odd perturbation modes excite the unstable direction of the arc
        const RunResult r = run(arc_perturbed(1e-2, 8, cfg.mu, cfg.n_nodes, false), cfg);
        for (const TraceSample& s : r.trace.samples)
            if (!std::isfinite(s.energy) || !std::isfinite(s.dissipation) || !std::isfinite(s.tangency)) nan = true;
        const bool singular = r.reason == StopReason::BoundaryTangency || r.reason == StopReason::LengthCollapse;
        detail = std::string(stop_reason_name(r.reason)) + fmt(" at t = %.4f, tangency %.2e, %.1f s", r.final_state.time,
                                                                r.trace.samples.back().tangency, seconds_since(t0));
        verdict(10, singular && !nan, detail + (nan ? ", non-finite samples" : ""));
    } catch (const std::exception& e) {
        verdict(10, false, std::string("exception: ") + e.what());
    }
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    const AcceptanceRun a = acceptance_run();
    criterion_4(a);
    criterion_5(a);
    criterion_6(a);
    criterion_7(a);
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
