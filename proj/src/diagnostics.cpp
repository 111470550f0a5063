#include "elflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace elflow {

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorKind::InsufficientSamples, "regression data has no spread");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return f;
}

void require_samples(const FlowTrace& trace, std::size_t n, const char* what) {
    if (trace.samples.size() < n) throw Error(ErrorKind::EmptyTrace, std::string(what) + ": trace too short");
}

}  // namespace

double energy_gap(double energy, double E_inf) { return std::max(energy - E_inf, kGapFloor); }

ConvergenceReport dissipation_report(const FlowTrace& trace, double E_inf) {
    require_samples(trace, 1, "dissipation_report");
    const auto& s = trace.samples;
    ConvergenceReport r;
    r.E0 = s.front().energy;
    r.E_final = s.back().energy;
    r.E_inf = E_inf;
    bool step_resolved = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        r.energy_gap_series.emplace_back(s[i].t, energy_gap(s[i].energy, E_inf));
        if (i > 0) r.u_integral_samples += 0.5 * (s[i].t - s[i - 1].t) * (s[i].dissipation + s[i - 1].dissipation);
        if (s[i].dissipated > 0.0) step_resolved = true;
    }
    r.u_integral = step_resolved ? s.back().dissipated : r.u_integral_samples;
    r.integral_bounded = r.u_integral <= 1.05 * std::max(r.E0 - E_inf, 0.0) + 1e-12;
    r.gap_nonincreasing = true;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double dt = s[i].t - s[i - 1].t;
        if (s[i].energy > s[i - 1].energy + 1e-3 * dt * (1.0 + s[i - 1].dissipation)) r.gap_nonincreasing = false;
    }
    return r;
}

LojasiewiczFit fit_lojasiewicz(const FlowTrace& trace, double E_inf, double sigma) {
    require_samples(trace, 2, "fit_lojasiewicz");
    const auto& s = trace.samples;
    std::vector<double> lx, ly;
    for (std::size_t i = s.size() / 5; i < s.size(); ++i) {
        const double gap = s[i].energy - E_inf;
        if (!(gap > 1e-10 && gap < sigma && s[i].dual_norm > 0.0)) continue;
        lx.push_back(std::log(s[i].dual_norm));
        ly.push_back(std::log(gap));
    }
    if (lx.size() < 10) throw Error(ErrorKind::InsufficientSamples, "fewer than 10 samples in the Lojasiewicz window");
    const LineFit f = least_squares(lx, ly);
    LojasiewiczFit out;
    out.samples = static_cast<int>(lx.size());
    out.slope = f.slope;
    out.theta_raw = 1.0 - 1.0 / f.slope;
    out.theta_hat = std::clamp(out.theta_raw, std::nextafter(0.0, 1.0), 0.5);
    out.C_hat = std::exp(f.intercept / f.slope);
    out.fit_r2 = f.r2;
    return out;
}

DecayFit decay_rate_fit(const FlowTrace& trace, double E_inf) {
    require_samples(trace, 2, "decay_rate_fit");
    const auto& s = trace.samples;
    std::vector<double> t, lg;
    for (std::size_t i = s.size() / 2; i < s.size(); ++i) {
        const double gap = s[i].energy - E_inf;
        if (!(gap > kGapFloor)) continue;
        t.push_back(s[i].t);
        lg.push_back(std::log(gap));
    }
    if (t.size() < 10) throw Error(ErrorKind::InsufficientSamples, "fewer than 10 tail samples above the gap floor");
    const LineFit f = least_squares(t, lg);
    return {f.slope, f.r2, static_cast<int>(t.size())};
}

CompactnessReport compactness_report(const FlowTrace& trace) {
    require_samples(trace, 1, "compactness_report");
    const auto& s = trace.samples;
    CompactnessReport r;
    r.initial_diam = s.front().bbox.diameter();
    r.initial_length = s.front().length;
    r.length_lo = r.length_hi = s.front().length;
    r.hull = s.front().bbox;
    for (const TraceSample& smp : s) {
        r.max_bbox_diam = std::max(r.max_bbox_diam, smp.bbox.diameter());
        r.length_lo = std::min(r.length_lo, smp.length);
        r.length_hi = std::max(r.length_hi, smp.length);
        r.hull.xmin = std::min(r.hull.xmin, smp.bbox.xmin);
        r.hull.xmax = std::max(r.hull.xmax, smp.bbox.xmax);
        r.hull.ymin = std::min(r.hull.ymin, smp.bbox.ymin);
        r.hull.ymax = std::max(r.hull.ymax, smp.bbox.ymax);
    }
    r.within_envelope = r.max_bbox_diam <= 2.0 * r.initial_diam + 2.0 * r.initial_length;
    return r;
}

DissipationCheck check_dissipation_identity(const FlowTrace& trace, double rel_tol) {
    require_samples(trace, 2, "check_dissipation_identity");
    const auto& s = trace.samples;
    DissipationCheck c;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double dt = s[i].t - s[i - 1].t;
        if (!(dt > 0.0)) continue;
        const double rate = (s[i].energy - s[i - 1].energy) / dt;
        const double u = 0.5 * (s[i].dissipation + s[i - 1].dissipation);
        ++c.intervals;
        if (std::abs(rate + u) <= rel_tol * (u + 1.0)) ++c.passed;
        if (s[i].energy > s[i - 1].energy + 1e-3 * dt * (1.0 + s[i - 1].dissipation)) ++c.energy_increases;
    }
    return c;
}

int h_function_violations(const FlowTrace& trace, double E_inf, double theta, double tol) {
    int bad = 0;
    const auto& s = trace.samples;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double h0 = std::pow(energy_gap(s[i - 1].energy, E_inf), theta);
        const double h1 = std::pow(energy_gap(s[i].energy, E_inf), theta);
        if (h1 > h0 + tol) ++bad;
    }
    return bad;
}

double limit_energy_estimate(const FlowTrace& trace) {
    require_samples(trace, 1, "limit_energy_estimate");
    const auto& s = trace.samples;
    std::vector<double> t, lu;
    for (std::size_t i = s.size() / 2; i < s.size(); ++i) {
        if (!(s[i].dissipation > 0.0)) continue;
        t.push_back(s[i].t);
        lu.push_back(std::log(s[i].dissipation));
    }
    if (t.size() < 10) return s.back().energy;
    LineFit f;
    try {
        f = least_squares(t, lu);
    } catch (const Error&) {
        return s.back().energy;
    }
    if (!(f.slope < 0.0)) return s.back().energy;
    return s.back().energy - s.back().dissipation / -f.slope;
}

ConvergenceReport convergence_report(const FlowTrace& trace) {
    return convergence_report(trace, limit_energy_estimate(trace));
}

ConvergenceReport convergence_report(const FlowTrace& trace, double E_inf) {
    ConvergenceReport r = dissipation_report(trace, E_inf);
    try {
        r.lojasiewicz = fit_lojasiewicz(trace, E_inf);
        r.have_fit = true;
        r.theta_hat = r.lojasiewicz.theta_hat;
        r.C_hat = r.lojasiewicz.C_hat;
        r.fit_r2 = r.lojasiewicz.fit_r2;
        if (r.theta_hat < 0.45 && r.fit_r2 >= 0.99)
            r.warnings.push_back("theta_hat " + std::to_string(r.theta_hat) + " below the nondegenerate expectation 0.45");
        r.h_violations = h_function_violations(trace, E_inf, r.theta_hat);
    } catch (const Error& e) {
        r.warnings.push_back(std::string("lojasiewicz fit skipped: ") + e.what());
    }
    try {
        r.decay = decay_rate_fit(trace, E_inf);
        r.have_decay = true;
        r.decay_rate = r.decay.rate;
    } catch (const Error& e) {
        r.warnings.push_back(std::string("decay fit skipped: ") + e.what());
    }
    const CompactnessReport c = compactness_report(trace);
    r.max_bbox_diam = c.max_bbox_diam;
    r.length_range = {c.length_lo, c.length_hi};
    if (!r.integral_bounded) r.warnings.push_back("dissipation integral exceeds the energy drop by more than 5%");
    if (!r.gap_nonincreasing) r.warnings.push_back("energy gap increases between samples");
    return r;
}

FlowTrace synthetic_trace(const std::vector<double>& times, double E_inf, const std::function<double(double)>& gap,
                          const std::function<double(double)>& dual_norm) {
    FlowTrace tr;
    for (std::size_t i = 0; i < times.size(); ++i) {
        TraceSample s;
        s.t = times[i];
        s.energy = E_inf + gap(s.t);
        s.dual_norm = dual_norm(s.t);
        s.dissipation = s.dual_norm * s.dual_norm;
        s.length = 1.0;
        s.bbox = {0.0, 1.0, 0.0, 0.5};
        s.tangency = 1.0;
        s.step = static_cast<long>(i);
        tr.samples.push_back(s);
    }
    return tr;
}

}  // namespace elflow
