#include "elflow/cli_io.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <regex>
#include <sstream>

#include "elflow/energy_variations.hpp"

namespace elflow {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

int exit_code_for(StopReason reason) {
    switch (reason) {
        case StopReason::Converged:
            return exit_code::ok;
        case StopReason::MaxTimeReached:
            return exit_code::max_time;
        case StopReason::LengthCollapse:
            return exit_code::length_collapse;
        case StopReason::BoundaryTangency:
            return exit_code::boundary_tangency;
        case StopReason::StepFailure:
            return exit_code::step_failure;
    }
    return exit_code::failure;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
        throw Error(ErrorKind::ConfigParse, key + ": expected a finite number, got '" + text + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw Error(ErrorKind::ConfigParse, key + ": expected an integer, got '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw Error(ErrorKind::ConfigParse, key + ": expected an unsigned integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw Error(ErrorKind::ConfigParse, key + ": expected a boolean, got '" + text + "'");
}

// Shortest text that reads back to the same double.
std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void require(bool ok, const std::string& key, const char* rule) {
    if (!ok) throw Error(ErrorKind::ConfigParse, key + " must be " + rule);
}

struct Key {
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Key>& config_keys() {
    static const std::vector<Key> keys = {
        {"mu",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.mu = parse_double("mu", v);
             require(c.flow.mu > 0.0, "mu", "positive");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.mu); }},
        {"dt",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.dt = parse_double("dt", v);
             require(c.flow.dt >= 0.0, "dt", "non-negative (0 selects 0.1 h^2)");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.dt); }},
        {"n_nodes",
         [](ExperimentConfig& c, const std::string& v) {
             const long long n = parse_int("n_nodes", v);
             require(n >= 16 && n <= 1000000, "n_nodes", "in [16, 1000000]");
             c.flow.n_nodes = static_cast<int>(n);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.flow.n_nodes); }},
        {"t_max",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.t_max = parse_double("t_max", v);
             require(c.flow.t_max >= 0.0, "t_max", "non-negative");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.t_max); }},
        {"u_tol",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.u_tol = parse_double("u_tol", v);
             require(c.flow.u_tol > 0.0, "u_tol", "positive");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.u_tol); }},
        {"rho_min",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.rho_min = parse_double("rho_min", v);
             require(c.flow.rho_min > 0.0 && c.flow.rho_min < 1.0, "rho_min", "in (0, 1)");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.rho_min); }},
        {"len_min",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.len_min = parse_double("len_min", v);
             require(c.flow.len_min >= 0.0, "len_min", "non-negative");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.len_min); }},
        {"reparam_every",
         [](ExperimentConfig& c, const std::string& v) {
             const long long n = parse_int("reparam_every", v);
             require(n >= 0 && n <= 1000000000, "reparam_every", "non-negative");
             c.flow.reparam_every = static_cast<int>(n);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.flow.reparam_every); }},
        {"snapshot_every",
         [](ExperimentConfig& c, const std::string& v) {
             const long long n = parse_int("snapshot_every", v);
             require(n >= 1 && n <= 1000000000, "snapshot_every", "positive");
             c.flow.snapshot_every = static_cast<int>(n);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.flow.snapshot_every); }},
        {"require_admissible",
         [](ExperimentConfig& c, const std::string& v) { c.flow.require_admissible = parse_bool("require_admissible", v); },
         [](const ExperimentConfig& c) { return std::string(c.flow.require_admissible ? "true" : "false"); }},
        {"admissible_tol",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.admissible_tol = parse_double("admissible_tol", v);
             require(c.flow.admissible_tol > 0.0, "admissible_tol", "positive");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.admissible_tol); }},
        {"fourth_order_tol",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.fourth_order_tol = parse_double("fourth_order_tol", v);
             require(c.flow.fourth_order_tol > 0.0, "fourth_order_tol", "positive");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.fourth_order_tol); }},
        {"max_retries",
         [](ExperimentConfig& c, const std::string& v) {
             const long long n = parse_int("max_retries", v);
             require(n >= 0 && n <= 60, "max_retries", "in [0, 60]");
             c.flow.max_retries = static_cast<int>(n);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.flow.max_retries); }},
        {"startup_fraction",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.startup_fraction = parse_double("startup_fraction", v);
             require(c.flow.startup_fraction > 0.0 && c.flow.startup_fraction <= 1.0, "startup_fraction", "in (0, 1]");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.startup_fraction); }},
        {"startup_growth",
         [](ExperimentConfig& c, const std::string& v) {
             c.flow.startup_growth = parse_double("startup_growth", v);
             require(c.flow.startup_growth > 1.0, "startup_growth", "greater than 1");
         },
         [](const ExperimentConfig& c) { return fmt_double(c.flow.startup_growth); }},
        {"initial_curve", [](ExperimentConfig& c, const std::string& v) { c.initial = parse_initial_curve(v); },
         [](const ExperimentConfig& c) { return describe(c.initial); }},
        {"output_dir",
         [](ExperimentConfig& c, const std::string& v) {
             c.output_dir = trim(v);
             require(!c.output_dir.empty(), "output_dir", "non-empty");
         },
         [](const ExperimentConfig& c) { return c.output_dir; }},
        {"rng_seed", [](ExperimentConfig& c, const std::string& v) { c.rng_seed = parse_u64("rng_seed", v); },
         [](const ExperimentConfig& c) { return std::to_string(c.rng_seed); }},
    };
    return keys;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

const double kPi = std::acos(-1.0);

}  // namespace

InitialCurveSpec parse_initial_curve(const std::string& text) {
    static const std::regex call(R"(^\s*([a-z_]+)\s*\((.*)\)\s*$)");
    static const std::regex bare(R"(^\s*([a-z_]+)\s*$)");
    InitialCurveSpec spec;
    std::smatch m;
    std::string name, args;
    if (std::regex_match(text, m, call)) {
        name = m[1];
        args = m[2];
    } else if (std::regex_match(text, m, bare) && (m[1] == "segment" || m[1] == "semicircle" || m[1] == "arc_perturbed")) {
        name = m[1];
    } else {
        spec.kind = GeneratorKind::File;
        spec.path = trim(text);
        if (spec.path.empty()) throw Error(ErrorKind::ConfigParse, "initial_curve is empty");
        return spec;
    }
    std::vector<std::string> parts;
    if (!trim(args).empty()) {
        std::stringstream ss(args);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    }
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() < lo || parts.size() > hi)
            throw Error(ErrorKind::ConfigParse, "initial_curve " + name + ": wrong number of arguments");
    };
    if (name == "segment") {
        arity(0, 0);
        spec.kind = GeneratorKind::Segment;
    } else if (name == "semicircle") {
        arity(0, 1);
        spec.kind = GeneratorKind::Semicircle;
        if (!parts.empty()) spec.radius = parse_double("semicircle radius", parts[0]);
        require(spec.radius > 0.0, "semicircle radius", "positive");
    } else if (name == "arc_perturbed" || name == "arc_perturbed_asym") {
        arity(0, 2);
        spec.kind = name == "arc_perturbed" ? GeneratorKind::ArcPerturbed : GeneratorKind::ArcPerturbedAsym;
        if (!parts.empty()) spec.amplitude = parse_double("perturbation amplitude", parts[0]);
        require(spec.amplitude >= 0.0 && spec.amplitude <= 0.2, "perturbation amplitude", "in [0, 0.2]");
        if (parts.size() == 2) {
            spec.has_seed = true;
            spec.seed = parse_u64("perturbation seed", parts[1]);
        }
    } else if (name == "file") {
        arity(1, 1);
        spec.kind = GeneratorKind::File;
        spec.path = parts[0];
    } else {
        throw Error(ErrorKind::ConfigParse, "unknown initial_curve generator '" + name + "'");
    }
    return spec;
}

std::string describe(const InitialCurveSpec& spec) {
    switch (spec.kind) {
        case GeneratorKind::Segment:
            return "segment";
        case GeneratorKind::Semicircle:
            return "semicircle(" + fmt_double(spec.radius) + ")";
        case GeneratorKind::ArcPerturbed:
        case GeneratorKind::ArcPerturbedAsym: {
            std::string s = spec.kind == GeneratorKind::ArcPerturbed ? "arc_perturbed(" : "arc_perturbed_asym(";
            s += fmt_double(spec.amplitude);
            if (spec.has_seed) s += ", " + std::to_string(spec.seed);
            return s + ")";
        }
        case GeneratorKind::File:
            return "file(" + spec.path + ")";
    }
    return {};
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    for (const Key& k : config_keys()) {
        if (key == k.name) {
            k.set(cfg, value);
            return;
        }
    }
    throw Error(ErrorKind::ConfigParse, "unknown key '" + key + "'");
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::ConfigParse, e.what());
    }
    for (const auto& [key, node] : tree) {
        if (!node.empty()) throw Error(ErrorKind::ConfigParse, "sections are not supported ('" + key + "')");
        apply_setting(cfg, key, node.data());
    }
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg;
    apply_config_text(cfg, ss.str());
    return cfg;
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const Key& k : config_keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
    return out;
}

DiscreteCurve arc_perturbed(double amplitude, std::uint64_t seed, double mu, int N, bool even_modes) {
    const ElasticaSolution arc = reference_arc(mu);
    DiscreteCurve c = elastica_curve(arc.params, mu, N);
    std::mt19937_64 rng(seed);
    constexpr int kModes = 5;
    double coeff[kModes];
    for (double& a : coeff) a = unit_symmetric(rng());
    std::vector<double> shape(N + 1, 0.0);
    double peak = 0.0;
    for (int i = 0; i <= N; ++i) {
        const double x = static_cast<double>(i) / N;
        double s = 0.0;
        for (int j = 0; j < kModes; ++j) s += coeff[j] * std::sin((even_modes ? 2 * (j + 1) : j + 1) * kPi * x);
        shape[i] = s * std::pow(4.0 * x * (1.0 - x), 7);
        peak = std::max(peak, std::abs(shape[i]));
    }
    if (peak > 0.0) {
        const double scale = amplitude / std::sqrt(mu) / peak;
        for (int i = 1; i < N; ++i) c.nodes[i].y += scale * shape[i];
    }
    return c;
}

DiscreteCurve make_initial_curve(const ExperimentConfig& cfg) {
    const InitialCurveSpec& s = cfg.initial;
    const int N = cfg.flow.n_nodes;
    const std::uint64_t seed = s.has_seed ? s.seed : cfg.rng_seed;
    switch (s.kind) {
        case GeneratorKind::Segment:
            return make_segment({-1.0, 0.0}, {1.0, 0.0}, N, true);
        case GeneratorKind::Semicircle:
            return make_semicircle(s.radius, N);
        case GeneratorKind::ArcPerturbed:
            return arc_perturbed(s.amplitude, seed, cfg.flow.mu, N, true);
        case GeneratorKind::ArcPerturbedAsym:
            return arc_perturbed(s.amplitude, seed, cfg.flow.mu, N, false);
        case GeneratorKind::File:
            return read_curve_csv(s.path, true);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown generator");
}

void write_curve_csv(const fs::path& path, const DiscreteCurve& curve) {
    std::ofstream out = open_out(path);
    out << "x,y\n";
    char buf[96];
    for (const Vec2& p : curve.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
        out << buf;
    }
    close_checked(out, path);
}

DiscreteCurve read_curve_csv(const fs::path& path, bool constrained) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read curve " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "x,y") throw Error(ErrorKind::Io, path.string() + ": expected header x,y");
    DiscreteCurve c;
    c.constrained = constrained;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": expected x,y");
        try {
            c.nodes.push_back({parse_double("x", line.substr(0, comma)), parse_double("y", line.substr(comma + 1))});
        } catch (const Error& e) {
            throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

void write_trace_csv(const fs::path& path, const FlowTrace& trace) {
    std::ofstream out = open_out(path);
    out << "t,energy,dissipation,length,xmin,xmax,ymin,ymax,tangency,dual_norm,step,dissipated\n";
    char buf[512];
    for (const TraceSample& s : trace.samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%.17g\n", s.t, s.energy,
                      s.dissipation, s.length, s.bbox.xmin, s.bbox.xmax, s.bbox.ymin, s.bbox.ymax, s.tangency, s.dual_norm, s.step,
                      s.dissipated);
        out << buf;
    }
    close_checked(out, path);
}

void write_report(const fs::path& json_path, const fs::path& csv_path, const ConvergenceReport& r, const FlowTrace& trace) {
    json j;
    j["E0"] = r.E0;
    j["E_inf"] = r.E_inf;
    j["E_final"] = r.E_final;
    j["u_integral"] = r.u_integral;
    j["u_integral_samples"] = r.u_integral_samples;
    j["integral_bounded"] = r.integral_bounded;
    j["gap_nonincreasing"] = r.gap_nonincreasing;
    j["theta_hat"] = r.have_fit ? json(r.theta_hat) : json(nullptr);
    j["theta_raw"] = r.have_fit ? json(r.lojasiewicz.theta_raw) : json(nullptr);
    j["C_hat"] = r.have_fit ? json(r.C_hat) : json(nullptr);
    j["fit_r2"] = r.have_fit ? json(r.fit_r2) : json(nullptr);
    j["decay_rate"] = r.have_decay ? json(r.decay_rate) : json(nullptr);
    j["decay_r2"] = r.have_decay ? json(r.decay.fit_r2) : json(nullptr);
    j["h_violations"] = r.h_violations;
    j["max_bbox_diam"] = r.max_bbox_diam;
    j["length_range"] = {r.length_range.first, r.length_range.second};
    j["warnings"] = r.warnings;
    json series = json::array();
    for (const auto& [t, g] : r.energy_gap_series) series.push_back({t, g});
    j["energy_gap_series"] = series;
    std::ofstream out = open_out(json_path);
    out << j.dump(2) << "\n";
    close_checked(out, json_path);

    const double theta = r.have_fit ? r.theta_hat : 0.5;
    std::ofstream csv = open_out(csv_path);
    csv << "t,gap,dual_norm,H\n";
    char buf[256];
    for (const TraceSample& s : trace.samples) {
        const double gap = energy_gap(s.energy, r.E_inf);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.t, gap, s.dual_norm, std::pow(gap, theta));
        csv << buf;
    }
    close_checked(csv, csv_path);
}

void write_elastica(const fs::path& dir, double mu, const std::vector<ElasticaSolution>& solutions, int nodes) {
    make_dirs(dir);
    json j;
    j["mu"] = mu;
    j["count"] = solutions.size();
    json arr = json::array();
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        const ElasticaSolution& s = solutions[i];
        const std::string csv = "elastica_" + std::to_string(i) + ".csv";
        json e;
        e["mu"] = mu;
        e["a"] = s.params.a;
        e["phi0"] = s.params.phi0;
        e["L"] = s.params.L;
        e["kind"] = kind_name(s.kind);
        e["energy"] = s.energy;
        e["turning"] = s.turning;
        e["endpoint_gap"] = s.endpoint_gap;
        e["mu_gap_ratio"] = s.endpoint_gap > 0.0 ? mu * s.endpoint_gap * s.endpoint_gap : 0.0;
        e["iterations"] = s.iterations;
        e["residuals"] = {{"ode", s.ode_residual},         {"k0", s.bc_residuals.k0},
                          {"kL", s.bc_residuals.kL},       {"attach_L", s.bc_residuals.attach_L},
                          {"third_0", s.bc_residuals.third_0}, {"third_L", s.bc_residuals.third_L}};
        e["curve"] = csv;
        arr.push_back(e);
        write_curve_csv(dir / csv, elastica_curve(s.params, mu, nodes));
    }
    j["solutions"] = arr;
    const fs::path path = dir / "elastica.json";
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    close_checked(out, path);
}

SimulateOutcome simulate(const ExperimentConfig& cfg, std::ostream& log) {
    const fs::path dir(cfg.output_dir);
    make_dirs(dir / "snapshots");
    const DiscreteCurve initial = make_initial_curve(cfg);
    const auto wall0 = std::chrono::steady_clock::now();
    SimulateOutcome out;
    try {
        out.result = run(initial, cfg.flow, [&](const FlowState& st, const TraceSample&) {
            write_curve_csv(dir / "snapshots" / ("snapshot_" + std::to_string(st.step) + ".csv"), st.curve);
        });
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        log << "rejected: " << e.what() << "\n";
        out.code = exit_code::failure;
        return out;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    const RunResult& res = out.result;
    out.code = exit_code_for(res.reason);
    write_trace_csv(dir / "trace.csv", res.trace);
    write_curve_csv(dir / "final.csv", res.final_state.curve);

    out.report = convergence_report(res.trace);
    out.have_report = true;
    write_report(dir / "report.json", dir / "report.csv", out.report, res.trace);

    json meta;
    json config;
    for (const Key& k : config_keys()) config[k.name] = k.get(cfg);
    meta["config"] = config;
    meta["stop_reason"] = stop_reason_name(res.reason);
    meta["exit_code"] = out.code;
    meta["message"] = res.message;
    meta["final_energy"] = res.trace.samples.back().energy;
    meta["final_time"] = res.final_state.time;
    meta["steps"] = res.steps;
    meta["dt"] = res.dt;
    meta["monotonicity_violations"] = res.monotonicity_violations;
    meta["wall_time"] = wall;
    const fs::path meta_path = dir / "metadata.json";
    std::ofstream mo = open_out(meta_path);
    mo << meta.dump(2) << "\n";
    close_checked(mo, meta_path);

    log << "stop_reason " << stop_reason_name(res.reason) << " t=" << res.final_state.time << " steps=" << res.steps
        << " energy=" << fmt_double(res.trace.samples.back().energy) << "\n";
    for (const std::string& w : out.report.warnings) log << "warning: " << w << "\n";
    return out;
}

namespace {

CheckRow row(const std::string& suite, const std::string& label, double value, double limit, bool pass) {
    return {suite, label, value, limit, pass};
}

struct TestCurve {
    std::string name;
    DiscreteCurve curve;
    double mu;
};

std::vector<TestCurve> test_curves() {
    return {{"segment", make_segment({0.0, 0.0}, {1.0, 0.0}, 64, true), 1.0},
            {"semicircle", make_semicircle(1.0, 64), 2.0},
            {"perturbed_arc", arc_perturbed(1e-2, 7, 1.0, 200), 1.0}};
}

void suite_variations(std::vector<CheckRow>& rows) {
    for (const TestCurve& tc : test_curves()) {
        const double amp = 0.5 * bounding_box(tc.curve).diameter();
        for (int s = 1; s <= 3; ++s) {
            const Field X = random_smooth_field(tc.curve.intervals(), 1000 + s, amp, true);
            const VariationReport at = verify_variation(tc.curve, tc.mu, X, {1e-4, 5e-5});
            const VariationReport coarse = verify_variation(tc.curve, tc.mu, X, {1e-2, 5e-3});
            const std::string tag = tc.name + " field " + std::to_string(s);
            rows.push_back(row("variations", tag + " rel_err", at.rel_err, 1e-6, at.rel_err <= 1e-6));
            rows.push_back(row("variations", tag + " order", coarse.observed_order, 1.9, coarse.observed_order >= 1.9));
        }
    }
}

void suite_scaling(std::vector<CheckRow>& rows) {
    for (const TestCurve& tc : test_curves()) {
        const Field shift(tc.curve.nodes.size(), Vec2{1.0, 0.0});
        const double tr = std::abs(first_variation(tc.curve, tc.mu, shift));
        rows.push_back(row("scaling", tc.name + " translation", tr, 1e-10, tr <= 1e-10));
        const GeometryCache c = build_cache(tc.curve);
        const double expect = tc.mu * quadrature_length(c) - bending_energy(c);
        const double got = first_variation(tc.curve, tc.mu, tc.curve.nodes);
        const double rel = std::abs(got - expect) / std::max(std::abs(expect), 1e-300);
        rows.push_back(row("scaling", tc.name + " dilation", rel, 1e-6, rel <= 1e-6));
    }
    const ElasticaSolution base = reference_arc(1.0);
    for (double mu : {0.25, 4.0}) {
        const ElasticaSolution s = reference_arc(mu);
        const double r = std::sqrt(mu);
        const double dev = std::max({std::abs(s.params.L - base.params.L / r), std::abs(s.params.phi0 - base.params.phi0),
                                     std::abs(s.params.a - base.params.a * mu), std::abs(s.energy - base.energy * r)});
        rows.push_back(row("scaling", "elastica family mu=" + fmt_double(mu), dev, 1e-8, dev <= 1e-8));
    }
}

void suite_ibp(std::vector<CheckRow>& rows) {
    const ElasticaSolution arc = reference_arc(1.0);
    struct Family {
        std::string name;
        std::function<DiscreteCurve(int)> make;
    };
    const std::vector<Family> fams = {{"semicircle", [](int N) { return make_semicircle(1.0, N); }},
                                      {"arc", [&](int N) { return elastica_curve(arc.params, 1.0, N); }}};
    for (const Family& f : fams) {
        std::vector<double> d;
        for (int N : {64, 128, 256}) {
            const GeometryCache c = build_cache(f.make(N));
            d.push_back(discrete_ibp_defect(random_smooth_field(N, 11, 1.0, false), random_smooth_field(N, 12, 1.0, false), c));
        }
        for (int i = 0; i < 2; ++i) {
            const double order = std::log2(d[i] / d[i + 1]);
            rows.push_back(row("ibp", f.name + " order " + std::to_string(64 << i) + "->" + std::to_string(128 << i), order, 1.0,
                               order >= 1.0));
        }
    }
}

void suite_dissipation(std::vector<CheckRow>& rows) {
    const FlowConfig fc;
    const RunResult res = run(arc_perturbed(1e-2, 7, 1.0, fc.n_nodes), fc);
    rows.push_back(row("dissipation", "converged", res.reason == StopReason::Converged ? 1.0 : 0.0, 1.0,
                       res.reason == StopReason::Converged));
    const DissipationCheck dc = check_dissipation_identity(res.trace);
    rows.push_back(row("dissipation", "identity fraction", dc.fraction(), 0.95, dc.fraction() >= 0.95));
    rows.push_back(row("dissipation", "energy increases", dc.energy_increases, 0.0, dc.energy_increases == 0));
    const ConvergenceReport r = convergence_report(res.trace);
    const double drop = r.E0 - r.E_inf;
    const double rel = std::abs(r.u_integral - drop) / drop;
    rows.push_back(row("dissipation", "u_integral vs energy drop", rel, 0.05, rel <= 0.05));
}

}  // namespace

std::vector<CheckRow> run_verify(const VerifySelection& sel, std::ostream& log) {
    std::vector<CheckRow> rows;
    if (sel.variations) suite_variations(rows);
    if (sel.scaling) suite_scaling(rows);
    if (sel.ibp) suite_ibp(rows);
    if (sel.dissipation) suite_dissipation(rows);
    char buf[256];
    for (const CheckRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %-40s %14.6e %10.3e  %s\n", r.suite.c_str(), r.label.c_str(), r.value, r.limit,
                      r.pass ? "pass" : "FAIL");
        log << buf;
    }
    return rows;
}

int sweep(const ExperimentConfig& base, std::vector<double> mus, bool parallel, std::ostream& log, std::vector<SweepEntry>* entries) {
    std::vector<double> unique;
    for (double mu : mus) {
        if (!(mu > 0.0)) throw Error(ErrorKind::ConfigParse, "sweep: mu values must be positive");
        if (std::find(unique.begin(), unique.end(), mu) != unique.end()) {
            log << "warning: duplicate mu " << fmt_double(mu) << " ignored\n";
            continue;
        }
        unique.push_back(mu);
    }
    const fs::path root(base.output_dir);
    make_dirs(root);
    const int n = static_cast<int>(unique.size());
    std::vector<SweepEntry> out(n);
    std::vector<std::string> logs(n);
    std::vector<std::string> errors(n);
    std::vector<int> error_codes(n, 0);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < n; ++i) {
        ExperimentConfig cfg = base;
        cfg.flow.mu = unique[i];
        cfg.output_dir = (root / ("mu_" + fmt_double(unique[i]))).string();
        std::ostringstream os;
        out[i].mu = unique[i];
        out[i].dir = cfg.output_dir;
        try {
            const SimulateOutcome o = simulate(cfg, os);
            out[i].code = o.code;
            if (!o.result.trace.samples.empty()) out[i].final_energy = o.result.trace.samples.back().energy;
            out[i].arc_energy = reference_arc(unique[i]).energy;
        } catch (const Error& e) {
            errors[i] = e.what();
            error_codes[i] = e.kind() == ErrorKind::Io ? exit_code::io : exit_code::failure;
            out[i].code = error_codes[i];
        }
        logs[i] = os.str();
    }
    int code = exit_code::ok;
    for (int i = 0; i < n; ++i) {
        log << "mu " << fmt_double(unique[i]) << ": " << logs[i];
        if (!errors[i].empty()) log << "error: " << errors[i] << "\n";
        if (code == exit_code::ok && out[i].code != exit_code::ok) code = out[i].code;
    }
    const double e1 = reference_arc(1.0).energy;
    bool scaling_ok = true;
    json summary = json::array();
    for (const SweepEntry& e : out) {
        const double predicted = e1 * std::sqrt(e.mu);
        const double family_dev = std::abs(e.arc_energy - predicted);
        const double flow_dev = e.arc_energy > 0.0 ? std::abs(e.final_energy - e.arc_energy) / e.arc_energy : 0.0;
        const bool fam = family_dev <= 1e-8 * std::max(1.0, predicted);
        const bool flow = e.code != exit_code::ok || flow_dev <= 1e-4;
        scaling_ok = scaling_ok && fam && flow;
        log << "scaling mu " << fmt_double(e.mu) << ": arc energy " << fmt_double(e.arc_energy) << " predicted " << fmt_double(predicted)
            << (fam ? " ok" : " MISMATCH") << "; flow final " << fmt_double(e.final_energy) << (flow ? " ok" : " MISMATCH") << "\n";
        summary.push_back({{"mu", e.mu},
                           {"exit_code", e.code},
                           {"final_energy", e.final_energy},
                           {"arc_energy", e.arc_energy},
                           {"predicted_arc_energy", predicted},
                           {"family_ok", fam},
                           {"flow_matches_arc", flow},
                           {"dir", e.dir}});
    }
    const fs::path sp = root / "sweep.json";
    std::ofstream so = open_out(sp);
    so << summary.dump(2) << "\n";
    close_checked(so, sp);
    if (entries) *entries = out;
    if (code == exit_code::ok && !scaling_ok) code = exit_code::failure;
    return code;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Elastic flow of planar curves with endpoints on a line"};
    app.require_subcommand(1);

    std::string config_path, out_dir, initial, mus_text;
    std::vector<std::string> sets;
    double mu = 0.0;
    std::uint64_t seed = 0;
    bool parallel = false;

    auto add_run_options = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "INI-style key = value file");
        sub->add_option("--mu", mu, "penalty weight mu > 0");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "perturbation seed");
        sub->add_option("--initial", initial, "segment | semicircle(R) | arc_perturbed(amp[, seed]) | arc_perturbed_asym(amp[, seed]) | file(path)");
        sub->add_option("--set", sets, "key=value override, repeatable");
    };
    CLI::App* sim = app.add_subcommand("simulate", "run the flow from an initial curve");
    add_run_options(sim);

    CLI::App* sw = app.add_subcommand("sweep", "simulate for several values of mu");
    add_run_options(sw);
    sw->add_option("--mus", mus_text, "comma-separated mu values")->required();
    sw->add_flag("--parallel", parallel, "run the values concurrently");

    CLI::App* el = app.add_subcommand("elastica", "find critical points by shooting");
    ElasticaOptions eopt;
    int nodes = 256;
    double el_mu = 1.0;
    std::string el_out = "elastica_out";
    el->add_option("--mu", el_mu, "penalty weight mu > 0");
    el->add_option("--out", el_out, "output directory");
    el->add_option("--scan-phi", eopt.scan_phi, "launch-angle grid size");
    el->add_option("--scan-steps", eopt.scan_steps, "RK4 steps per scan trajectory");
    el->add_option("--phi-min", eopt.phi_min, "smallest launch angle");
    el->add_option("--l-min", eopt.L_min, "shortest scanned length at mu = 1");
    el->add_option("--l-max", eopt.L_max, "longest scanned length at mu = 1");
    el->add_option("--nodes", nodes, "nodes per written curve");

    CLI::App* ver = app.add_subcommand("verify", "run invariant suites");
    VerifySelection sel;
    bool all = false;
    ver->add_flag("--variations", sel.variations, "first variation against finite differences");
    ver->add_flag("--ibp", sel.ibp, "discrete integration by parts");
    ver->add_flag("--dissipation", sel.dissipation, "energy dissipation identity along a flow");
    ver->add_flag("--scaling", sel.scaling, "translation, dilation and mu-scaling identities");
    ver->add_flag("--all", all, "every suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code::usage;
    }

    auto build_config = [&](CLI::App* sub) {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        for (const std::string& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw Error(ErrorKind::ConfigParse, "--set expects key=value, got '" + s + "'");
            apply_setting(cfg, trim(s.substr(0, eq)), s.substr(eq + 1));
        }
        if (!initial.empty()) cfg.initial = parse_initial_curve(initial);
        if (sub->count("--mu")) apply_setting(cfg, "mu", fmt_double(mu));
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (sub->count("--seed")) {
            cfg.rng_seed = seed;
            cfg.initial.has_seed = false;
        }
        return cfg;
    };

    try {
        if (sim->parsed()) {
            const ExperimentConfig cfg = build_config(sim);
            return simulate(cfg, std::cout).code;
        }
        if (sw->parsed()) {
            const ExperimentConfig cfg = build_config(sw);
            std::vector<double> mus;
            std::stringstream ss(mus_text);
            std::string item;
            while (std::getline(ss, item, ',')) mus.push_back(parse_double("--mus", item));
            if (mus.empty()) throw Error(ErrorKind::ConfigParse, "--mus is empty");
            return sweep(cfg, mus, parallel, std::cout);
        }
        if (el->parsed()) {
            if (!(el_mu > 0.0)) throw Error(ErrorKind::ConfigParse, "--mu must be positive");
            if (nodes < 16) throw Error(ErrorKind::ConfigParse, "--nodes must be at least 16");
            const std::vector<ElasticaSolution> sols = find_elasticae(el_mu, eopt);
            write_elastica(el_out, el_mu, sols, nodes);
            for (std::size_t i = 0; i < sols.size(); ++i) {
                const ElasticaSolution& s = sols[i];
                std::printf("%zu %s a=%.12g phi0=%.12g L=%.12g energy=%.12g bc=%.2e ode=%.2e\n", i, kind_name(s.kind), s.params.a,
                            s.params.phi0, s.params.L, s.energy, s.bc_residuals.max_abs(), s.ode_residual);
            }
            if (sols.empty()) {
                std::printf("no elastica found\n");
                return exit_code::failure;
            }
            return exit_code::ok;
        }
        if (ver->parsed()) {
            if (all) sel = {true, true, true, true};
            if (!sel.any()) {
                std::cerr << "verify: select at least one suite (--variations, --ibp, --dissipation, --scaling, --all)\n";
                return exit_code::usage;
            }
            const std::vector<CheckRow> rows = run_verify(sel, std::cout);
            const bool ok = std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
            return ok ? exit_code::ok : exit_code::failure;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.kind() == ErrorKind::ConfigParse) return exit_code::config_parse;
        if (e.kind() == ErrorKind::Io) return exit_code::io;
        return exit_code::failure;
    }
    return exit_code::usage;
}

}  // namespace elflow
