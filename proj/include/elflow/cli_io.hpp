#pragma once
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "elflow/diagnostics.hpp"
#include "elflow/elastica_solver.hpp"
#include "elflow/flow_solver.hpp"

namespace elflow {

namespace exit_code {
constexpr int ok = 0;
constexpr int failure = 1;  // rejected initial curve, no elastica found, failed verification
constexpr int max_time = 2;
constexpr int length_collapse = 3;
constexpr int boundary_tangency = 4;
constexpr int step_failure = 5;
constexpr int usage = 64;
constexpr int config_parse = 65;
constexpr int io = 74;
}  // namespace exit_code

int exit_code_for(StopReason reason);

enum class GeneratorKind { Segment, Semicircle, ArcPerturbed, ArcPerturbedAsym, File };

struct InitialCurveSpec {
    GeneratorKind kind = GeneratorKind::ArcPerturbed;
    double radius = 1.0;
    double amplitude = 1e-2;
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::string path;
};

// segment | semicircle(R) | arc_perturbed(amplitude[, seed]) | arc_perturbed_asym(amplitude[, seed]) | file(path) | path
InitialCurveSpec parse_initial_curve(const std::string& text);
std::string describe(const InitialCurveSpec& spec);

struct ExperimentConfig {
    FlowConfig flow;
    InitialCurveSpec initial;
    std::string output_dir = "out";
    std::uint64_t rng_seed = 7;
    double mu() const { return flow.mu; }
};

// Flat key = value text; unknown keys, duplicates and malformed values raise ConfigParse.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const ExperimentConfig& cfg);

// Reference arc for mu plus a windowed sine perturbation of the y-component with seeded coefficients.
// The amplitude is the maximum displacement at mu = 1 and scales with the arc size 1/sqrt(mu).
DiscreteCurve arc_perturbed(double amplitude, std::uint64_t seed, double mu, int N, bool even_modes = true);
DiscreteCurve make_initial_curve(const ExperimentConfig& cfg);

void write_curve_csv(const std::filesystem::path& path, const DiscreteCurve& curve);
DiscreteCurve read_curve_csv(const std::filesystem::path& path, bool constrained = true);
void write_trace_csv(const std::filesystem::path& path, const FlowTrace& trace);
void write_report(const std::filesystem::path& json_path, const std::filesystem::path& csv_path,
                  const ConvergenceReport& report, const FlowTrace& trace);
void write_elastica(const std::filesystem::path& dir, double mu, const std::vector<ElasticaSolution>& solutions, int nodes);

struct SimulateOutcome {
    int code = exit_code::ok;
    RunResult result;
    ConvergenceReport report;
    bool have_report = false;
};

// Runs the flow and writes trace.csv, snapshots/, final.csv, metadata.json, report.json and report.csv.
SimulateOutcome simulate(const ExperimentConfig& cfg, std::ostream& log);

struct CheckRow {
    std::string suite, label;
    double value = 0.0, limit = 0.0;
    bool pass = false;
};

struct VerifySelection {
    bool variations = false, ibp = false, dissipation = false, scaling = false;
    bool any() const { return variations || ibp || dissipation || scaling; }
};

std::vector<CheckRow> run_verify(const VerifySelection& sel, std::ostream& log);

struct SweepEntry {
    double mu = 0.0;
    int code = 0;
    double final_energy = 0.0;
    double arc_energy = 0.0;
    std::string dir;
};

// One simulate per distinct mu in its own subdirectory, optionally in parallel, plus the scaling cross-check.
int sweep(const ExperimentConfig& base, std::vector<double> mus, bool parallel, std::ostream& log,
          std::vector<SweepEntry>* entries = nullptr);

// Command-line entry point.
int cli_main(int argc, char** argv);

}  // namespace elflow
