#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "agesched/dual.hpp"
#include "agesched/simulator.hpp"

namespace agesched {

/// Everything a solve/simulate/sweep run needs. Loaded from a strict JSON
/// schema: unknown keys are rejected by name, defaults are explicit and can
/// be inspected with `--print-config`.
struct ExperimentConfig {
    std::vector<ArSourceModel> sensors;
    int channels = 1;
    int buffer = 1;
    double gamma = 0.99;
    std::int64_t horizon = 100'000;
    int replications = 10;
    std::uint64_t seed = 1;
    int delta_max = 100;
    int warmup = -1; // -1: default 10 * buffer
    double vi_tol = 1e-9;
    DualConfig dual;
    std::string out_dir = "out";
};

ArSourceModel model_from_json_text(const std::string& text);
ExperimentConfig config_from_json_text(const std::string& text);
/// Effective configuration with resolved defaults, pretty-printed.
std::string config_to_json_text(const ExperimentConfig& config);

/// Parse + validate a file; throws ConfigError naming the parse location or
/// offending key.
ExperimentConfig load_config_file(const std::filesystem::path& path);
ArSourceModel load_model_file(const std::filesystem::path& path);

SimConfig sim_config_from(const ExperimentConfig& config);

/// Solver-side artifacts shared by the MGF policy and the report files. The
/// error tables point into *space, which is heap-pinned so the bundle can be
/// moved safely.
struct SolveArtifacts {
    std::shared_ptr<const StateSpace> space;
    std::vector<ErrorTable> errors;
    DualSolveReport report;
};

enum class DualMethod { Ascent, GoldenSection };

/// Enumerates the state space, builds per-sensor error tables and solves the
/// dual problem (subgradient ascent by default, golden-section cross-check
/// on request).
SolveArtifacts solve_experiment(const ExperimentConfig& config,
                                DualMethod method = DualMethod::Ascent);

/// Rebuilds artifacts for a known multiplier (e.g. a cached solve report).
SolveArtifacts artifacts_at_lambda(const ExperimentConfig& config,
                                   double lambda_star);

/// Runs one policy; `artifacts` is required for Policy::Mgf.
SimResult run_policy(const ExperimentConfig& config, Policy policy,
                     const SolveArtifacts* artifacts = nullptr);

struct PGrid {
    double start = 0.3;
    double stop = 1.0;
    double step = 0.05;
};

/// "start:stop:step" with 0 < start <= stop <= 1 and step > 0.
PGrid parse_p_grid(const std::string& text);
std::vector<double> grid_points(const PGrid& grid);

struct SweepCell {
    double p = 0.0;
    int buffer = 0;
    bool ok = false;
    std::string error;      // failure message when !ok; sweep continues
    double lambda_star = 0.0;
    SimResult result;
};

/// One MGF cell per (p, buffer): sensors take the cell's success
/// probability, lambda* is re-solved per cell, and the cell seed is the
/// master seed hashed with (p, buffer) so cells can be reproduced in
/// isolation.
std::vector<SweepCell> run_sweep(const ExperimentConfig& base,
                                 const PGrid& grid,
                                 const std::vector<int>& buffers);

SweepCell run_sweep_cell(const ExperimentConfig& base, double p, int buffer);

// --- CSV / report emission -------------------------------------------------

std::string simulate_csv(const SimResult& result);
std::string sweep_csv(std::span<const SweepCell> cells, int n_sensors);
std::string states_legend_csv(const StateSpace& space);

struct ErrorCurveRow {
    std::string curve;
    int delta1 = 0;
    double error = 0.0;
};

/// Fig.-2-style sweep: estimation error as a function of the freshest age.
/// For buffer >= 2 the older ages are fixed (`fixed_ages`, length buffer-1)
/// and an unconstrained single-packet reference curve is appended.
std::vector<ErrorCurveRow> error_curve(const ArSourceModel& model, int buffer,
                                       int delta_max,
                                       std::span<const int> fixed_ages);
std::string error_curve_csv(std::span<const ErrorCurveRow> rows);

} // namespace agesched
