// agesched: buffer-based remote estimation over lossy channels.
// Subcommands: error-curve, solve, simulate, sweep. Exit status 0 on
// success, 2 on usage/config errors, 1 on runtime failures.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <spdlog/spdlog.h>
#include <sstream>
#include <string>
#include <vector>

#include "agesched/csv.hpp"
#include "agesched/errors.hpp"
#include "agesched/experiment.hpp"

namespace fs = std::filesystem;
using namespace agesched;

namespace {

struct CliState {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> delta_max;
    std::optional<double> gamma;
    std::string log_level = "info";
    bool print_config = false;

    // error-curve
    std::string model_path;
    int curve_buffer = 1;
    std::vector<int> fixed_ages;

    // solve
    std::string method = "ascent";

    // simulate
    std::string policy_name;
    std::optional<std::int64_t> horizon;
    std::optional<int> replications;

    // sweep
    std::string p_grid = "0.3:1.0:0.05";
    std::vector<int> buffers = {1, 2};
};

void set_log_level(const std::string& level) {
    if (level == "trace") spdlog::set_level(spdlog::level::trace);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "warn") spdlog::set_level(spdlog::level::warn);
    else if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "off") spdlog::set_level(spdlog::level::off);
    else throw ConfigError("unknown log level '" + level + "'");
}

ExperimentConfig load_effective_config(const CliState& cli) {
    if (cli.config_path.empty()) {
        throw ConfigError("--config <file> is required for this command");
    }
    ExperimentConfig config = load_config_file(cli.config_path);
    if (cli.seed) config.seed = *cli.seed;
    if (cli.delta_max) config.delta_max = *cli.delta_max;
    if (cli.gamma) config.gamma = *cli.gamma;
    if (!cli.out_dir.empty()) config.out_dir = cli.out_dir;
    if (cli.horizon) config.horizon = *cli.horizon;
    if (cli.replications) config.replications = *cli.replications;
    return config;
}

void write_solve_outputs(const ExperimentConfig& config,
                         const SolveArtifacts& artifacts) {
    const fs::path out(config.out_dir);
    csv::write_file_atomic(out / "solve_report.json",
                           dual_report_to_json(artifacts.report));
    csv::write_file_atomic(out / "states_legend.csv",
                           states_legend_csv(*artifacts.space));
    for (std::size_t n = 0; n < artifacts.report.q_tables.size(); ++n) {
        std::ostringstream table;
        SolveResult view;
        view.q = artifacts.report.q_tables[n];
        view.value.values.resize(view.q.q0.size());
        for (std::size_t i = 0; i < view.q.q0.size(); ++i) {
            view.value.values[i] = std::min(view.q.q0[i], view.q.q1[i]);
        }
        write_qtable_csv(table, *artifacts.space, artifacts.errors[n], view);
        csv::write_file_atomic(out / ("sensor_" + std::to_string(n + 1) +
                                      "_qtable.csv"),
                               table.str());
    }
    spdlog::info("solve outputs written to {}", out.string());
}

int cmd_error_curve(const CliState& cli) {
    if (cli.model_path.empty()) {
        throw ConfigError("--model <file> is required for error-curve");
    }
    const ArSourceModel model = load_model_file(cli.model_path);
    const int delta_max = cli.delta_max.value_or(30);
    const auto rows =
        error_curve(model, cli.curve_buffer, delta_max, cli.fixed_ages);
    const fs::path out_dir = cli.out_dir.empty() ? "out" : cli.out_dir;
    const fs::path path = out_dir / fs::path("error_curve.csv");
    csv::write_file_atomic(path, error_curve_csv(rows));
    std::printf("error-curve: %zu rows -> %s\n", rows.size(),
                path.string().c_str());
    return 0;
}

int cmd_solve(const CliState& cli) {
    const ExperimentConfig config = load_effective_config(cli);
    DualMethod method = DualMethod::Ascent;
    if (cli.method == "golden") {
        method = DualMethod::GoldenSection;
    } else if (cli.method != "ascent") {
        throw ConfigError("--method must be 'ascent' or 'golden'");
    }
    const SolveArtifacts artifacts = solve_experiment(config, method);
    write_solve_outputs(config, artifacts);
    std::printf("lambda_star = %s (budget %s, usage %s)\n",
                csv::format_number(artifacts.report.lambda_star).c_str(),
                csv::format_number(artifacts.report.budget).c_str(),
                csv::format_number(artifacts.report.final_usage).c_str());
    return 0;
}

int cmd_simulate(const CliState& cli) {
    const ExperimentConfig config = load_effective_config(cli);
    const Policy policy = parse_policy(cli.policy_name);

    SimResult result;
    if (policy == Policy::Mgf) {
        const fs::path report_path =
            fs::path(config.out_dir) / "solve_report.json";
        SolveArtifacts artifacts;
        if (fs::exists(report_path)) {
            std::ifstream in(report_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            const double lambda_star = lambda_star_from_json(ss.str());
            spdlog::info("reusing cached lambda* = {} from {}", lambda_star,
                         report_path.string());
            artifacts = artifacts_at_lambda(config, lambda_star);
        } else {
            spdlog::info("no cached solve report; running dual ascent");
            artifacts = solve_experiment(config);
            write_solve_outputs(config, artifacts);
        }
        result = run_policy(config, policy, &artifacts);
    } else {
        result = run_policy(config, policy);
    }

    const fs::path path = fs::path(config.out_dir) /
                          ("simulate_" + std::string(policy_name(policy)) +
                           ".csv");
    csv::write_file_atomic(path, simulate_csv(result));
    std::printf("%s: avg_error = %s \xc2\xb1 %s\n", policy_name(policy),
                csv::format_number(result.avg_error).c_str(),
                csv::format_number(result.avg_error_std_error).c_str());
    return 0;
}

int cmd_sweep(const CliState& cli) {
    const ExperimentConfig config = load_effective_config(cli);
    const PGrid grid = parse_p_grid(cli.p_grid);
    const auto cells = run_sweep(config, grid, cli.buffers);
    const fs::path path = fs::path(config.out_dir) / "sweep.csv";
    csv::write_file_atomic(
        path, sweep_csv(cells, static_cast<int>(config.sensors.size())));
    std::size_t failed = 0;
    for (const SweepCell& cell : cells) {
        if (!cell.ok) ++failed;
    }
    std::printf("sweep: %zu cells (%zu failed) -> %s\n", cells.size(), failed,
                path.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CliState cli;
    CLI::App app{"agesched: buffer-based timely remote estimation "
                 "(AoI-vector scheduling)"};
    app.fallthrough();
    app.add_option("--config", cli.config_path, "experiment config JSON");
    app.add_option("--out", cli.out_dir, "output directory");
    app.add_option("--seed", cli.seed, "master seed override");
    app.add_option("--delta-max", cli.delta_max, "AoI truncation cap override");
    app.add_option("--gamma", cli.gamma, "discount factor override");
    app.add_option("--log-level", cli.log_level,
                   "trace|debug|info|warn|error|off");
    app.add_flag("--print-config", cli.print_config,
                 "print the effective configuration and exit");

    CLI::App* curve = app.add_subcommand(
        "error-curve", "estimation error vs the freshest age");
    curve->add_option("--model", cli.model_path, "sensor model JSON");
    curve->add_option("--buffer", cli.curve_buffer, "buffer size b");
    curve->add_option("--fixed-ages", cli.fixed_ages,
                      "fixed older ages (b-1 values)")
        ->delimiter(',');

    CLI::App* solve = app.add_subcommand(
        "solve", "solve the dual problem (lambda*, Q-tables)");
    solve->add_option("--method", cli.method, "ascent|golden");

    CLI::App* simulate = app.add_subcommand(
        "simulate", "Monte-Carlo simulation of one scheduling policy");
    simulate->add_option("--policy", cli.policy_name,
                         "mgf|maf|rr|rand|never");
    simulate->add_option("--horizon", cli.horizon, "slots per replication");
    simulate->add_option("--replications", cli.replications,
                         "replication count");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "success-probability sweep with per-cell lambda*");
    sweep->add_option("--p-grid", cli.p_grid, "start:stop:step");
    sweep->add_option("--buffers", cli.buffers, "buffer sizes")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        set_log_level(cli.log_level);
        if (cli.print_config) {
            ExperimentConfig config;
            if (!cli.config_path.empty()) {
                config = load_effective_config(cli);
            } else {
                if (cli.seed) config.seed = *cli.seed;
                if (cli.delta_max) config.delta_max = *cli.delta_max;
                if (cli.gamma) config.gamma = *cli.gamma;
                if (!cli.out_dir.empty()) config.out_dir = cli.out_dir;
            }
            std::fputs(config_to_json_text(config).c_str(), stdout);
            return 0;
        }
        if (curve->parsed()) return cmd_error_curve(cli);
        if (solve->parsed()) return cmd_solve(cli);
        if (simulate->parsed()) return cmd_simulate(cli);
        if (sweep->parsed()) return cmd_sweep(cli);
        std::fputs(app.help().c_str(), stderr);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
