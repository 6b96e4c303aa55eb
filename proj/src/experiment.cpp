#include "agesched/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <sstream>
#include <stdexcept>

#include "agesched/csv.hpp"
#include "agesched/errors.hpp"
#include "agesched/rng.hpp"

namespace agesched {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    for (const auto& item : j.items()) {
        const bool known =
            std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
                return item.key() == k;
            });
        if (!known) {
            throw ConfigError("unknown " + context + " key '" + item.key() +
                              "'");
        }
    }
}

template <typename T>
T get_field(const json& j, const char* key, const T& fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + std::string(key) +
                          "': " + e.what());
    }
}

ArSourceModel model_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("sensor model must be a JSON object");
    }
    reject_unknown_keys(j, {"order", "coeffs", "noise_var", "success_prob"},
                        "sensor model");
    for (const char* key : {"order", "coeffs", "noise_var", "success_prob"}) {
        if (!j.contains(key)) {
            throw ConfigError("sensor model is missing key '" +
                              std::string(key) + "'");
        }
    }
    const int order = get_field<int>(j, "order", 0);
    auto coeffs = get_field<std::vector<double>>(j, "coeffs", {});
    if (order < 1 || static_cast<std::size_t>(order) != coeffs.size()) {
        throw ConfigError(
            "sensor model 'order' must match the number of coefficients");
    }
    try {
        return ArSourceModel(std::move(coeffs),
                             get_field<double>(j, "noise_var", 0.0),
                             get_field<double>(j, "success_prob", 0.0));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid sensor model: ") + e.what());
    }
}

json model_to_json(const ArSourceModel& model) {
    return json{{"order", model.order()},
                {"coeffs", model.coeffs()},
                {"noise_var", model.noise_var()},
                {"success_prob", model.success_prob()}};
}

void validate_config(const ExperimentConfig& c) {
    if (c.sensors.empty()) {
        throw ConfigError("config needs at least one sensor");
    }
    if (c.channels < 1) throw ConfigError("'channels' must be >= 1");
    if (c.buffer < 1) throw ConfigError("'buffer' must be >= 1");
    if (!(c.gamma >= 0.0) || c.gamma >= 1.0) {
        throw ConfigError("'gamma' must lie in [0, 1)");
    }
    if (c.horizon < 1) throw ConfigError("'horizon' must be >= 1");
    if (c.replications < 1) throw ConfigError("'replications' must be >= 1");
    if (c.delta_max < c.buffer + 1) {
        throw ConfigError("'delta_max' must be >= buffer + 1");
    }
    if (c.warmup >= 0 && c.warmup >= c.horizon) {
        throw ConfigError("'warmup' must be smaller than 'horizon'");
    }
    if (!(c.vi_tol > 0.0)) throw ConfigError("'vi_tol' must be > 0");
    if (!(c.dual.beta > 0.0)) throw ConfigError("'dual.beta' must be > 0");
    if (c.dual.max_iter < 1) throw ConfigError("'dual.max_iter' must be >= 1");
    if (!(c.dual.lambda_init >= 0.0)) {
        throw ConfigError("'dual.lambda_init' must be >= 0");
    }
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    reject_unknown_keys(j,
                        {"sensors", "channels", "buffer", "gamma", "horizon",
                         "replications", "seed", "delta_max", "warmup",
                         "vi_tol", "dual", "out_dir"},
                        "config");
    ExperimentConfig c;
    if (!j.contains("sensors") || !j.at("sensors").is_array() ||
        j.at("sensors").empty()) {
        throw ConfigError("config key 'sensors' must be a non-empty array");
    }
    for (const json& m : j.at("sensors")) {
        c.sensors.push_back(model_from_json(m));
    }
    c.channels = get_field<int>(j, "channels", c.channels);
    c.buffer = get_field<int>(j, "buffer", c.buffer);
    c.gamma = get_field<double>(j, "gamma", c.gamma);
    c.horizon = get_field<std::int64_t>(j, "horizon", c.horizon);
    c.replications = get_field<int>(j, "replications", c.replications);
    c.seed = get_field<std::uint64_t>(j, "seed", c.seed);
    c.delta_max = get_field<int>(j, "delta_max", c.delta_max);
    c.warmup = get_field<int>(j, "warmup", c.warmup);
    c.vi_tol = get_field<double>(j, "vi_tol", c.vi_tol);
    c.out_dir = get_field<std::string>(j, "out_dir", c.out_dir);
    if (j.contains("dual")) {
        const json& d = j.at("dual");
        reject_unknown_keys(
            d, {"beta", "max_iter", "residual_tol", "lambda_init"}, "dual");
        c.dual.beta = get_field<double>(d, "beta", c.dual.beta);
        c.dual.max_iter = get_field<int>(d, "max_iter", c.dual.max_iter);
        c.dual.residual_tol =
            get_field<double>(d, "residual_tol", c.dual.residual_tol);
        c.dual.lambda_init =
            get_field<double>(d, "lambda_init", c.dual.lambda_init);
    }
    validate_config(c);
    return c;
}

} // namespace

ArSourceModel model_from_json_text(const std::string& text) {
    try {
        return model_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model file is not valid JSON: ") +
                          e.what());
    }
}

ExperimentConfig config_from_json_text(const std::string& text) {
    try {
        return config_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") +
                          e.what());
    }
}

std::string config_to_json_text(const ExperimentConfig& c) {
    json sensors = json::array();
    for (const ArSourceModel& m : c.sensors) {
        sensors.push_back(model_to_json(m));
    }
    const double residual_tol =
        c.dual.residual_tol > 0.0
            ? c.dual.residual_tol
            : 1e-3 * static_cast<double>(c.channels) / (1.0 - c.gamma);
    json j{{"sensors", sensors},
           {"channels", c.channels},
           {"buffer", c.buffer},
           {"gamma", c.gamma},
           {"horizon", c.horizon},
           {"replications", c.replications},
           {"seed", c.seed},
           {"delta_max", c.delta_max},
           {"warmup", c.warmup >= 0 ? c.warmup : 10 * c.buffer},
           {"vi_tol", c.vi_tol},
           {"dual",
            {{"beta", c.dual.beta},
             {"max_iter", c.dual.max_iter},
             {"residual_tol", residual_tol},
             {"lambda_init", c.dual.lambda_init}}},
           {"out_dir", c.out_dir}};
    return j.dump(2) + "\n";
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    return config_from_json_text(read_file(path));
}

ArSourceModel load_model_file(const std::filesystem::path& path) {
    return model_from_json_text(read_file(path));
}

SimConfig sim_config_from(const ExperimentConfig& c) {
    SimConfig sim;
    sim.sensors = c.sensors;
    sim.channels = c.channels;
    sim.buffer = c.buffer;
    sim.gamma = c.gamma;
    sim.horizon = c.horizon;
    sim.replications = c.replications;
    sim.seed = c.seed;
    sim.delta_max = c.delta_max;
    sim.warmup = c.warmup;
    return sim;
}

namespace {

struct SensorSetup {
    std::shared_ptr<const StateSpace> space;
    std::vector<ErrorTable> errors;
    std::vector<SensorSolver> solvers;
};

SensorSetup build_sensor_setup(const ExperimentConfig& c) {
    SensorSetup setup;
    setup.space = std::make_shared<const StateSpace>(
        StateSpace::enumerate(c.buffer, c.delta_max));
    setup.errors.reserve(c.sensors.size());
    for (const ArSourceModel& model : c.sensors) {
        setup.errors.push_back(build_error_table(model, *setup.space));
    }
    setup.solvers.reserve(c.sensors.size());
    for (std::size_t n = 0; n < c.sensors.size(); ++n) {
        setup.solvers.emplace_back(
            *setup.space,
            TransitionModel{c.sensors[n].success_prob(), c.delta_max},
            setup.errors[n]);
    }
    return setup;
}

DualSolveReport report_at_lambda(std::span<SensorSolver> solvers, int channels,
                                 double gamma, double lambda_star,
                                 double vi_tol) {
    DualSolveReport report;
    report.budget = static_cast<double>(channels) / (1.0 - gamma);
    report.lambda_star = lambda_star;
    double value_sum = 0.0;
    for (SensorSolver& solver : solvers) {
        const SolveResult& solved = solver.solve(lambda_star, gamma, vi_tol);
        value_sum += solved.value
                         .values[static_cast<std::size_t>(solver.initial_id())];
        report.q_tables.push_back(solved.q);
        report.sensor_usage.push_back(solver.usage(gamma));
        report.final_usage += report.sensor_usage.back();
    }
    report.dual_value = value_sum - lambda_star * report.budget;
    return report;
}

} // namespace

SolveArtifacts solve_experiment(const ExperimentConfig& config,
                                DualMethod method) {
    SensorSetup setup = build_sensor_setup(config);
    SolveArtifacts artifacts;
    if (method == DualMethod::Ascent) {
        artifacts.report = dual_ascent(setup.solvers, config.channels,
                                       config.gamma, config.dual,
                                       config.vi_tol);
    } else {
        const GoldenResult golden = golden_section_lambda(
            setup.solvers, config.channels, config.gamma, 0.0, 1e-6,
            config.vi_tol);
        artifacts.report =
            report_at_lambda(setup.solvers, config.channels, config.gamma,
                             golden.lambda_star, config.vi_tol);
        spdlog::debug("golden-section lambda* = {} after {} evaluations",
                      golden.lambda_star, golden.evaluations);
    }
    artifacts.space = std::move(setup.space);
    artifacts.errors = std::move(setup.errors);
    return artifacts;
}

SolveArtifacts artifacts_at_lambda(const ExperimentConfig& config,
                                   double lambda_star) {
    SensorSetup setup = build_sensor_setup(config);
    SolveArtifacts artifacts;
    artifacts.report = report_at_lambda(setup.solvers, config.channels,
                                        config.gamma, lambda_star,
                                        config.vi_tol);
    artifacts.space = std::move(setup.space);
    artifacts.errors = std::move(setup.errors);
    return artifacts;
}

SimResult run_policy(const ExperimentConfig& config, Policy policy,
                     const SolveArtifacts* artifacts) {
    const SimConfig sim = sim_config_from(config);
    if (policy == Policy::Mgf) {
        if (artifacts == nullptr) {
            throw std::invalid_argument(
                "mgf requires solve artifacts (lambda*, Q-tables)");
        }
        const MgfInputs mgf{artifacts->report.lambda_star,
                            &artifacts->report.q_tables};
        return simulate(sim, policy, &mgf);
    }
    return simulate(sim, policy);
}

PGrid parse_p_grid(const std::string& text) {
    PGrid grid;
    char colon1 = 0;
    char colon2 = 0;
    std::istringstream ss(text);
    ss >> grid.start >> colon1 >> grid.stop >> colon2 >> grid.step;
    if (!ss || colon1 != ':' || colon2 != ':' || (ss >> std::ws, !ss.eof())) {
        throw ConfigError("p-grid must be 'start:stop:step', got '" + text +
                          "'");
    }
    if (!(grid.start > 0.0) || !(grid.start <= grid.stop) ||
        !(grid.stop <= 1.0) || !(grid.step > 0.0)) {
        throw ConfigError(
            "p-grid needs 0 < start <= stop <= 1 and step > 0");
    }
    return grid;
}

std::vector<double> grid_points(const PGrid& grid) {
    std::vector<double> points;
    const auto count = static_cast<int>(
        std::floor((grid.stop - grid.start) / grid.step + 1e-9));
    for (int i = 0; i <= count; ++i) {
        points.push_back(grid.start + static_cast<double>(i) * grid.step);
    }
    return points;
}

SweepCell run_sweep_cell(const ExperimentConfig& base, double p, int buffer) {
    SweepCell cell;
    cell.p = p;
    cell.buffer = buffer;
    try {
        ExperimentConfig cfg = base;
        cfg.buffer = buffer;
        cfg.sensors.clear();
        for (const ArSourceModel& m : base.sensors) {
            cfg.sensors.emplace_back(m.coeffs(), m.noise_var(), p);
        }
        // Cell seed: master seed hashed with (p, buffer), so any cell can be
        // re-run in isolation and reproduce its row exactly.
        cfg.seed = rng::derive(rng::derive(base.seed, std::bit_cast<std::uint64_t>(p)),
                               static_cast<std::uint64_t>(buffer));
        const SolveArtifacts artifacts = solve_experiment(cfg);
        cell.lambda_star = artifacts.report.lambda_star;
        cell.result = run_policy(cfg, Policy::Mgf, &artifacts);
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    return cell;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& base,
                                 const PGrid& grid,
                                 const std::vector<int>& buffers) {
    if (buffers.empty()) {
        throw ConfigError("sweep needs a non-empty buffer list");
    }
    const std::vector<double> points = grid_points(grid);
    std::vector<SweepCell> cells;
    cells.reserve(points.size() * buffers.size());
    for (int buffer : buffers) {
        for (double p : points) {
            SweepCell cell = run_sweep_cell(base, p, buffer);
            if (cell.ok) {
                spdlog::info("sweep cell p={:.4f} b={}: lambda*={:.6f} "
                             "avg_error={:.6f}",
                             p, buffer, cell.lambda_star,
                             cell.result.avg_error);
            } else {
                spdlog::warn("sweep cell p={:.4f} b={} failed: {}", p, buffer,
                             cell.error);
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// --- CSV emission -----------------------------------------------------------

namespace {

std::string quote_csv(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string sim_header(int n_sensors, bool with_errors) {
    std::string h = "policy,p,buffer,avg_error,stderr,discounted_error";
    for (int n = 1; n <= n_sensors; ++n) {
        h += ",sched_rate_sensor_" + std::to_string(n);
    }
    if (with_errors) h += ",errors";
    return h + "\n";
}

std::string sim_row(const SimResult& r, int n_sensors, bool with_errors,
                    const std::string& error) {
    std::vector<std::string> cells;
    if (error.empty()) {
        cells = {r.policy,
                 csv::format_number(r.p_reported),
                 std::to_string(r.buffer),
                 csv::format_number(r.avg_error),
                 csv::format_number(r.avg_error_std_error),
                 csv::format_number(r.discounted_error)};
        for (double rate : r.sched_rate) {
            cells.push_back(csv::format_number(rate));
        }
    } else {
        cells = {r.policy, csv::format_number(r.p_reported),
                 std::to_string(r.buffer), "", "", ""};
        for (int n = 0; n < n_sensors; ++n) {
            cells.emplace_back();
        }
    }
    if (with_errors) {
        cells.push_back(error.empty() ? "" : quote_csv(error));
    }
    return csv::join_row(cells);
}

} // namespace

std::string simulate_csv(const SimResult& result) {
    const int n = static_cast<int>(result.sched_rate.size());
    return sim_header(n, false) + sim_row(result, n, false, "");
}

std::string sweep_csv(std::span<const SweepCell> cells, int n_sensors) {
    std::string out = sim_header(n_sensors, true);
    for (const SweepCell& cell : cells) {
        if (cell.ok) {
            out += sim_row(cell.result, n_sensors, true, "");
        } else {
            SimResult placeholder;
            placeholder.policy = policy_name(Policy::Mgf);
            placeholder.p_reported = cell.p;
            placeholder.buffer = cell.buffer;
            out += sim_row(placeholder, n_sensors, true, cell.error);
        }
    }
    return out;
}

std::string states_legend_csv(const StateSpace& space) {
    std::string out = "state_id,ages\n";
    for (int id = 0; id < space.size(); ++id) {
        out += std::to_string(id) + ",";
        const AgeVector& s = space.state(id);
        for (std::size_t i = 0; i < s.ages.size(); ++i) {
            if (i) out += ';';
            out += std::to_string(s.ages[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<ErrorCurveRow> error_curve(const ArSourceModel& model, int buffer,
                                       int delta_max,
                                       std::span<const int> fixed_ages) {
    if (buffer < 1) {
        throw ConfigError("buffer must be >= 1");
    }
    if (delta_max < 2) {
        throw ConfigError("delta_max must be >= 2");
    }
    if (static_cast<int>(fixed_ages.size()) != buffer - 1) {
        throw ConfigError("expected " + std::to_string(buffer - 1) +
                          " fixed ages for buffer size " +
                          std::to_string(buffer));
    }
    for (std::size_t i = 0; i < fixed_ages.size(); ++i) {
        if (fixed_ages[i] < 2 || fixed_ages[i] > delta_max) {
            throw ConfigError("fixed ages must lie in [2, delta_max]");
        }
        if (i > 0 && fixed_ages[i] <= fixed_ages[i - 1]) {
            throw ConfigError("fixed ages must be strictly increasing");
        }
    }

    AutocovarianceTable table =
        yule_walker_autocovariance(model, std::max(delta_max, model.order()));
    std::vector<ErrorCurveRow> rows;
    if (buffer >= 2) {
        const std::string label = "b" + std::to_string(buffer);
        std::vector<int> ages(fixed_ages.begin(), fixed_ages.end());
        ages.insert(ages.begin(), 0);
        for (int d1 = 1; d1 < fixed_ages.front(); ++d1) {
            ages.front() = d1;
            rows.push_back({label, d1, mmse_error(model, table, ages)});
        }
    }
    for (int d1 = 1; d1 <= delta_max; ++d1) {
        const int age[1] = {d1};
        rows.push_back({"b1", d1, mmse_error(model, table, age)});
    }
    return rows;
}

std::string error_curve_csv(std::span<const ErrorCurveRow> rows) {
    std::string out = "curve,delta_1,error\n";
    for (const ErrorCurveRow& row : rows) {
        out += row.curve + "," + std::to_string(row.delta1) + "," +
               csv::format_number(row.error) + "\n";
    }
    return out;
}

} // namespace agesched
