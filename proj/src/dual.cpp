#include "agesched/dual.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>

#include "agesched/csv.hpp"
#include "agesched/errors.hpp"

namespace agesched {

namespace {

void check_dual_inputs(std::span<SensorSolver> sensors, int channels,
                       double gamma) {
    if (sensors.empty()) {
        throw std::invalid_argument("dual problem needs at least one sensor");
    }
    if (channels < 1) {
        throw std::invalid_argument("channel count must be >= 1");
    }
    if (!(gamma >= 0.0) || gamma >= 1.0) {
        throw std::invalid_argument("gamma must lie in [0, 1)");
    }
}

std::string trace_tail(const std::vector<DualIterate>& iterates) {
    std::string s;
    const std::size_t start =
        iterates.size() > 10 ? iterates.size() - 10 : std::size_t{0};
    for (std::size_t i = start; i < iterates.size(); ++i) {
        s += " (k=" + std::to_string(iterates[i].k) +
             ", lambda=" + csv::format_number(iterates[i].lambda) +
             ", g=" + csv::format_number(iterates[i].subgradient) + ")";
    }
    return s;
}

} // namespace

DualValue dual_function(double lambda, std::span<SensorSolver> sensors,
                        int channels, double gamma, double vi_tol) {
    check_dual_inputs(sensors, channels, gamma);
    const double budget = static_cast<double>(channels) / (1.0 - gamma);
    DualValue out;
    double value_sum = 0.0;
    double usage_sum = 0.0;
    for (SensorSolver& sensor : sensors) {
        const SolveResult& solved = sensor.solve(lambda, gamma, vi_tol);
        value_sum +=
            solved.value.values[static_cast<std::size_t>(sensor.initial_id())];
        usage_sum += sensor.usage(gamma);
    }
    out.value = value_sum - lambda * budget;
    out.subgradient = usage_sum - budget;
    return out;
}

DualSolveReport dual_ascent(std::span<SensorSolver> sensors, int channels,
                            double gamma, const DualConfig& config,
                            double vi_tol) {
    check_dual_inputs(sensors, channels, gamma);
    if (!(config.beta > 0.0)) {
        throw std::invalid_argument("beta must be > 0");
    }
    if (config.max_iter < 1) {
        throw std::invalid_argument("max_iter must be >= 1");
    }
    if (!(config.lambda_init >= 0.0)) {
        throw std::invalid_argument("lambda_init must be >= 0");
    }

    DualSolveReport report;
    report.budget = static_cast<double>(channels) / (1.0 - gamma);
    const double residual_tol = config.residual_tol > 0.0
                                    ? config.residual_tol
                                    : 1e-3 * report.budget;

    double lambda = config.lambda_init;
    report.stop = DualStop::MaxIter;
    for (int k = 1; k <= config.max_iter; ++k) {
        const DualValue dv = dual_function(lambda, sensors, channels, gamma,
                                           vi_tol);
        report.iterates.push_back({k, lambda, dv.subgradient});
        if (!std::isfinite(dv.subgradient) || !std::isfinite(dv.value)) {
            throw NumericalError("dual ascent produced a non-finite "
                                 "subgradient; last iterates:" +
                                 trace_tail(report.iterates));
        }
        if (std::fabs(dv.subgradient) <= residual_tol) {
            report.stop = DualStop::ResidualTol;
            break;
        }
        if (lambda == 0.0 && dv.subgradient <= 0.0) {
            report.stop = DualStop::LambdaZero;
            break;
        }
        lambda = std::max(
            0.0, lambda + config.beta / static_cast<double>(k) *
                              dv.subgradient);
    }
    if (report.stop != DualStop::MaxIter) {
        lambda = report.iterates.back().lambda;
    }
    report.lambda_star = lambda;

    // Re-solve at lambda* so the reported Q-tables, usage and dual value all
    // belong to the returned multiplier.
    report.q_tables.reserve(sensors.size());
    report.sensor_usage.reserve(sensors.size());
    double value_sum = 0.0;
    double usage_sum = 0.0;
    for (SensorSolver& sensor : sensors) {
        const SolveResult& solved =
            sensor.solve(report.lambda_star, gamma, vi_tol);
        value_sum +=
            solved.value.values[static_cast<std::size_t>(sensor.initial_id())];
        const double u = sensor.usage(gamma);
        report.q_tables.push_back(solved.q);
        report.sensor_usage.push_back(u);
        usage_sum += u;
    }
    report.final_usage = usage_sum;
    report.dual_value = value_sum - report.lambda_star * report.budget;
    return report;
}

GoldenResult golden_section_lambda(std::span<SensorSolver> sensors,
                                   int channels, double gamma,
                                   double lambda_hi, double tol,
                                   double vi_tol) {
    check_dual_inputs(sensors, channels, gamma);
    if (!(tol > 0.0)) {
        throw std::invalid_argument("tolerance must be > 0");
    }
    if (lambda_hi <= 0.0) {
        double max_err = 0.0;
        for (const SensorSolver& sensor : sensors) {
            max_err = std::max(max_err, sensor.max_error());
        }
        lambda_hi = max_err / (1.0 - gamma) + 1.0;
    }

    GoldenResult result;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0;
    double hi = lambda_hi;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = dual_function(x1, sensors, channels, gamma, vi_tol).value;
    double f2 = dual_function(x2, sensors, channels, gamma, vi_tol).value;
    result.evaluations = 2;
    while (hi - lo > tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = dual_function(x2, sensors, channels, gamma, vi_tol).value;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = dual_function(x1, sensors, channels, gamma, vi_tol).value;
        }
        ++result.evaluations;
    }
    result.lambda_star = 0.5 * (lo + hi);
    return result;
}

std::string dual_report_to_json(const DualSolveReport& report) {
    // Hand-rolled so every float goes through the canonical formatter
    // (nlohmann would re-format with shortest-round-trip digits).
    std::string s = "{\n";
    s += "  \"lambda_star\": " + csv::format_number(report.lambda_star) + ",\n";
    s += "  \"budget\": " + csv::format_number(report.budget) + ",\n";
    s += "  \"final_usage\": " + csv::format_number(report.final_usage) + ",\n";
    s += "  \"iterates\": [";
    for (std::size_t i = 0; i < report.iterates.size(); ++i) {
        if (i) s += ", ";
        s += "[" + std::to_string(report.iterates[i].k) + ", " +
             csv::format_number(report.iterates[i].lambda) + ", " +
             csv::format_number(report.iterates[i].subgradient) + "]";
    }
    s += "]\n}\n";
    return s;
}

double lambda_star_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    return j.at("lambda_star").get<double>();
}

} // namespace agesched
