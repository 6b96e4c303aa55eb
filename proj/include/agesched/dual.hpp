#pragma once

#include <span>
#include <string>
#include <vector>

#include "agesched/mdp_solver.hpp"

namespace agesched {

/// Projected subgradient ascent parameters. residual_tol <= 0 selects the
/// default 1e-3 * M / (1 - gamma) (one per mille of the relaxed budget).
struct DualConfig {
    double beta = 1.0;
    int max_iter = 500;
    double residual_tol = 0.0;
    double lambda_init = 0.0;
};

enum class DualStop {
    LambdaZero,  // lambda = 0 with nonpositive subgradient: unconstrained
    ResidualTol, // |subgradient| within residual_tol
    MaxIter,     // iteration budget exhausted
};

struct DualIterate {
    int k = 0;
    double lambda = 0.0;
    double subgradient = 0.0;
};

struct DualSolveReport {
    double lambda_star = 0.0;
    double budget = 0.0;     // M / (1 - gamma)
    double final_usage = 0.0;
    double dual_value = 0.0; // q(lambda_star)
    DualStop stop = DualStop::MaxIter;
    std::vector<DualIterate> iterates;
    std::vector<QTable> q_tables;     // per sensor, solved at lambda_star
    std::vector<double> sensor_usage; // per sensor, at lambda_star
};

struct DualValue {
    double value = 0.0;
    double subgradient = 0.0;
};

/**
 * Dual function q(lambda) and its exact subgradient. The relaxed problem
 * decomposes per sensor, so
 *
 *   q(lambda)  = sum_n V*_{n,lambda}(initial) - lambda * M/(1-gamma)
 *   q'(lambda) = sum_n usage_n(lambda)        -          M/(1-gamma)
 *
 * where usage_n is the greedy policy's expected discounted transmission
 * count, evaluated exactly (policy evaluation instead of sampled rollouts).
 */
DualValue dual_function(double lambda, std::span<SensorSolver> sensors,
                        int channels, double gamma, double vi_tol = 1e-9);

/**
 * Maximizes q over lambda >= 0 with the diminishing-step update
 *
 *   lambda(k+1) = max(0, lambda(k) + (beta / k) * q'(lambda(k)))
 *
 * stopping early when |q'| <= residual_tol or when lambda = 0 already
 * satisfies the relaxed constraint. Q-tables are re-solved at the returned
 * lambda*. Throws NumericalError on a non-finite subgradient.
 */
DualSolveReport dual_ascent(std::span<SensorSolver> sensors, int channels,
                            double gamma, const DualConfig& config,
                            double vi_tol = 1e-9);

struct GoldenResult {
    double lambda_star = 0.0;
    int evaluations = 0;
};

/**
 * Cross-check mode: golden-section search for the maximizer of the concave
 * dual on [0, lambda_hi]. lambda_hi <= 0 selects max_s err(s)/(1-gamma) + 1,
 * beyond which no sensor ever transmits. Independent of the ascent path.
 */
GoldenResult golden_section_lambda(std::span<SensorSolver> sensors,
                                   int channels, double gamma,
                                   double lambda_hi = 0.0, double tol = 1e-6,
                                   double vi_tol = 1e-9);

/// Serializes {"lambda_star", "budget", "final_usage", "iterates"} with the
/// project's canonical number formatting.
std::string dual_report_to_json(const DualSolveReport& report);

/// Parses lambda_star back out of a serialized report.
double lambda_star_from_json(const std::string& text);

} // namespace agesched
