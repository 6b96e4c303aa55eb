#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "agesched/aoi_dynamics.hpp"
#include "agesched/error_model.hpp"

namespace agesched {

/// Optimal value function V*(s) of the per-sensor sub-problem at a fixed
/// transmission price lambda and discount gamma.
struct ValueFunction {
    std::vector<double> values;
    double lambda = 0.0;
    double gamma = 0.0;
    /// Final sup-norm change between successive iterates.
    double residual = 0.0;
};

/// Action values Q*(s, a) for a in {0 = idle, 1 = transmit}, consistent with
/// the ValueFunction returned alongside it: values[s] = min(q0[s], q1[s]).
struct QTable {
    std::vector<double> q0;
    std::vector<double> q1;
    double lambda = 0.0;
    double gamma = 0.0;

    int size() const { return static_cast<int>(q0.size()); }
};

struct SolveResult {
    ValueFunction value;
    QTable q;
    std::uint64_t sweeps = 0;
};

/// Deterministic greedy policy; ties broken toward not transmitting.
struct SubProblemPolicy {
    std::vector<std::uint8_t> action;
};

struct ViOptions {
    double tol = 1e-9;
    std::uint64_t max_sweeps = 1'000'000;
    /// Optional warm start; value iteration starts from zero otherwise.
    std::span<const double> initial = {};
    /// When set, receives the sup-norm change of every sweep.
    std::vector<double>* residual_trace = nullptr;
};

/**
 * Solves the discounted sub-problem by synchronous value iteration:
 *
 *   V_{k+1}(s) = min_a [ err(s) + lambda*a + gamma * E_a V_k(s') ]
 *
 * stopping when the sup-norm change drops below tol*(1-gamma)/gamma, which
 * certifies ||V - V*||_inf <= tol by the gamma-contraction bound. Requires
 * gamma in [0, 1): the discounted formulation is the only one supported
 * (gamma = 0 converges in one sweep). The returned pair is exactly
 * consistent: values[s] = min_a Q(s, a).
 */
SolveResult value_iteration(const StateSpace& states,
                            const TransitionModel& trans,
                            const ErrorTable& errs, double lambda,
                            double gamma, double tol);

SolveResult value_iteration(const StateSpace& states,
                            const TransitionModel& trans,
                            const ErrorTable& errs, double lambda,
                            double gamma, const ViOptions& options);

/// action[s] = 1 iff q1[s] < q0[s] (strict; ties favour idling).
SubProblemPolicy greedy_policy(const QTable& q);

/// Gain of transmitting in `state_id`: q0 - q1. Positive means transmitting
/// is strictly better at price lambda.
double gain(const QTable& q, int state_id);

/// All gains as a dense vector.
std::vector<double> gains(const QTable& q);

/**
 * Expected discounted number of transmissions E[sum_t gamma^t u(t)] under a
 * fixed policy, from `initial`, computed by iterating the policy-evaluation
 * fixed point U(s) = action[s] + gamma * E U(s') to within 1e-10.
 */
double discounted_usage(const SubProblemPolicy& policy,
                        const StateSpace& states, const TransitionModel& trans,
                        const AgeVector& initial, double gamma);

/**
 * Repeated warm-started solves of one sensor's sub-problem across many
 * lambda values (the dual-ascent workhorse). Also evaluates the greedy
 * policy's discounted usage from the canonical initial state, caching the
 * result while the policy does not change.
 */
class SensorSolver {
  public:
    SensorSolver(const StateSpace& states, const TransitionModel& trans,
                 const ErrorTable& errs);

    const SolveResult& solve(double lambda, double gamma, double tol);
    /// Usage of the most recent solve's greedy policy.
    double usage(double gamma);
    const SolveResult& last() const { return last_; }
    /// Forget warm-start state (solves become cold again).
    void reset();

    double max_error() const { return max_error_; }
    int initial_id() const { return initial_id_; }
    std::uint64_t total_sweeps() const { return total_sweeps_; }

  private:
    std::vector<double> err_;
    std::vector<std::int32_t> succ_age_;
    std::vector<std::int32_t> succ_reset_;
    double success_prob_;
    int initial_id_;
    double max_error_;

    SolveResult last_;
    bool has_last_ = false;
    std::vector<double> usage_warm_;
    std::vector<double> cached_actions_;
    double cached_usage_ = 0.0;
    double cached_usage_gamma_ = -1.0;
    bool usage_valid_ = false;
    std::uint64_t total_sweeps_ = 0;
};

/// Debug dump: one row per state with columns state_id,err,V,Q0,Q1,gain.
void write_qtable_csv(std::ostream& out, const StateSpace& states,
                      const ErrorTable& errs, const SolveResult& solved);

} // namespace agesched
