#include "agesched/mdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "agesched/csv.hpp"
#include "agesched/errors.hpp"
#include "agesched/kernels.hpp"

namespace agesched {

namespace {

void check_solver_inputs(const StateSpace& states, const TransitionModel& trans,
                         const ErrorTable& errs, double lambda, double gamma) {
    if (!(gamma >= 0.0) || gamma >= 1.0) {
        throw std::invalid_argument(
            "gamma must lie in [0, 1): only the discounted formulation is "
            "supported (the dual scaling M/(1-gamma) diverges at gamma = 1)");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be finite and >= 0");
    }
    if (trans.delta_max != states.delta_max()) {
        throw std::invalid_argument(
            "transition model delta_max does not match the state space");
    }
    if (!(trans.success_prob >= 0.0) || !(trans.success_prob <= 1.0)) {
        throw std::invalid_argument("success_prob must lie in [0, 1]");
    }
    if (errs.size() != states.size() || &errs.space() != &states) {
        throw std::invalid_argument(
            "error table does not cover this state space");
    }
}

struct SuccessorArrays {
    std::vector<std::int32_t> age;
    std::vector<std::int32_t> reset;
};

SuccessorArrays compile_successors(const StateSpace& states) {
    const int n = states.size();
    SuccessorArrays out;
    out.age.resize(static_cast<std::size_t>(n));
    out.reset.resize(static_cast<std::size_t>(n));
    const int cap = states.delta_max();
    for (int id = 0; id < n; ++id) {
        const AgeVector& s = states.state(id);
        out.age[static_cast<std::size_t>(id)] =
            static_cast<std::int32_t>(states.index(advance(s, 0, 0, cap)));
        out.reset[static_cast<std::size_t>(id)] =
            static_cast<std::int32_t>(states.index(advance(s, 1, 1, cap)));
    }
    return out;
}

double stopping_threshold(double tol, double gamma) {
    return gamma > 0.0 ? tol * (1.0 - gamma) / gamma
                       : std::numeric_limits<double>::infinity();
}

SolveResult solve_compiled(std::span<const double> err,
                           std::span<const std::int32_t> succ_age,
                           std::span<const std::int32_t> succ_reset,
                           double success_prob, double lambda, double gamma,
                           const ViOptions& options) {
    if (!(options.tol > 0.0)) {
        throw std::invalid_argument("value-iteration tolerance must be > 0");
    }
    const std::size_t n = err.size();
    std::vector<double> v;
    if (!options.initial.empty()) {
        if (options.initial.size() != n) {
            throw std::invalid_argument("warm-start vector has wrong size");
        }
        v.assign(options.initial.begin(), options.initial.end());
    } else {
        v.assign(n, 0.0);
    }
    std::vector<double> v_next(n);

    const double threshold = stopping_threshold(options.tol, gamma);
    double diff = 0.0;
    std::uint64_t sweeps = 0;
    for (;;) {
        kernels::BellmanSweep sweep{err,   succ_age, succ_reset, lambda,
                                    gamma, success_prob, v, v_next};
        diff = kernels::bellman_sweep(sweep);
        v.swap(v_next);
        ++sweeps;
        if (options.residual_trace != nullptr) {
            options.residual_trace->push_back(diff);
        }
        if (diff <= threshold) {
            break;
        }
        if (sweeps >= options.max_sweeps) {
            throw NumericalError(
                "value iteration hit the sweep cap (" +
                std::to_string(options.max_sweeps) +
                ") without converging; this indicates a bug since the "
                "Bellman operator is a gamma-contraction");
        }
    }

    // One explicit backup from the converged iterate yields a (V, Q) pair
    // that is consistent by construction.
    SolveResult out;
    out.q.q0.resize(n);
    out.q.q1.resize(n);
    out.value.values.resize(n);
    const double p = success_prob;
    const double pc = 1.0 - p;
    for (std::size_t i = 0; i < n; ++i) {
        const double va = v[static_cast<std::size_t>(succ_age[i])];
        const double vr = v[static_cast<std::size_t>(succ_reset[i])];
        const double q0 = err[i] + gamma * va;
        const double q1 = (err[i] + lambda) + gamma * (p * vr + pc * va);
        out.q.q0[i] = q0;
        out.q.q1[i] = q1;
        out.value.values[i] = q0 < q1 ? q0 : q1;
    }
    out.value.lambda = lambda;
    out.value.gamma = gamma;
    out.value.residual = diff;
    out.q.lambda = lambda;
    out.q.gamma = gamma;
    out.sweeps = sweeps;
    return out;
}

} // namespace

SolveResult value_iteration(const StateSpace& states,
                            const TransitionModel& trans,
                            const ErrorTable& errs, double lambda,
                            double gamma, double tol) {
    ViOptions options;
    options.tol = tol;
    return value_iteration(states, trans, errs, lambda, gamma, options);
}

SolveResult value_iteration(const StateSpace& states,
                            const TransitionModel& trans,
                            const ErrorTable& errs, double lambda,
                            double gamma, const ViOptions& options) {
    check_solver_inputs(states, trans, errs, lambda, gamma);
    SuccessorArrays succ = compile_successors(states);
    return solve_compiled(errs.values(), succ.age, succ.reset,
                          trans.success_prob, lambda, gamma, options);
}

SubProblemPolicy greedy_policy(const QTable& q) {
    SubProblemPolicy policy;
    policy.action.resize(q.q0.size());
    for (std::size_t i = 0; i < q.q0.size(); ++i) {
        policy.action[i] = q.q1[i] < q.q0[i] ? 1 : 0;
    }
    return policy;
}

double gain(const QTable& q, int state_id) {
    return q.q0[static_cast<std::size_t>(state_id)] -
           q.q1[static_cast<std::size_t>(state_id)];
}

std::vector<double> gains(const QTable& q) {
    std::vector<double> out(q.q0.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = q.q0[i] - q.q1[i];
    }
    return out;
}

namespace {

double evaluate_usage(std::span<const double> act,
                      std::span<const std::int32_t> succ_age,
                      std::span<const std::int32_t> succ_reset,
                      double success_prob, double gamma, int initial_id,
                      std::vector<double>& warm) {
    const std::size_t n = act.size();
    if (warm.size() != n) {
        warm.assign(n, 0.0);
    }
    std::vector<double> next(n);
    const double threshold = stopping_threshold(1e-10, gamma);
    std::uint64_t sweeps = 0;
    for (;;) {
        kernels::PolicyEvalSweep sweep{act,   succ_age, succ_reset,
                                       gamma, success_prob, warm, next};
        const double diff = kernels::policy_eval_sweep(sweep);
        warm.swap(next);
        ++sweeps;
        if (diff <= threshold) {
            break;
        }
        if (sweeps >= 10'000'000ull) {
            throw NumericalError("policy evaluation failed to converge");
        }
    }
    return warm[static_cast<std::size_t>(initial_id)];
}

} // namespace

double discounted_usage(const SubProblemPolicy& policy,
                        const StateSpace& states, const TransitionModel& trans,
                        const AgeVector& initial, double gamma) {
    if (!(gamma >= 0.0) || gamma >= 1.0) {
        throw std::invalid_argument("gamma must lie in [0, 1)");
    }
    if (policy.action.size() != static_cast<std::size_t>(states.size())) {
        throw std::invalid_argument("policy does not cover the state space");
    }
    if (trans.delta_max != states.delta_max()) {
        throw std::invalid_argument(
            "transition model delta_max does not match the state space");
    }
    SuccessorArrays succ = compile_successors(states);
    std::vector<double> act(policy.action.size());
    for (std::size_t i = 0; i < act.size(); ++i) {
        act[i] = policy.action[i] ? 1.0 : 0.0;
    }
    std::vector<double> warm;
    return evaluate_usage(act, succ.age, succ.reset, trans.success_prob,
                          gamma, states.index(initial), warm);
}

SensorSolver::SensorSolver(const StateSpace& states,
                           const TransitionModel& trans, const ErrorTable& errs)
    : success_prob_(trans.success_prob), initial_id_(states.initial_id()) {
    if (trans.delta_max != states.delta_max()) {
        throw std::invalid_argument(
            "transition model delta_max does not match the state space");
    }
    if (errs.size() != states.size() || &errs.space() != &states) {
        throw std::invalid_argument(
            "error table does not cover this state space");
    }
    err_ = errs.values();
    SuccessorArrays succ = compile_successors(states);
    succ_age_ = std::move(succ.age);
    succ_reset_ = std::move(succ.reset);
    max_error_ = *std::max_element(err_.begin(), err_.end());
}

const SolveResult& SensorSolver::solve(double lambda, double gamma,
                                       double tol) {
    ViOptions options;
    options.tol = tol;
    if (has_last_ && last_.value.gamma == gamma) {
        options.initial = last_.value.values;
    }
    SolveResult result = solve_compiled(err_, succ_age_, succ_reset_,
                                        success_prob_, lambda, gamma, options);
    total_sweeps_ += result.sweeps;
    last_ = std::move(result);
    has_last_ = true;

    std::vector<double> actions(last_.q.q0.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        actions[i] = last_.q.q1[i] < last_.q.q0[i] ? 1.0 : 0.0;
    }
    if (actions != cached_actions_) {
        cached_actions_ = std::move(actions);
        usage_valid_ = false;
    }
    return last_;
}

double SensorSolver::usage(double gamma) {
    if (!has_last_) {
        throw std::logic_error("usage() called before solve()");
    }
    if (usage_valid_ && cached_usage_gamma_ == gamma) {
        return cached_usage_;
    }
    cached_usage_ = evaluate_usage(cached_actions_, succ_age_, succ_reset_,
                                   success_prob_, gamma, initial_id_,
                                   usage_warm_);
    cached_usage_gamma_ = gamma;
    usage_valid_ = true;
    return cached_usage_;
}

void SensorSolver::reset() {
    has_last_ = false;
    last_ = SolveResult{};
    usage_warm_.clear();
    cached_actions_.clear();
    usage_valid_ = false;
    total_sweeps_ = 0;
}

void write_qtable_csv(std::ostream& out, const StateSpace& states,
                      const ErrorTable& errs, const SolveResult& solved) {
    out << "state_id,err,V,Q0,Q1,gain\n";
    for (int id = 0; id < states.size(); ++id) {
        const auto i = static_cast<std::size_t>(id);
        out << id << ',' << csv::format_number(errs.at(id)) << ','
            << csv::format_number(solved.value.values[i]) << ','
            << csv::format_number(solved.q.q0[i]) << ','
            << csv::format_number(solved.q.q1[i]) << ','
            << csv::format_number(solved.q.q0[i] - solved.q.q1[i]) << '\n';
    }
}

} // namespace agesched
