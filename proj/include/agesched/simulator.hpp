#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "agesched/ar_model.hpp"
#include "agesched/error_model.hpp"
#include "agesched/mdp_solver.hpp"
#include "agesched/scheduler.hpp"

namespace agesched {

/// Multi-sensor discrete-time simulation setup. Buffer states start at the
/// canonical (1, ..., b) for every sensor and replication.
struct SimConfig {
    std::vector<ArSourceModel> sensors;
    int channels = 1;
    int buffer = 1;
    double gamma = 0.99;     // discount of the reported discounted metric
    std::int64_t horizon = 100'000;
    int replications = 10;
    std::uint64_t seed = 1;
    int delta_max = 100;
    /// Slots excluded from time averages; -1 selects the default 10*buffer.
    int warmup = -1;
};

int effective_warmup(const SimConfig& config);

struct SimResult {
    std::string policy;
    double p_reported = 0.0; // mean success probability across sensors
    int buffer = 0;
    /// Mean of err_n(Delta_n(t)) over post-warmup slots, sensors and
    /// replications, with the sample standard error across replications.
    double avg_error = 0.0;
    double avg_error_std_error = 0.0;
    /// Mean over replications of sum_t gamma^t sum_n err_n(Delta_n(t)).
    double discounted_error = 0.0;
    /// Post-warmup fraction of slots each sensor was scheduled.
    std::vector<double> sched_rate;
    /// Slots where more sensors than channels were scheduled; always 0.
    std::int64_t feasibility_violations = 0;
    int replications = 0;
    /// Per-replication post-warmup error means (for paired comparisons).
    std::vector<double> rep_avg_error;
};

/// Channel success of `sensor` in `slot` of `replication`: a pure function
/// of the master seed, so the draw stream is identical across policies
/// (common random numbers) and unscheduled sensors never perturb it.
bool channel_success(std::uint64_t seed, int replication, int sensor,
                     std::int64_t slot, double success_prob);

/// Per-slot hook for tests: observes decisions, channel outcomes and the
/// post-advance states.
struct SlotObservation {
    int replication = 0;
    std::int64_t slot = 0;
    std::span<const int> scheduled;
    std::span<const std::uint8_t> success;  // indexed by sensor
    std::span<const int> state_ids;         // states at the *start* of slot
};
using SimObserver = std::function<void(const SlotObservation&)>;

/// Artifacts the MGF policy needs: Q-tables solved at a common lambda*.
struct MgfInputs {
    double lambda_star = 0.0;
    const std::vector<QTable>* q_tables = nullptr;
};

/**
 * Runs the discrete-time loop: per slot, accumulate err_n of the current
 * state, decide, draw channel outcomes for scheduled sensors, advance.
 * Deterministic given (config, policy, seed). Throws std::invalid_argument
 * if `policy` is Mgf and `mgf` is missing or inconsistent.
 */
SimResult simulate(const SimConfig& config, Policy policy,
                   const MgfInputs* mgf = nullptr,
                   const SimObserver& observer = {});

/// Runs several policies against the identical channel-success stream
/// (common random numbers; the stream is policy-independent by construction).
std::vector<SimResult> evaluate_policy_suite(const SimConfig& config,
                                             std::span<const Policy> policies,
                                             const MgfInputs* mgf = nullptr);

} // namespace agesched
