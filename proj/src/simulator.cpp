#include "agesched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "agesched/errors.hpp"
#include "agesched/rng.hpp"

namespace agesched {

namespace {

constexpr std::uint64_t kChannelSalt = 0x6368616e6e656cull; // "channel"
constexpr std::uint64_t kPolicySalt = 0x72616e646f6dull;    // "random"

std::uint64_t channel_sensor_key(std::uint64_t seed, int replication,
                                 int sensor) {
    std::uint64_t key = rng::derive(seed, kChannelSalt);
    key = rng::derive(key, static_cast<std::uint64_t>(replication));
    return rng::derive(key, static_cast<std::uint64_t>(sensor));
}

void validate_config(const SimConfig& config) {
    if (config.sensors.empty()) {
        throw std::invalid_argument("simulation needs at least one sensor");
    }
    if (config.channels < 1) {
        throw std::invalid_argument("channel count must be >= 1");
    }
    if (config.buffer < 1) {
        throw std::invalid_argument("buffer size must be >= 1");
    }
    if (!(config.gamma >= 0.0) || config.gamma >= 1.0) {
        throw std::invalid_argument("gamma must lie in [0, 1)");
    }
    if (config.horizon < 1) {
        throw std::invalid_argument("horizon must be >= 1");
    }
    if (config.replications < 1) {
        throw std::invalid_argument("replications must be >= 1");
    }
    if (effective_warmup(config) >= config.horizon) {
        throw std::invalid_argument(
            "warmup must be smaller than the horizon");
    }
}

} // namespace

int effective_warmup(const SimConfig& config) {
    return config.warmup >= 0 ? config.warmup : 10 * config.buffer;
}

bool channel_success(std::uint64_t seed, int replication, int sensor,
                     std::int64_t slot, double success_prob) {
    const std::uint64_t key = channel_sensor_key(seed, replication, sensor);
    const std::uint64_t h =
        rng::derive(key, static_cast<std::uint64_t>(slot));
    return rng::to_unit(h) < success_prob;
}

SimResult simulate(const SimConfig& config, Policy policy,
                   const MgfInputs* mgf, const SimObserver& observer) {
    validate_config(config);
    const int n_sensors = static_cast<int>(config.sensors.size());

    const StateSpace space =
        StateSpace::enumerate(config.buffer, config.delta_max);
    const int n_states = space.size();

    std::vector<ErrorTable> errors;
    errors.reserve(config.sensors.size());
    for (const ArSourceModel& model : config.sensors) {
        errors.push_back(build_error_table(model, space));
    }

    if (policy == Policy::Mgf) {
        if (mgf == nullptr || mgf->q_tables == nullptr) {
            throw std::invalid_argument(
                "the mgf policy needs Q-tables solved at a common lambda*");
        }
        if (static_cast<int>(mgf->q_tables->size()) != n_sensors) {
            throw std::invalid_argument(
                "one Q-table per sensor is required for mgf");
        }
        for (const QTable& q : *mgf->q_tables) {
            if (q.size() != n_states) {
                throw std::invalid_argument(
                    "Q-table does not match the simulated state space "
                    "(different buffer or delta_max?)");
            }
            if (q.lambda != mgf->lambda_star) {
                throw std::invalid_argument(
                    "all Q-tables must be solved at the same lambda*");
            }
        }
    }

    // Dense per-state arrays for the hot loop.
    std::vector<std::int32_t> succ_age(static_cast<std::size_t>(n_states));
    std::vector<std::int32_t> succ_reset(static_cast<std::size_t>(n_states));
    std::vector<int> head_age(static_cast<std::size_t>(n_states));
    for (int id = 0; id < n_states; ++id) {
        const AgeVector& s = space.state(id);
        succ_age[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(
            space.index(advance(s, 0, 0, config.delta_max)));
        succ_reset[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(
            space.index(advance(s, 1, 1, config.delta_max)));
        head_age[static_cast<std::size_t>(id)] = s.head();
    }

    const int warmup = effective_warmup(config);
    const std::int64_t measured = config.horizon - warmup;
    const double gamma = config.gamma;

    SimResult result;
    result.policy = policy_name(policy);
    result.buffer = config.buffer;
    result.replications = config.replications;
    result.sched_rate.assign(config.sensors.size(), 0.0);
    double p_mean = 0.0;
    for (const ArSourceModel& m : config.sensors) {
        p_mean += m.success_prob();
    }
    result.p_reported = p_mean / static_cast<double>(n_sensors);

    std::vector<int> state_id(config.sensors.size());
    std::vector<std::uint8_t> success(config.sensors.size());
    std::vector<double> gains_buf(config.sensors.size());
    std::vector<int> heads_buf(config.sensors.size());
    std::vector<int> rand_order(config.sensors.size());
    std::vector<std::int64_t> sched_count(config.sensors.size());
    double disc_total = 0.0;

    for (int rep = 0; rep < config.replications; ++rep) {
        std::fill(state_id.begin(), state_id.end(), space.initial_id());
        std::fill(sched_count.begin(), sched_count.end(), std::int64_t{0});
        double err_sum = 0.0;
        double disc_sum = 0.0;
        double discount = 1.0;
        SchedulerDecision decision;

        for (std::int64_t t = 0; t < config.horizon; ++t) {
            double slot_err = 0.0;
            for (int n = 0; n < n_sensors; ++n) {
                slot_err += errors[static_cast<std::size_t>(n)].at(
                    state_id[static_cast<std::size_t>(n)]);
            }
            if (t >= warmup) {
                err_sum += slot_err;
            }
            disc_sum += discount * slot_err;
            discount *= gamma;

            decision.scheduled.clear();
            switch (policy) {
            case Policy::NeverTransmit:
                break;
            case Policy::RoundRobin: {
                const int take = std::min(config.channels, n_sensors);
                for (int j = 0; j < take; ++j) {
                    decision.scheduled.push_back(static_cast<int>(
                        (t * config.channels + j) %
                        static_cast<std::int64_t>(n_sensors)));
                }
                break;
            }
            case Policy::MaxAgeFirst: {
                const int take = std::min(config.channels, n_sensors);
                std::iota(rand_order.begin(), rand_order.end(), 0);
                std::partial_sort(
                    rand_order.begin(), rand_order.begin() + take,
                    rand_order.end(), [&](int a, int b) {
                        const int ha =
                            head_age[static_cast<std::size_t>(
                                state_id[static_cast<std::size_t>(a)])];
                        const int hb =
                            head_age[static_cast<std::size_t>(
                                state_id[static_cast<std::size_t>(b)])];
                        if (ha != hb) return ha > hb;
                        return a < b;
                    });
                decision.scheduled.assign(rand_order.begin(),
                                          rand_order.begin() + take);
                break;
            }
            case Policy::RandomM: {
                const int take = std::min(config.channels, n_sensors);
                std::iota(rand_order.begin(), rand_order.end(), 0);
                std::uint64_t key = rng::derive(config.seed, kPolicySalt);
                key = rng::derive(key, static_cast<std::uint64_t>(rep));
                key = rng::derive(key, static_cast<std::uint64_t>(t));
                for (int j = 0; j < take; ++j) {
                    const auto pick = static_cast<int>(rng::bound(
                        rng::derive(key, static_cast<std::uint64_t>(j)),
                        static_cast<std::uint64_t>(n_sensors - j)));
                    std::swap(rand_order[static_cast<std::size_t>(j)],
                              rand_order[static_cast<std::size_t>(j + pick)]);
                    decision.scheduled.push_back(
                        rand_order[static_cast<std::size_t>(j)]);
                }
                break;
            }
            case Policy::Mgf: {
                for (int n = 0; n < n_sensors; ++n) {
                    const QTable& q =
                        (*mgf->q_tables)[static_cast<std::size_t>(n)];
                    const auto id = static_cast<std::size_t>(
                        state_id[static_cast<std::size_t>(n)]);
                    gains_buf[static_cast<std::size_t>(n)] =
                        q.q0[id] - q.q1[id];
                    heads_buf[static_cast<std::size_t>(n)] =
                        head_age[id];
                }
                decision = mgf_select(gains_buf, heads_buf, config.channels);
                break;
            }
            }

            if (static_cast<int>(decision.scheduled.size()) >
                config.channels) {
                ++result.feasibility_violations; // cannot happen by design
            }

            std::fill(success.begin(), success.end(), std::uint8_t{0});
            for (int n : decision.scheduled) {
                if (t >= warmup) {
                    ++sched_count[static_cast<std::size_t>(n)];
                }
                if (channel_success(
                        config.seed, rep, n, t,
                        config.sensors[static_cast<std::size_t>(n)]
                            .success_prob())) {
                    success[static_cast<std::size_t>(n)] = 1;
                }
            }

            if (observer) {
                observer(SlotObservation{rep, t, decision.scheduled, success,
                                         state_id});
            }

            for (int n = 0; n < n_sensors; ++n) {
                const auto id = static_cast<std::size_t>(
                    state_id[static_cast<std::size_t>(n)]);
                state_id[static_cast<std::size_t>(n)] =
                    success[static_cast<std::size_t>(n)]
                        ? succ_reset[id]
                        : succ_age[id];
            }
        }

        const double rep_avg =
            err_sum / (static_cast<double>(measured) *
                       static_cast<double>(n_sensors));
        result.rep_avg_error.push_back(rep_avg);
        disc_total += disc_sum;
        for (std::size_t n = 0; n < sched_count.size(); ++n) {
            result.sched_rate[n] += static_cast<double>(sched_count[n]) /
                                    static_cast<double>(measured);
        }
    }

    const auto reps = static_cast<double>(config.replications);
    result.avg_error = 0.0;
    for (double v : result.rep_avg_error) {
        result.avg_error += v;
    }
    result.avg_error /= reps;
    double var = 0.0;
    for (double v : result.rep_avg_error) {
        const double d = v - result.avg_error;
        var += d * d;
    }
    result.avg_error_std_error =
        config.replications > 1
            ? std::sqrt(var / (reps * (reps - 1.0)))
            : 0.0;
    result.discounted_error = disc_total / reps;
    for (double& rate : result.sched_rate) {
        rate /= reps;
    }
    return result;
}

std::vector<SimResult> evaluate_policy_suite(const SimConfig& config,
                                             std::span<const Policy> policies,
                                             const MgfInputs* mgf) {
    std::vector<SimResult> results;
    results.reserve(policies.size());
    for (Policy policy : policies) {
        results.push_back(simulate(config, policy,
                                   policy == Policy::Mgf ? mgf : nullptr));
    }
    return results;
}

} // namespace agesched
