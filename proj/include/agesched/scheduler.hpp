#pragma once

#include <span>
#include <string>
#include <vector>

namespace agesched {

/// Per-slot scheduling policies. Mgf needs per-sensor Q-tables solved at a
/// common lambda*; the rest are self-contained baselines.
enum class Policy {
    Mgf,          // maximum gain first (top non-negative Q-value gaps)
    MaxAgeFirst,  // largest head age wins
    RoundRobin,   // fixed rotation
    RandomM,      // M distinct sensors uniformly at random
    NeverTransmit,
};

/// CLI names: mgf, maf, rr, rand, never. Throws ConfigError on unknown names
/// with the valid list in the message.
Policy parse_policy(const std::string& name);
const char* policy_name(Policy policy);
std::vector<std::string> policy_names();

/// Sensors scheduled in one slot (at most M of them), in selection order.
struct SchedulerDecision {
    std::vector<int> scheduled;
};

/**
 * Maximum Gain First selection: among sensors with non-negative gain, pick
 * at most `channels` with the largest gains. Ties break toward the larger
 * head age, then the lower sensor index, so runs are reproducible. The
 * selection maximizes sum_n gain_n * u_n subject to sum_n u_n <= channels.
 */
SchedulerDecision mgf_select(std::span<const double> gains,
                             std::span<const int> head_ages, int channels);

} // namespace agesched
