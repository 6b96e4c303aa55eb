#include "agesched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "agesched/errors.hpp"

namespace agesched {

Policy parse_policy(const std::string& name) {
    if (name == "mgf") return Policy::Mgf;
    if (name == "maf") return Policy::MaxAgeFirst;
    if (name == "rr") return Policy::RoundRobin;
    if (name == "rand") return Policy::RandomM;
    if (name == "never") return Policy::NeverTransmit;
    std::string valid;
    for (const std::string& n : policy_names()) {
        if (!valid.empty()) valid += ", ";
        valid += n;
    }
    throw ConfigError("unknown policy '" + name + "' (valid: " + valid + ")");
}

const char* policy_name(Policy policy) {
    switch (policy) {
    case Policy::Mgf: return "mgf";
    case Policy::MaxAgeFirst: return "maf";
    case Policy::RoundRobin: return "rr";
    case Policy::RandomM: return "rand";
    case Policy::NeverTransmit: return "never";
    }
    return "?";
}

std::vector<std::string> policy_names() {
    return {"mgf", "maf", "rr", "rand", "never"};
}

SchedulerDecision mgf_select(std::span<const double> gains,
                             std::span<const int> head_ages, int channels) {
    if (gains.size() != head_ages.size()) {
        throw std::invalid_argument(
            "gains and head_ages must have equal length");
    }
    if (channels < 0) {
        throw std::invalid_argument("channel count must be >= 0");
    }
    for (double g : gains) {
        if (!std::isfinite(g)) {
            throw std::invalid_argument("gains must be finite");
        }
    }

    std::vector<int> candidates;
    candidates.reserve(gains.size());
    for (int i = 0; i < static_cast<int>(gains.size()); ++i) {
        if (gains[static_cast<std::size_t>(i)] >= 0.0) {
            candidates.push_back(i);
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        const double ga = gains[static_cast<std::size_t>(a)];
        const double gb = gains[static_cast<std::size_t>(b)];
        if (ga != gb) return ga > gb;
        const int ha = head_ages[static_cast<std::size_t>(a)];
        const int hb = head_ages[static_cast<std::size_t>(b)];
        if (ha != hb) return ha > hb;
        return a < b;
    });
    const std::size_t take =
        std::min(candidates.size(), static_cast<std::size_t>(channels));
    SchedulerDecision decision;
    decision.scheduled.assign(candidates.begin(),
                              candidates.begin() +
                                  static_cast<std::ptrdiff_t>(take));
    return decision;
}

} // namespace agesched
