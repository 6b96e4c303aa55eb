#include "agesched/aoi_dynamics.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>

#include "agesched/errors.hpp"

namespace agesched {

namespace {

std::string to_string(const AgeVector& state) {
    std::string s = "(";
    for (std::size_t i = 0; i < state.ages.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(state.ages[i]);
    }
    return s + ")";
}

} // namespace

void validate_age_vector(const AgeVector& state, int delta_max) {
    if (state.ages.empty()) {
        throw std::invalid_argument("age vector must not be empty");
    }
    for (std::size_t i = 0; i < state.ages.size(); ++i) {
        const int age = state.ages[i];
        if (age < 1 || age > delta_max) {
            throw std::invalid_argument("age " + std::to_string(age) +
                                        " outside [1, " +
                                        std::to_string(delta_max) + "]");
        }
        if (i > 0) {
            const int prev = state.ages[i - 1];
            // Ties are a saturation artifact and legal only at the cap.
            if (age < prev || (age == prev && age != delta_max)) {
                throw std::invalid_argument(
                    "ages must be strictly increasing below the cap: " +
                    to_string(state));
            }
        }
    }
}

AgeVector advance(const AgeVector& state, int scheduled, int success,
                  int delta_max) {
    const std::size_t b = state.ages.size();
    AgeVector next;
    next.ages.resize(b);
    if (scheduled != 0 && success != 0) {
        next.ages[0] = 1;
        for (std::size_t i = 0; i + 1 < b; ++i) {
            next.ages[i + 1] = std::min(state.ages[i] + 1, delta_max);
        }
    } else {
        for (std::size_t i = 0; i < b; ++i) {
            next.ages[i] = std::min(state.ages[i] + 1, delta_max);
        }
    }
    return next;
}

AgeVector initial_age_vector(int buffer_size) {
    AgeVector state;
    state.ages.resize(static_cast<std::size_t>(buffer_size));
    for (int i = 0; i < buffer_size; ++i) {
        state.ages[static_cast<std::size_t>(i)] = i + 1;
    }
    return state;
}

StateSpace StateSpace::enumerate(int buffer_size, int delta_max,
                                 std::size_t budget) {
    if (buffer_size < 1) {
        throw std::invalid_argument("buffer size must be >= 1");
    }
    if (delta_max < buffer_size + 1) {
        throw std::invalid_argument("delta_max must be >= buffer size + 1");
    }

    // Breadth-first closure from the initial state under both transition
    // outcomes (idle aging, successful delivery).
    std::set<AgeVector> seen;
    std::deque<AgeVector> frontier;
    AgeVector init = initial_age_vector(buffer_size);
    seen.insert(init);
    frontier.push_back(init);
    while (!frontier.empty()) {
        AgeVector cur = std::move(frontier.front());
        frontier.pop_front();
        for (AgeVector next : {advance(cur, 0, 0, delta_max),
                               advance(cur, 1, 1, delta_max)}) {
            if (seen.insert(next).second) {
                if (seen.size() > budget) {
                    throw CapacityError(
                        "state space exceeds budget of " +
                        std::to_string(budget) + " states (b=" +
                        std::to_string(buffer_size) + ", delta_max=" +
                        std::to_string(delta_max) + ")");
                }
                frontier.push_back(next);
            }
        }
    }

    StateSpace space;
    space.buffer_size_ = buffer_size;
    space.delta_max_ = delta_max;
    space.states_.assign(seen.begin(), seen.end()); // std::set: sorted
    space.initial_id_ = space.index(init);
    return space;
}

int StateSpace::try_index(const AgeVector& state) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), state);
    if (it == states_.end() || *it != state) {
        return -1;
    }
    return static_cast<int>(it - states_.begin());
}

int StateSpace::index(const AgeVector& state) const {
    const int id = try_index(state);
    if (id < 0) {
        throw std::out_of_range("age vector " + to_string(state) +
                                " is not in the enumerated state space");
    }
    return id;
}

StateSpace enumerate_states(int buffer_size, int delta_max,
                            std::size_t budget) {
    return StateSpace::enumerate(buffer_size, delta_max, budget);
}

std::vector<std::pair<AgeVector, double>>
transition_distribution(const AgeVector& state, int action,
                        const TransitionModel& model) {
    if (action == 0) {
        return {{advance(state, 0, 0, model.delta_max), 1.0}};
    }
    const double p = model.success_prob;
    AgeVector on_success = advance(state, 1, 1, model.delta_max);
    AgeVector on_failure = advance(state, 1, 0, model.delta_max);
    if (p >= 1.0) {
        return {{std::move(on_success), 1.0}};
    }
    if (p <= 0.0) {
        return {{std::move(on_failure), 1.0}};
    }
    if (on_success == on_failure) { // cannot happen (head 1 vs >= 2); kept total
        return {{std::move(on_success), 1.0}};
    }
    return {{std::move(on_success), p}, {std::move(on_failure), 1.0 - p}};
}

} // namespace agesched
