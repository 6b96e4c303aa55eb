#pragma once

#include <compare>
#include <cstddef>
#include <utility>
#include <vector>

namespace agesched {

/**
 * Ages of the b buffered packets of one sensor, freshest first:
 * ages[0] <= ... <= ages[b-1], each in [1, delta_max]. The sequence is
 * strictly increasing except that equal neighbours are permitted at the
 * truncation cap delta_max, where components saturate.
 */
struct AgeVector {
    std::vector<int> ages;

    int buffer_size() const { return static_cast<int>(ages.size()); }
    int head() const { return ages.front(); }

    friend auto operator<=>(const AgeVector&, const AgeVector&) = default;
};

/// Throws std::invalid_argument if `state` violates the AgeVector invariants
/// for the given truncation cap.
void validate_age_vector(const AgeVector& state, int delta_max);

/// One-slot transition of a single sensor's age vector. On a successful
/// delivery (scheduled && success) a fresh packet of age 1 enters and the
/// oldest buffered packet is dropped; otherwise every component ages by one.
/// Components saturate at delta_max.
AgeVector advance(const AgeVector& state, int scheduled, int success,
                  int delta_max);

/// Canonical initial buffer state (1, 2, ..., b): b back-to-back deliveries
/// just before t = 0.
AgeVector initial_age_vector(int buffer_size);

/**
 * All age vectors reachable from the initial state (1, ..., b) under
 * advance(), enumerated once and addressed by dense ids (lexicographic
 * order). Immutable after construction.
 */
class StateSpace {
  public:
    static StateSpace enumerate(int buffer_size, int delta_max,
                                std::size_t budget = 1'000'000);

    int size() const { return static_cast<int>(states_.size()); }
    const AgeVector& state(int id) const {
        return states_[static_cast<std::size_t>(id)];
    }
    /// Dense id of `state`; throws std::out_of_range if not enumerated.
    int index(const AgeVector& state) const;
    /// As index(), but returns -1 instead of throwing.
    int try_index(const AgeVector& state) const;

    int buffer_size() const { return buffer_size_; }
    int delta_max() const { return delta_max_; }
    int initial_id() const { return initial_id_; }

  private:
    StateSpace() = default;

    std::vector<AgeVector> states_; // sorted lexicographically
    int buffer_size_ = 0;
    int delta_max_ = 0;
    int initial_id_ = 0;
};

/// Convenience spelling matching the operation name used elsewhere.
StateSpace enumerate_states(int buffer_size, int delta_max,
                            std::size_t budget = 1'000'000);

/**
 * Per-sensor channel/truncation parameters of the controlled Markov chain.
 * success_prob may be 0 here (useful for solver edge cases) even though
 * ArSourceModel requires a strictly positive channel.
 */
struct TransitionModel {
    double success_prob = 1.0;
    int delta_max = 0;
};

/// Successor distribution of `state` under `action` (0 = idle, 1 = transmit).
/// Entries with identical successors are merged; probabilities sum to 1
/// exactly (they are p and 1-p, or a single 1).
std::vector<std::pair<AgeVector, double>>
transition_distribution(const AgeVector& state, int action,
                        const TransitionModel& model);

} // namespace agesched
