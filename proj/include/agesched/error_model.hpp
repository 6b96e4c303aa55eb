#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "agesched/aoi_dynamics.hpp"
#include "agesched/ar_model.hpp"

namespace agesched {

/**
 * Minimum mean-squared error of estimating X_t from the buffered samples
 * {X_{t - d} : d in ages}. For a Gaussian AR source this is the conditional
 * variance
 *
 *   err(ages) = gamma(0) - c' Sigma^{-1} c,
 *
 * with c_i = gamma(d_i) and Sigma_ij = gamma(|d_i - d_j|) over the distinct
 * ages — exactly the mean-squared error a Kalman-filter receiver attains when
 * conditioning on the buffer contents. Duplicate ages (a truncation artifact)
 * are collapsed before conditioning; they carry no extra information and
 * would make Sigma singular. Grows `table` on demand up to max(ages).
 *
 * The Cholesky solve retries once with 1e-10 diagonal jitter before failing
 * with NumericalError (near-deterministic sources yield ill-conditioned
 * Toeplitz blocks).
 */
double mmse_error(const ArSourceModel& model, AutocovarianceTable& table,
                  std::span<const int> ages);

double mmse_error(const ArSourceModel& model, AutocovarianceTable& table,
                  const AgeVector& state);

/**
 * err(s) memoized over an enumerated state space, addressed by state id.
 * Values are guaranteed inside [noise_var, gamma(0)] up to 1e-9 slack;
 * construction fails loudly otherwise.
 */
class ErrorTable {
  public:
    ErrorTable(const StateSpace* space, std::vector<double> errors,
               double noise_floor, double prior_variance);

    double at(int id) const { return errors_[static_cast<std::size_t>(id)]; }
    int size() const { return static_cast<int>(errors_.size()); }
    const std::vector<double>& values() const { return errors_; }
    const StateSpace& space() const { return *space_; }
    /// noise_var of the generating model: a floor no conditioning can beat.
    double noise_floor() const { return noise_floor_; }
    /// gamma(0) of the generating model: the error of the empty predictor.
    double prior_variance() const { return prior_variance_; }

  private:
    const StateSpace* space_;
    std::vector<double> errors_;
    double noise_floor_;
    double prior_variance_;
};

/// Evaluates mmse_error on every enumerated state.
ErrorTable build_error_table(const ArSourceModel& model,
                             const StateSpace& states);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/**
 * Independent simulation oracle for mmse_error: simulates the AR process past
 * burn-in, fits the linear predictor of X_t from the samples at the requested
 * lags by solving the normal equations on empirical second moments, and
 * returns the mean squared residual with a batch-means standard error.
 * Deterministic for a fixed seed.
 */
MonteCarloEstimate monte_carlo_error(const ArSourceModel& model,
                                     std::span<const int> ages,
                                     std::int64_t n_samples,
                                     std::uint64_t seed);

} // namespace agesched
