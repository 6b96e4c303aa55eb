#pragma once

#include <span>
#include <vector>

namespace agesched {

/**
 * Stationary scalar autoregressive source observed by one sensor:
 *
 *   X_t = a_1 X_{t-1} + ... + a_q X_{t-q} + W_t,   W_t ~ N(0, noise_var)
 *
 * transmitted over a channel that succeeds with probability success_prob per
 * attempt. Construction rejects models whose companion matrix has spectral
 * radius >= 1, since the autocovariance sequence (and with it every
 * estimation-error quantity downstream) only exists for stationary models.
 */
class ArSourceModel {
  public:
    ArSourceModel(std::vector<double> coeffs, double noise_var,
                  double success_prob);

    int order() const { return static_cast<int>(coeffs_.size()); }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double noise_var() const { return noise_var_; }
    double success_prob() const { return success_prob_; }
    /// Spectral radius of the companion matrix; < 1 for accepted models.
    double spectral_radius() const { return spectral_radius_; }

  private:
    std::vector<double> coeffs_;
    double noise_var_;
    double success_prob_;
    double spectral_radius_;
};

/**
 * Autocovariance sequence gamma[k] = Cov(X_t, X_{t-k}), k = 0..max_lag.
 * gamma[0..order] solve the Yule-Walker system; larger lags follow the AR
 * recursion gamma(k) = sum_i a_i gamma(k-i).
 */
struct AutocovarianceTable {
    std::vector<double> gamma;

    int max_lag() const { return static_cast<int>(gamma.size()) - 1; }
    double at(int k) const { return gamma.at(static_cast<std::size_t>(k)); }
};

/// Solves the Yule-Walker system for gamma[0..order] and extends the
/// sequence by the AR recursion up to max_lag. Throws NumericalError if the
/// system is singular.
AutocovarianceTable yule_walker_autocovariance(const ArSourceModel& model,
                                               int max_lag);

/// Grows an existing table in place (no-op if already long enough).
void extend_autocovariance(const ArSourceModel& model,
                           AutocovarianceTable& table, int max_lag);

} // namespace agesched
