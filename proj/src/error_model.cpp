#include "agesched/error_model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "agesched/errors.hpp"
#include "agesched/rng.hpp"

namespace agesched {

namespace {

std::vector<int> distinct_sorted_ages(std::span<const int> ages) {
    if (ages.empty()) {
        throw std::invalid_argument("age set must not be empty");
    }
    std::vector<int> out(ages.begin(), ages.end());
    std::sort(out.begin(), out.end());
    if (out.front() < 1) {
        throw std::invalid_argument("ages must be >= 1");
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Solves S x = c for symmetric positive-definite S, retrying once with
/// diagonal jitter.
Eigen::VectorXd solve_spd(Eigen::MatrixXd sigma, const Eigen::VectorXd& c,
                          const char* context) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) {
        return llt.solve(c);
    }
    sigma.diagonal().array() += 1e-10;
    llt.compute(sigma);
    if (llt.info() == Eigen::Success) {
        return llt.solve(c);
    }
    throw NumericalError(std::string(context) +
                         ": covariance matrix is numerically singular "
                         "even after diagonal jitter");
}

} // namespace

double mmse_error(const ArSourceModel& model, AutocovarianceTable& table,
                  std::span<const int> ages) {
    const std::vector<int> lags = distinct_sorted_ages(ages);
    extend_autocovariance(model, table, lags.back());

    const int m = static_cast<int>(lags.size());
    Eigen::VectorXd c(m);
    Eigen::MatrixXd sigma(m, m);
    for (int i = 0; i < m; ++i) {
        c(i) = table.gamma[static_cast<std::size_t>(lags[i])];
        for (int j = 0; j < m; ++j) {
            const int lag = std::abs(lags[i] - lags[j]);
            sigma(i, j) = table.gamma[static_cast<std::size_t>(lag)];
        }
    }
    const Eigen::VectorXd x = solve_spd(sigma, c, "mmse_error");
    return table.gamma[0] - c.dot(x);
}

double mmse_error(const ArSourceModel& model, AutocovarianceTable& table,
                  const AgeVector& state) {
    return mmse_error(model, table, std::span<const int>(state.ages));
}

ErrorTable::ErrorTable(const StateSpace* space, std::vector<double> errors,
                       double noise_floor, double prior_variance)
    : space_(space), errors_(std::move(errors)), noise_floor_(noise_floor),
      prior_variance_(prior_variance) {
    if (space_ == nullptr ||
        errors_.size() != static_cast<std::size_t>(space_->size())) {
        throw std::invalid_argument(
            "error table must cover the state space exactly");
    }
    for (std::size_t id = 0; id < errors_.size(); ++id) {
        const double e = errors_[id];
        if (!std::isfinite(e) || e < noise_floor_ - 1e-9 ||
            e > prior_variance_ + 1e-9) {
            throw NumericalError(
                "estimation error " + std::to_string(e) + " for state id " +
                std::to_string(id) + " escapes [noise_var, gamma(0)]");
        }
    }
}

ErrorTable build_error_table(const ArSourceModel& model,
                             const StateSpace& states) {
    AutocovarianceTable table =
        yule_walker_autocovariance(model, states.delta_max());
    std::vector<double> errors(static_cast<std::size_t>(states.size()));
    for (int id = 0; id < states.size(); ++id) {
        try {
            errors[static_cast<std::size_t>(id)] =
                mmse_error(model, table, states.state(id));
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (state id " +
                                 std::to_string(id) + ")");
        }
    }
    return ErrorTable(&states, std::move(errors), model.noise_var(),
                      table.gamma[0]);
}

MonteCarloEstimate monte_carlo_error(const ArSourceModel& model,
                                     std::span<const int> ages,
                                     std::int64_t n_samples,
                                     std::uint64_t seed) {
    if (n_samples < 1000) {
        throw std::invalid_argument("monte_carlo_error needs >= 1000 samples");
    }
    const std::vector<int> lags = distinct_sorted_ages(ages);
    const int m = static_cast<int>(lags.size());
    const int q = model.order();
    const int max_lag = std::max(lags.back(), q);
    const std::int64_t burn_in = 5000 + 10LL * max_lag;
    const std::int64_t total = burn_in + n_samples + max_lag;

    const double sigma = std::sqrt(model.noise_var());
    const auto& a = model.coeffs();
    rng::Stream stream(rng::derive(seed, 0x6d63656272ull)); // "mcerr"

    std::vector<double> x(static_cast<std::size_t>(total), 0.0);
    for (std::int64_t t = 0; t < total; ++t) {
        double v = sigma * stream.next_normal();
        for (int i = 1; i <= q && i <= t; ++i) {
            v += a[static_cast<std::size_t>(i - 1)] *
                 x[static_cast<std::size_t>(t - i)];
        }
        x[static_cast<std::size_t>(t)] = v;
    }

    // Pass 1: empirical second moments of (features, target).
    const std::int64_t t0 = burn_in + max_lag;
    const std::int64_t t1 = t0 + n_samples;
    Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd cross = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd f(m);
    for (std::int64_t t = t0; t < t1; ++t) {
        for (int i = 0; i < m; ++i) {
            f(i) = x[static_cast<std::size_t>(t - lags[static_cast<std::size_t>(i)])];
        }
        moment.noalias() += f * f.transpose();
        cross.noalias() += f * x[static_cast<std::size_t>(t)];
    }
    moment /= static_cast<double>(n_samples);
    cross /= static_cast<double>(n_samples);
    const Eigen::VectorXd w = solve_spd(moment, cross, "monte_carlo_error");

    // Pass 2: residual mean square, with batch means for the standard error.
    const int n_batches = n_samples >= 100'000 ? 100 : 20;
    const std::int64_t batch_len = n_samples / n_batches;
    std::vector<double> batch_mean;
    batch_mean.reserve(static_cast<std::size_t>(n_batches));
    double total_sq = 0.0;
    double batch_sq = 0.0;
    std::int64_t in_batch = 0;
    for (std::int64_t t = t0; t < t1; ++t) {
        double pred = 0.0;
        for (int i = 0; i < m; ++i) {
            pred += w(i) *
                    x[static_cast<std::size_t>(t - lags[static_cast<std::size_t>(i)])];
        }
        const double r = x[static_cast<std::size_t>(t)] - pred;
        const double sq = r * r;
        total_sq += sq;
        batch_sq += sq;
        if (++in_batch == batch_len &&
            static_cast<std::int64_t>(batch_mean.size()) < n_batches - 1) {
            batch_mean.push_back(batch_sq / static_cast<double>(in_batch));
            batch_sq = 0.0;
            in_batch = 0;
        }
    }
    batch_mean.push_back(batch_sq / static_cast<double>(in_batch));

    MonteCarloEstimate out;
    out.estimate = total_sq / static_cast<double>(n_samples);
    double var = 0.0;
    for (double bm : batch_mean) {
        const double d = bm - out.estimate;
        var += d * d;
    }
    const auto nb = static_cast<double>(batch_mean.size());
    var /= nb * (nb - 1.0); // variance of the mean of batch means
    out.std_error = std::sqrt(var);
    return out;
}

} // namespace agesched
