#include "agesched/ar_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "agesched/errors.hpp"

namespace agesched {

namespace {

double companion_spectral_radius(const std::vector<double>& coeffs) {
    const int q = static_cast<int>(coeffs.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(q, q);
    for (int j = 0; j < q; ++j) {
        companion(0, j) = coeffs[static_cast<std::size_t>(j)];
    }
    for (int i = 1; i < q; ++i) {
        companion(i, i - 1) = 1.0;
    }
    return companion.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

ArSourceModel::ArSourceModel(std::vector<double> coeffs, double noise_var,
                             double success_prob)
    : coeffs_(std::move(coeffs)), noise_var_(noise_var),
      success_prob_(success_prob) {
    if (coeffs_.empty()) {
        throw std::invalid_argument("AR model needs at least one coefficient");
    }
    for (double a : coeffs_) {
        if (!std::isfinite(a)) {
            throw std::invalid_argument("AR coefficients must be finite");
        }
    }
    if (!(noise_var_ > 0.0) || !std::isfinite(noise_var_)) {
        throw std::invalid_argument("noise_var must be positive");
    }
    if (!(success_prob_ > 0.0) || !(success_prob_ <= 1.0)) {
        throw std::invalid_argument("success_prob must lie in (0, 1]");
    }
    spectral_radius_ = companion_spectral_radius(coeffs_);
    if (!(spectral_radius_ < 1.0)) {
        throw std::invalid_argument(
            "AR model is not stationary: companion spectral radius " +
            std::to_string(spectral_radius_) + " >= 1");
    }
}

AutocovarianceTable yule_walker_autocovariance(const ArSourceModel& model,
                                               int max_lag) {
    if (max_lag < model.order()) {
        throw std::invalid_argument("max_lag must be >= model order");
    }
    const int q = model.order();
    const auto& a = model.coeffs();

    // Unknowns g_0..g_q. Row 0: g_0 - sum_i a_i g_i = noise_var.
    // Row k (1..q): g_k - sum_i a_i g_{|k-i|} = 0.
    const int n = q + 1;
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    sys(0, 0) = 1.0;
    for (int i = 1; i <= q; ++i) {
        sys(0, i) -= a[static_cast<std::size_t>(i - 1)];
    }
    rhs(0) = model.noise_var();
    for (int k = 1; k <= q; ++k) {
        sys(k, k) += 1.0;
        for (int i = 1; i <= q; ++i) {
            sys(k, std::abs(k - i)) -= a[static_cast<std::size_t>(i - 1)];
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys);
    if (qr.rank() < n) {
        throw NumericalError("Yule-Walker system is singular");
    }
    Eigen::VectorXd g = qr.solve(rhs);
    if (!g.allFinite()) {
        throw NumericalError("Yule-Walker solve produced non-finite values");
    }

    AutocovarianceTable table;
    table.gamma.assign(g.data(), g.data() + n);
    extend_autocovariance(model, table, max_lag);
    return table;
}

void extend_autocovariance(const ArSourceModel& model,
                           AutocovarianceTable& table, int max_lag) {
    const int q = model.order();
    const auto& a = model.coeffs();
    if (table.max_lag() < q) {
        throw std::invalid_argument(
            "autocovariance table must already cover lags 0..order");
    }
    for (int k = table.max_lag() + 1; k <= max_lag; ++k) {
        double g = 0.0;
        for (int i = 1; i <= q; ++i) {
            g += a[static_cast<std::size_t>(i - 1)] *
                 table.gamma[static_cast<std::size_t>(k - i)];
        }
        table.gamma.push_back(g);
    }
}

} // namespace agesched
