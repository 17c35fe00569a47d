#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace lfsel {

struct SmoOptions {
    double C = 1.0;
    double epsilon = 0.01;
    /// Stop when the maximal KKT violating pair gap drops below this.
    double tolerance = 1e-4;
    long max_iterations = 200000;
};

struct SmoResult {
    /// beta_i = alpha_i - alpha*_i, each within [-C, C].
    std::vector<double> beta;
    /// f(x) = sum_i beta_i K(x_i, x) - rho.
    double rho = 0.0;
    long iterations = 0;
    bool converged = false;
};

/// Epsilon-insensitive SVR dual over a precomputed (symmetric PSD) kernel
/// matrix, solved by SMO with second-order working-set selection.
SmoResult solve_svr_dual(const Eigen::MatrixXd& kernel, std::span<const double> target, const SmoOptions& options);

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double bandwidth);

/// Median of all pairwise Euclidean distances between rows of x.
double median_pairwise_distance(const Eigen::MatrixXd& x);

/// Kernel regressor on arbitrary feature rows.
struct SvrRegressor {
    double C = 1.0;
    double epsilon = 0.0;
    double bandwidth = 1.0;
    Eigen::MatrixXd support;  // one row per support vector
    std::vector<double> coef;
    double rho = 0.0;

    double predict(std::span<const double> x) const;
};

SvrRegressor fit_svr_regressor(const Eigen::MatrixXd& x, std::span<const double> target, const SmoOptions& options,
                               double bandwidth = 0.0);

struct SvrConfig {
    double C = 1.0;
    /// Tube half-width as a fraction of the training load standard deviation.
    double epsilon_fraction = 0.01;
    double tolerance = 1e-4;
    long max_iterations = 200000;
    std::size_t max_samples = 400;
    std::size_t max_lags = 24;
};

/// Autoregressive SVR over z-scored lags and weather at the target time.
struct SvrState {
    SvrConfig config;
    std::vector<std::size_t> lags;
    SvrRegressor regressor;
    double load_mean = 0.0;
    double load_scale = 1.0;
    std::vector<double> weather_mean;
    std::vector<double> weather_scale;
};

/// Lags 1..min(period, max_lags), plus the seasonal lag when it lies beyond.
std::vector<std::size_t> svr_lags(std::size_t period, std::size_t max_lags);

SvrState fit_svr(std::span<const double> y, std::span<const std::span<const double>> weather, std::size_t period,
                 const SvrConfig& config);

std::vector<double> svr_forecast(const SvrState& model, std::span<const double> y,
                                 std::span<const std::span<const double>> weather, std::size_t origin,
                                 std::size_t horizon);

}  // namespace lfsel
