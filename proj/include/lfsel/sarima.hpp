#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lfsel/random.hpp"

namespace lfsel {

/// Multiplicative seasonal ARIMA orders (p,d,q)(P,D,Q)_s.
struct SarimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;
    int P = 0;
    int D = 0;
    int Q = 0;
    std::size_t s = 0;

    int parameter_count() const noexcept { return p + q + P + Q; }
};

/// phi(B) Phi(B^s) w_t = theta(B) Theta(B^s) e_t with w = (1-B)^d (1-B^s)^D y,
/// phi(B) = 1 - sum phi_i B^i and theta(B) = 1 + sum theta_j B^j.
struct SarimaParams {
    SarimaOrder order;
    std::vector<double> ar;
    std::vector<double> ma;
    std::vector<double> seasonal_ar;
    std::vector<double> seasonal_ma;
    /// Subtracted from y before differencing; only non-zero when d = D = 0.
    double mean = 0.0;
    /// Innovation variance estimated from the conditional residuals.
    double sigma2 = 0.0;
};

struct SarimaFitOptions {
    int max_evaluations = 1500;
    double simplex_tolerance = 1e-5;
};

/// Hannan-Rissanen start followed by conditional-sum-of-squares refinement
/// with a Nelder-Mead simplex over a stationarity/invertibility-preserving
/// reparameterisation. Throws NonConvergence if no finite CSS is found.
SarimaParams fit_sarima(std::span<const double> y, const SarimaOrder& order,
                        const SarimaFitOptions& options = {});

/// Conditional sum of squares of the one-step errors.
double sarima_css(const SarimaParams& params, std::span<const double> y);

/// One-step-ahead errors y_t - E[y_t | y_<t] for t = 0..N-1; the first
/// d + D*s entries (no differenced value available) are zero.
std::vector<double> sarima_residuals(const SarimaParams& params, std::span<const double> y);

/// K-step forecast continuing `history`; future innovations are zero.
std::vector<double> sarima_forecast(const SarimaParams& params, std::span<const double> history,
                                    std::size_t horizon);

/// Draws a path of length n after discarding `burn_in` warm-up samples.
std::vector<double> simulate_sarima(const SarimaParams& params, std::size_t n, Rng& rng,
                                    std::size_t burn_in = 500);

/// Unconstrained values (tanh-mapped to partial autocorrelations) ->
/// coefficients of a stationary 1 - sum c_i B^i polynomial. The inverse
/// returns the partial autocorrelations themselves, not their atanh.
std::vector<double> pacf_to_coefficients(std::span<const double> unconstrained);
std::vector<double> coefficients_to_pacf(std::span<const double> coefficients);

}  // namespace lfsel
