#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "lfsel/error.hpp"
#include "lfsel/features.hpp"
#include "lfsel/sarima.hpp"

using namespace lfsel;

namespace {

double rms(std::span<const double> e) {
    double s = 0.0;
    for (const double v : e) s += v * v;
    return std::sqrt(s / static_cast<double>(e.size()));
}

// Largest modulus among the roots of 1 - sum c_i z^{-i}, via the companion matrix.
double spectral_radius(const std::vector<double>& c) {
    const auto p = static_cast<Eigen::Index>(c.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) m(0, j) = c[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < p; ++i) m(i, i - 1) = 1.0;
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

SarimaParams airline_like() {
    SarimaParams p;
    p.order = SarimaOrder{1, 1, 1, 1, 1, 1, 24};
    p.ar = {0.5};
    p.ma = {-0.3};
    p.seasonal_ar = {0.3};
    p.seasonal_ma = {-0.4};
    p.sigma2 = 1.0;
    return p;
}

}  // namespace

TEST_SUITE("sarima") {
    TEST_CASE("AR(1) coefficient is recovered") {
        const SarimaOrder order{1, 0, 0, 0, 0, 0, 1};
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto y = testutil::ar1(2000, 0.7, seed);
            const auto fit = fit_sarima(y, order);
            REQUIRE(fit.ar.size() == 1);
            CHECK(std::abs(fit.ar[0] - 0.7) <= 0.05);
        }
    }

    TEST_CASE("seasonal model one-step error is near the innovation scale") {
        Rng rng(2024);
        const auto truth = airline_like();
        const auto y = simulate_sarima(truth, 3000, rng);
        const std::span<const double> train(y.data(), 2000);
        const auto fit = fit_sarima(train, truth.order);
        const auto e = sarima_residuals(fit, y);
        const double r = rms(std::span<const double>(e).subspan(2000));
        CHECK(r <= 1.2 * std::sqrt(truth.sigma2));
    }

    TEST_CASE("residuals of a correctly specified fit are white") {
        Rng rng(77);
        const auto truth = airline_like();
        const auto y = simulate_sarima(truth, 2500, rng);
        const auto fit = fit_sarima(y, truth.order);
        const auto e = sarima_residuals(fit, y);
        const std::span<const double> tail = std::span<const double>(e).subspan(100);
        CHECK(h_acf(tail, 24) <= 0.1);
    }

    TEST_CASE("trend plus daily cycle is continued exactly") {
        // (1-B)(1-B^24) annihilates a linear trend plus any 24-periodic shape.
        std::vector<double> y(24 * 20);
        for (std::size_t t = 0; t < y.size(); ++t) {
            y[t] = 50.0 + 0.1 * static_cast<double>(t) + 3.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 24) / 24.0);
        }
        const SarimaOrder order{2, 1, 1, 2, 1, 1, 24};
        const auto fit = fit_sarima(std::span<const double>(y.data(), y.size() - 4), order);
        const auto f = sarima_forecast(fit, std::span<const double>(y.data(), y.size() - 4), 4);
        for (std::size_t h = 0; h < 4; ++h) {
            CHECK(std::abs(f[h] - y[y.size() - 4 + h]) <= 0.01 * std::abs(y[y.size() - 4 + h]));
        }
    }

    TEST_CASE("reparameterisation round trip keeps polynomials stationary") {
        Rng rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> u(1 + trial % 6);
            for (auto& v : u) v = 6.0 * (uniform01(rng) - 0.5);
            const auto c = pacf_to_coefficients(u);
            CHECK(spectral_radius(c) < 1.0);
            const auto back = coefficients_to_pacf(c);
            REQUIRE(back.size() == u.size());
            for (std::size_t i = 0; i < u.size(); ++i) CHECK(back[i] == doctest::Approx(std::tanh(u[i])).epsilon(1e-7));
        }
    }

    TEST_CASE("fitted model is stationary, invertible and deterministic") {
        Rng rng(5);
        const auto y = simulate_sarima(airline_like(), 1500, rng);
        const SarimaOrder order{3, 1, 3, 3, 1, 3, 24};
        const auto a = fit_sarima(y, order);
        const auto b = fit_sarima(y, order);
        CHECK(a.ar == b.ar);
        CHECK(a.ma == b.ma);
        CHECK(a.seasonal_ar == b.seasonal_ar);
        CHECK(spectral_radius(a.ar) < 1.0);
        CHECK(spectral_radius(a.seasonal_ar) < 1.0);
        std::vector<double> neg_ma(a.ma.size());
        std::transform(a.ma.begin(), a.ma.end(), neg_ma.begin(), [](double v) { return -v; });
        CHECK(spectral_radius(neg_ma) < 1.0);
        CHECK(std::isfinite(sarima_css(a, y)));
        const auto f = sarima_forecast(a, y, 48);
        CHECK(f.size() == 48);
        for (const double v : f) CHECK(std::isfinite(v));
    }

    TEST_CASE("too little data is rejected") {
        const auto y = testutil::white_noise(30, 1);
        CHECK_THROWS_AS(fit_sarima(y, SarimaOrder{5, 1, 5, 5, 1, 5, 24}), Error);
    }
}
