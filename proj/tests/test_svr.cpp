#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "oracles.hpp"
#include "lfsel/error.hpp"
#include "lfsel/svr.hpp"

using namespace lfsel;

using testutil::kernel_of;
using testutil::kkt_violation;

TEST_SUITE("svr") {
    TEST_CASE("dual solution satisfies KKT conditions") {
        for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
            Rng rng(seed);
            Eigen::MatrixXd x(120, 3);
            std::vector<double> y(120);
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                for (Eigen::Index c = 0; c < 3; ++c) x(i, c) = standard_normal(rng);
                y[static_cast<std::size_t>(i)] = std::sin(x(i, 0)) + 0.5 * x(i, 1) * x(i, 2) + 0.3 * standard_normal(rng);
            }
            const Eigen::MatrixXd k = kernel_of(x, median_pairwise_distance(x));
            SmoOptions opt;
            opt.C = seed % 2 == 0 ? 1.0 : 0.2;
            opt.epsilon = 0.1;
            const auto r = solve_svr_dual(k, y, opt);
            REQUIRE(r.converged);
            CHECK(kkt_violation(k, y, r, opt.C, opt.epsilon) <= 1e-3);
        }
    }

    TEST_CASE("noise-free sine is fitted within the tube") {
        Eigen::MatrixXd x(200, 1);
        std::vector<double> y(200);
        for (Eigen::Index i = 0; i < 200; ++i) {
            x(i, 0) = 2.0 * std::numbers::pi * static_cast<double>(i) / 199.0;
            y[static_cast<std::size_t>(i)] = std::sin(x(i, 0));
        }
        SmoOptions opt;
        opt.epsilon = 0.01;
        const auto reg = fit_svr_regressor(x, y, opt);
        double se = 0.0;
        for (Eigen::Index i = 0; i < 200; ++i) {
            const double p = reg.predict(std::vector<double>{x(i, 0)});
            se += (p - y[static_cast<std::size_t>(i)]) * (p - y[static_cast<std::size_t>(i)]);
        }
        CHECK(std::sqrt(se / 200.0) <= opt.epsilon + 0.02);
        for (const double c : reg.coef) CHECK(std::abs(c) <= opt.C + 1e-12);
    }

    TEST_CASE("median pairwise distance matches brute force") {
        Rng rng(6);
        Eigen::MatrixXd x(31, 2);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = standard_normal(rng);
        std::vector<double> d;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < x.rows(); ++j) d.push_back((x.row(i) - x.row(j)).norm());
        }
        std::sort(d.begin(), d.end());
        const double med = d.size() % 2 == 1 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
        CHECK(median_pairwise_distance(x) == doctest::Approx(med).epsilon(1e-12));
    }

    TEST_CASE("lag set") {
        CHECK(svr_lags(24, 24) == std::vector<std::size_t>(
                                      {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24}));
        const auto l = svr_lags(168, 24);
        CHECK(l.size() == 25);
        CHECK(l.back() == 168);
        CHECK(svr_lags(7, 24).size() == 7);
    }

    TEST_CASE("autoregressive forecaster") {
        auto y = testutil::sine(24 * 30, 24.0, 2.0, 10.0);
        const auto n = testutil::white_noise(y.size(), 1);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.05 * n[i];
        const std::vector<std::span<const double>> none;
        const std::size_t origin = y.size() - 24;
        const auto model = fit_svr(std::span<const double>(y.data(), origin), none, 24, SvrConfig{});
        const auto f = svr_forecast(model, y, none, origin, 24);
        REQUIRE(f.size() == 24);
        double se = 0.0;
        for (std::size_t h = 0; h < 24; ++h) se += (f[h] - y[origin + h]) * (f[h] - y[origin + h]);
        CHECK(std::sqrt(se / 24.0) < 0.5);
        CHECK(f == svr_forecast(model, y, none, origin, 24));
    }
}
