#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lfsel/error.hpp"
#include "lfsel/models.hpp"

using namespace lfsel;

namespace {

// Day-level pattern repeating weekly, so the 168 h lag dominates.
std::vector<double> weekly_levels(std::size_t days) {
    const double level[7] = {0.0, 10.0, -5.0, 8.0, -10.0, 3.0, -6.0};
    std::vector<double> y(days * 24);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = 50.0 + level[(t / 24) % 7] + 0.5 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 24) / 24.0);
    }
    return y;
}

std::vector<double> noisy_daily(std::size_t days, std::uint64_t seed) {
    auto y = testutil::sine(days * 24, 24.0, 3.0, 20.0);
    const auto n = testutil::ar1(y.size(), 0.6, seed);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.4 * n[i];
    return y;
}

}  // namespace

TEST_SUITE("models") {
    TEST_CASE("catalogue") {
        CHECK(kAllModels.size() == 10);
        CHECK(model_name(ModelId::Sarima211) == "SARIMA(2,1,1)");
        CHECK(model_name(ModelId::Sarima515) == "SARIMA(5,1,5)");
        CHECK(model_name(ModelId::Lstm200) == "LSTM(200)");
        CHECK(model_name(ModelId::SimilarDay) == "SD");
        CHECK(model_from_number(9) == ModelId::Svr);
        CHECK_FALSE(model_from_number(11).has_value());
        const auto o = sarima_order(ModelId::Sarima412, 24);
        CHECK(o.p == 4);
        CHECK(o.q == 2);
        CHECK(o.P == 4);
        CHECK(o.Q == 2);
        CHECK(o.d == 1);
        CHECK(o.D == 1);
        CHECK(o.s == 24);
    }

    TEST_CASE("error metrics") {
        const std::vector<double> y{2, 4};
        const std::vector<double> f{1, 2};
        CHECK(rmse(y, y) == 0.0);
        CHECK(mape(y, y) == 0.0);
        CHECK(rmse(f, y) == doctest::Approx(std::sqrt(2.5)));
        CHECK(mape(f, y) == doctest::Approx(0.5));
        CHECK(rmse(std::vector<double>{3, 6}, std::vector<double>{6, 12}) == doctest::Approx(3.0 * std::sqrt(2.5)));
        CHECK(mape(std::vector<double>{3, 6}, std::vector<double>{6, 12}) == doctest::Approx(0.5));
        CHECK_THROWS_AS(rmse(f, std::vector<double>{1}), Error);
    }

    TEST_CASE("L2 norm and RMSE rank candidates identically") {
        Rng rng(1);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t k = 4 + static_cast<std::size_t>(uniform01(rng) * 100);
            std::vector<double> y(k);
            for (auto& v : y) v = standard_normal(rng);
            std::size_t best_rmse = 0, best_norm = 0;
            double min_rmse = 1e300, min_norm = 1e300;
            for (std::size_t m = 0; m < 10; ++m) {
                std::vector<double> f(k);
                double ss = 0.0;
                for (std::size_t i = 0; i < k; ++i) {
                    f[i] = y[i] + standard_normal(rng) * (0.5 + static_cast<double>(m) * uniform01(rng));
                    ss += (f[i] - y[i]) * (f[i] - y[i]);
                }
                if (rmse(f, y) < min_rmse) {
                    min_rmse = rmse(f, y);
                    best_rmse = m;
                }
                if (std::sqrt(ss) < min_norm) {
                    min_norm = std::sqrt(ss);
                    best_norm = m;
                }
            }
            CHECK(best_rmse == best_norm);
        }
    }

    TEST_CASE("feasibility thresholds") {
        // 30 days hourly with a one-week horizon leaves 720 - 336 = 384 samples.
        auto task = testutil::make_task(weekly_levels(30), 1.0, 168);
        const auto profile = profile_task(task);
        CHECK(profile.period == 168);
        CHECK(profile.min_train == 384);
        CHECK_FALSE(feasible(ModelId::Sarima515, task, profile));  // 384 < 3*168 + 20 + 10
        CHECK_FALSE(feasible(ModelId::Lstm125, task, profile));    // 384 < 10 * 168
        CHECK(feasible(ModelId::Svr, task, profile));              // 168 + 30 <= 384
        CHECK(feasible(ModelId::SimilarDay, task, profile));

        auto daily = testutil::make_task(noisy_daily(30, 2), 1.0, 24);
        const auto dp = profile_task(daily);
        CHECK(dp.period == 24);
        for (const auto id : kAllModels) CHECK(feasible(id, daily, dp));
    }

    TEST_CASE("pathological task fails every model") {
        const auto task = testutil::make_task(testutil::white_noise(8, 1), 1.0, 4);
        const auto row = run_all(task, earliest_split(task), 1);
        REQUIRE(row.size() == 10);
        for (const auto& o : row) {
            CHECK_FALSE(o.ok);
            CHECK(std::isinf(o.rmse));
        }
    }

    TEST_CASE("every model forecasts the full horizon and reruns agree") {
        const auto task = testutil::make_task(noisy_daily(30, 4), 1.0, 24);
        const auto split = random_split(task, 17);
        const auto a = run_all(task, split, 5);
        const auto b = run_all(task, split, 5);
        std::size_t best_a = 0, best_b = 0;
        for (std::size_t m = 0; m < kModelCount; ++m) {
            CHECK(a[m].ok);
            CHECK(a[m].rmse == b[m].rmse);
            if (a[m].rmse < a[best_a].rmse) best_a = m;
            if (b[m].rmse < b[best_b].rmse) best_b = m;
        }
        CHECK(best_a == best_b);
        for (const auto id : kAllModels) {
            const auto fitted = fit(id, task, split, 3);
            const auto r = predict(fitted, task, split);
            CHECK(r.yhat.size() == 24);
            for (const double v : r.yhat) CHECK(std::isfinite(v));
        }
    }

    TEST_CASE("SARIMA(2,1,1) continues a trend") {
        std::vector<double> y(24 * 30);
        for (std::size_t t = 0; t < y.size(); ++t) {
            y[t] = 100.0 + 0.05 * static_cast<double>(t) + 4.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 24) / 24.0);
        }
        const auto task = testutil::make_task(y, 1.0, 4);
        const auto split = split_at(task, y.size() - 4);
        const auto r = predict(fit(ModelId::Sarima211, task, split, 1), task, split);
        for (std::size_t h = 0; h < 4; ++h) {
            CHECK(std::abs(r.yhat[h] - y[y.size() - 4 + h]) <= 0.01 * y[y.size() - 4 + h]);
        }
    }

    TEST_CASE("fitting an infeasible model throws") {
        const auto task = testutil::make_task(weekly_levels(30), 1.0, 168);
        try {
            fit(ModelId::Lstm200, task, earliest_split(task), 1);
            FAIL("expected Infeasible");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Infeasible);
        }
    }
}
