#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "lfsel/error.hpp"
#include "lfsel/features.hpp"

using namespace lfsel;
using testutil::rel_diff;
using testutil::random_series;
namespace oracle = testutil::oracle;

TEST_SUITE("features") {
    TEST_CASE("moment examples") {
        const std::vector<double> alt{-1, 1, -1, 1, -1, 1};
        CHECK(kurtosis(alt) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(skewness(std::vector<double>{-1, 0, 1}) == doctest::Approx(0.0));
        CHECK(skewness(std::vector<double>{0, 0, 0, 1}) == doctest::Approx(1.1547005383792515).epsilon(1e-12));
        const auto y = testutil::white_noise(500, 4);
        std::vector<double> neg(y.size());
        std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
        CHECK(skewness(y) == doctest::Approx(-skewness(neg)).epsilon(1e-12));
    }

    TEST_CASE("kurtosis of a normal sample") {
        const auto y = testutil::white_noise(1000000, 8);
        CHECK(std::abs(kurtosis(y) - 3.0) < 0.05);
    }

    TEST_CASE("constant series is degenerate") {
        const std::vector<double> c(20, 3.0);
        CHECK_THROWS_AS(kurtosis(c), Error);
        CHECK_THROWS_AS(skewness(c), Error);
        const auto task = testutil::make_task(std::vector<double>(30 * 24, 5.0), 1.0, 24);
        try {
            extract_features(task);
            FAIL("expected DegenerateSeries");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateSeries);
        }
    }

    TEST_CASE("fickleness examples") {
        CHECK(fickleness(std::vector<double>{-1, 1, -1, 1}) == 0.0);
        CHECK(fickleness(std::vector<double>(8, 2.0)) == doctest::Approx(7.0 / 8.0));
        CHECK(fickleness(std::vector<double>{1, 2, 3, 4, 5, 6}) == doctest::Approx(4.0 / 6.0));
    }

    TEST_CASE("acf and pacf examples") {
        const auto y = testutil::white_noise(400, 2);
        CHECK(acf(y, 0) == doctest::Approx(1.0));
        const auto s = testutil::sine(24 * 20, 24.0);
        // N denominator: a full-period lag of a pure cycle gives (N - lag) / N.
        CHECK(acf(s, 24) == doctest::Approx(456.0 / 480.0).epsilon(1e-12));
        const auto a = testutil::ar1(5000, 0.7, 5);
        CHECK(std::abs(pacf(a, 2)) < 2.0 / std::sqrt(5000.0));
        CHECK(pacf(a, 1) == doctest::Approx(acf(a, 1)).epsilon(1e-12));
        CHECK_THROWS_AS(acf(y, 201), Error);
    }

    TEST_CASE("h_acf and h_pacf") {
        CHECK(h_acf(testutil::white_noise(10000, 6), 24) <= 0.05);
        CHECK(h_acf(testutil::sine(24 * 30, 24.0), 24) == doctest::Approx(1.0).epsilon(0.02));
        const double h = h_acf(testutil::ar1(20000, 0.7, 9), 24);
        CHECK(std::abs(h - 0.7) < 0.05);
        CHECK(h_pacf(testutil::ar1(20000, 0.7, 9), 24) == doctest::Approx(h).epsilon(0.05));
        CHECK_THROWS_AS(h_acf(std::vector<double>{1, 2, 3, 4}, 2), Error);
    }

    TEST_CASE("periodicity") {
        // Hourly daily cycle with noise.
        auto y = testutil::sine(24 * 60, 24.0, 3.0, 10.0);
        const auto n = testutil::white_noise(y.size(), 3);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.3 * n[i];
        CHECK(periodicity(y, 1.0) == 24);
        // Daily data with a monthly cycle.
        CHECK(periodicity(testutil::sine(360, 30.0, 1.0, 5.0), 24.0) == 30);
        // Daily data with a 12-day cycle: neither 7 nor 30 correlates.
        CHECK(periodicity(testutil::sine(360, 12.0, 1.0, 5.0), 24.0) == 12);
        CHECK_THROWS_AS(periodicity(testutil::sine(100, 24.0), 1.0), Error);
    }

    TEST_CASE("extract_features copies requirements and fills statistics") {
        auto y = testutil::sine(30 * 24, 24.0, 2.0, 10.0);
        const auto n = testutil::white_noise(y.size(), 5);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.2 * n[i];
        const auto task = testutil::make_task(y, 1.0, 24, {WeatherChannel{"temperature", n}});
        const auto f = extract_features(task);
        CHECK(f[Feature::DataLength] == 30);
        CHECK(f[Feature::Granularity] == 1.0);
        CHECK(f[Feature::WeatherCount] == 1);
        CHECK(f[Feature::Horizon] == 24);
        CHECK(f[Feature::Min] <= f[Feature::Mean]);
        CHECK(f[Feature::Mean] <= f[Feature::Max]);
        CHECK(f[Feature::StdDev] > 0.0);
        CHECK(f[Feature::Fickleness] >= 0.0);
        CHECK(f[Feature::Fickleness] <= 1.0);
        CHECK(f[Feature::HAcf] <= 1.0);
        CHECK(f[Feature::HPacf] <= 1.0);
        CHECK(f[Feature::Periodicity] == 24);
        for (const double v : f.values) CHECK(std::isfinite(v));
        CHECK(f[Feature::Kurtosis] == doctest::Approx(oracle::kurtosis(y)).epsilon(1e-9));
        CHECK(extract_features(task) == f);
        const auto row = feature_csv_row(task.id, f);
        CHECK(std::count(row.begin(), row.end(), ',') == 16);
    }

    TEST_CASE("statistics agree with brute-force oracles on 100 random series") {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto y = random_series(1000 + seed);
            worst = std::max(worst, rel_diff(kurtosis(y), oracle::kurtosis(y)));
            worst = std::max(worst, rel_diff(skewness(y), oracle::skewness(y)));
            worst = std::max(worst, rel_diff(fickleness(y), oracle::fickleness(y)));
            for (const std::size_t lag : {1, 2, 5, 11, 24}) {
                worst = std::max(worst, rel_diff(acf(y, lag), oracle::acf(y, lag)));
            }
            for (const std::size_t lag : {1, 2, 3, 7, 12}) {
                worst = std::max(worst, rel_diff(pacf(y, lag), oracle::pacf(y, lag)));
            }
        }
        CHECK(worst < 1e-9);
    }

    TEST_CASE("statistics are invariant to positive affine maps") {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto y = random_series(5000 + seed);
            Rng rng(seed);
            const double a = std::exp(6.0 * uniform01(rng) - 3.0);
            const double b = 1000.0 * (uniform01(rng) - 0.5);
            std::vector<double> z(y.size());
            std::transform(y.begin(), y.end(), z.begin(), [&](double v) { return a * v + b; });
            worst = std::max(worst, rel_diff(kurtosis(y), kurtosis(z)));
            worst = std::max(worst, rel_diff(skewness(y), skewness(z)));
            worst = std::max(worst, rel_diff(fickleness(y), fickleness(z)));
            worst = std::max(worst, rel_diff(h_acf(y, 12), h_acf(z, 12)));
            worst = std::max(worst, rel_diff(h_pacf(y, 12), h_pacf(z, 12)));
            for (const std::size_t lag : {1, 3, 9}) {
                worst = std::max(worst, rel_diff(acf(y, lag), acf(z, lag)));
                worst = std::max(worst, rel_diff(pacf(y, lag), pacf(z, lag)));
            }
            CHECK(periodicity_among(y, std::vector<std::size_t>{7, 12}) ==
                  periodicity_among(z, std::vector<std::size_t>{7, 12}));
        }
        CHECK(worst < 1e-9);
    }
}
