#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "lfsel/random.hpp"
#include "lfsel/series.hpp"

namespace testutil {

using namespace std::chrono;

inline lfsel::TimePoint jan1() { return lfsel::TimePoint{sys_days{year{2020} / January / 1}}; }

inline lfsel::TaskRequirements requirements(double granularity, int history_days, int horizon, int n_weather = 0) {
    lfsel::TaskRequirements r;
    r.granularity_hours = granularity;
    r.history_days = history_days;
    r.horizon_hours = horizon;
    r.n_weather = n_weather;
    return r;
}

inline lfsel::LFTask make_task(std::vector<double> values, double granularity, int horizon,
                               std::vector<lfsel::WeatherChannel> weather = {}, std::string id = "task") {
    const int n_weather = static_cast<int>(weather.size());
    return lfsel::LFTask(std::move(id), lfsel::LoadSeries(jan1(), granularity, std::move(values)),
                         lfsel::WeatherSeries(std::move(weather)), requirements(granularity, 30, horizon, n_weather));
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
    lfsel::Rng rng(seed);
    std::vector<double> y(n);
    for (auto& v : y) v = lfsel::standard_normal(rng);
    return y;
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, std::size_t burn = 500) {
    lfsel::Rng rng(seed);
    std::vector<double> y;
    double x = 0.0;
    for (std::size_t t = 0; t < n + burn; ++t) {
        x = phi * x + lfsel::standard_normal(rng);
        if (t >= burn) y.push_back(x);
    }
    return y;
}

inline std::vector<double> sine(std::size_t n, double period, double amplitude = 1.0, double offset = 0.0) {
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        y[t] = offset + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
    }
    return y;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

/// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("lfsel_" + tag + "_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testutil
