#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfsel/series.hpp"

namespace lfsel {

inline constexpr std::size_t kFeatureCount = 16;
/// Leading entries that are copied from the task requirements.
inline constexpr std::size_t kRequirementFeatureCount = 6;

enum class Feature : std::size_t {
    DataLength,
    WeatherCount,
    Granularity,
    Horizon,
    Customers,
    LoadType,
    Mean,
    Max,
    Min,
    StdDev,
    Kurtosis,
    Skewness,
    Fickleness,
    HAcf,
    HPacf,
    Periodicity,
};

std::string_view feature_name(Feature f) noexcept;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double operator[](Feature f) const noexcept { return values[static_cast<std::size_t>(f)]; }
    double& operator[](Feature f) noexcept { return values[static_cast<std::size_t>(f)]; }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Requirement descriptor followed by statistics of the full load history.
FeatureVector extract_features(const LFTask& task);

/// "<id>,f1,...,f16" in feature order.
std::string feature_csv_row(std::string_view task_id, const FeatureVector& f);
std::string feature_csv_header();

// -- load statistics ---------------------------------------------------------

double mean(std::span<const double> y);
/// Population standard deviation (divides by N).
double stddev(std::span<const double> y);

/// Standardized fourth moment: sum((y - mean)^4) / (N sigma^4).
double kurtosis(std::span<const double> y);
/// Standardized third moment: sum((y - mean)^3) / (N sigma^3).
double skewness(std::span<const double> y);
/// (1/N) * #{n >= 2 : sign(y[n-1] - mean) == sign(y[n] - mean)}.
double fickleness(std::span<const double> y);

/// Sample autocorrelation (N denominator), lag in [0, N/2].
double acf(std::span<const double> y, std::size_t lag);
/// Partial autocorrelation via Durbin-Levinson, lag in [1, N/2].
double pacf(std::span<const double> y, std::size_t lag);

/// ACF for lags 0..max_lag.
std::vector<double> acf_sequence(std::span<const double> y, std::size_t max_lag);
/// PACF for lags 1..max_lag from an ACF sequence (index 0 of the result is lag 1).
std::vector<double> pacf_from_acf(std::span<const double> acf_values, std::size_t max_lag);

/// Largest |acf| over lags 1..min(N/2, 2 * expected_period).
double h_acf(std::span<const double> y, std::size_t expected_period);
double h_pacf(std::span<const double> y, std::size_t expected_period);

/// Candidate seasonal periods in samples: 24 h and 168 h for sub-daily data,
/// 7 and 30 days for daily data.
std::vector<std::size_t> candidate_periods(double granularity_hours);

/// Candidate with the largest ACF, or the best ACF peak when none exceeds 0.2.
std::size_t periodicity(std::span<const double> y, double granularity_hours);

/// periodicity() restricted to the given candidates (those needing more than
/// N/3 samples are skipped; an empty set goes straight to the ACF-peak rule).
std::size_t periodicity_among(std::span<const double> y, std::span<const std::size_t> candidates);

}  // namespace lfsel
