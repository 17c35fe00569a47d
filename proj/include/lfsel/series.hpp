#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lfsel/random.hpp"

namespace lfsel {

using TimePoint = std::chrono::sys_seconds;

/// Uniformly sampled load history in kW.
///
/// Sample n sits at start + n * step. The step is stored in hours because
/// every granularity the framework deals with (15 min .. 1 day) is a clean
/// fraction or multiple of an hour.
class LoadSeries {
public:
    LoadSeries(TimePoint start, double step_hours, std::vector<double> values);

    TimePoint start() const noexcept { return start_; }
    double step_hours() const noexcept { return step_hours_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t n) const { return values_[n]; }
    TimePoint time_at(std::size_t n) const;

    /// Samples per day; 1 for daily data.
    std::size_t samples_per_day() const;

private:
    TimePoint start_;
    double step_hours_;
    std::vector<double> values_;
};

struct WeatherChannel {
    std::string name;
    std::vector<double> values;
};

/// Exogenous channels aligned sample-for-sample with a LoadSeries.
class WeatherSeries {
public:
    WeatherSeries() = default;
    explicit WeatherSeries(std::vector<WeatherChannel> channels);

    std::size_t channel_count() const noexcept { return channels_.size(); }
    const WeatherChannel& channel(std::size_t c) const { return channels_[c]; }
    const std::vector<WeatherChannel>& channels() const noexcept { return channels_; }
    /// Length shared by every channel (0 when there are no channels).
    std::size_t length() const noexcept;

private:
    std::vector<WeatherChannel> channels_;
};

enum class LoadType : int { Residential = 0, Commercial = 1 };

struct TaskRequirements {
    double granularity_hours = 1.0;
    int history_days = 30;
    int horizon_hours = 24;
    int n_weather = 0;
    int n_customers = 1;
    LoadType load_type = LoadType::Residential;

    /// Throws InvalidArgument unless every field lies on the task grid.
    void validate() const;
    /// K: the horizon expressed in samples.
    std::size_t horizon_samples() const;
};

/// One forecasting problem: load history, aligned weather and requirements.
struct LFTask {
    LFTask(std::string id, LoadSeries load, WeatherSeries weather, TaskRequirements requirements);

    std::string id;
    LoadSeries load;
    WeatherSeries weather;
    TaskRequirements requirements;

    std::size_t length() const noexcept { return load.size(); }
    std::size_t horizon() const { return requirements.horizon_samples(); }
};

/// Half-open index interval [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct SplitPair {
    IndexRange train;
    IndexRange test;

    std::size_t horizon() const noexcept { return test.size(); }
    friend bool operator==(const SplitPair&, const SplitPair&) = default;
};

/// Mean-aggregates onto a coarser grid; trailing partial windows are dropped.
LoadSeries resample(const LoadSeries& series, double target_step_hours);

/// Pointwise sum of series that share a grid.
LoadSeries aggregate(std::span<const LoadSeries> series);

/// Split whose test block starts at `test_begin`; training is everything before it.
SplitPair split_at(const LFTask& task, std::size_t test_begin);

/// The earliest admissible split. Its training range is the prefix shared by
/// every split random_split can return.
SplitPair earliest_split(const LFTask& task);

/// Contiguous K-sample test window placed uniformly at random among the
/// positions that leave at least N - 2K training samples in front of it.
SplitPair random_split(const LFTask& task, std::uint64_t seed);

/// Same as random_split but draws from a caller-owned engine.
SplitPair random_split(const LFTask& task, Rng& rng);

}  // namespace lfsel
