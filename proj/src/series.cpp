#include "lfsel/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "lfsel/error.hpp"

namespace lfsel {

namespace {

constexpr std::array<double, 4> kGranularities{0.25, 0.5, 1.0, 24.0};
constexpr std::array<int, 3> kHistoryDays{30, 180, 360};
constexpr std::array<int, 4> kHorizons{4, 24, 168, 720};
constexpr std::array<int, 3> kWeatherCounts{0, 1, 12};

// Integer ratio a / b when it is one to within rounding noise, else -1.
long integral_ratio(double a, double b) {
    const double r = a / b;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * std::max(1.0, r)) {
        return -1;
    }
    return static_cast<long>(rounded);
}

}  // namespace

LoadSeries::LoadSeries(TimePoint start, double step_hours, std::vector<double> values)
    : start_(start), step_hours_(step_hours), values_(std::move(values)) {
    if (!(step_hours_ > 0.0) || !std::isfinite(step_hours_)) {
        fail(ErrorCode::InvalidArgument, "series step must be positive");
    }
    if (values_.empty()) {
        fail(ErrorCode::InvalidArgument, "series must not be empty");
    }
    for (std::size_t n = 0; n < values_.size(); ++n) {
        if (!std::isfinite(values_[n])) {
            fail(ErrorCode::InvalidArgument, "non-finite load value at index " + std::to_string(n));
        }
    }
}

TimePoint LoadSeries::time_at(std::size_t n) const {
    const auto offset = std::llround(static_cast<double>(n) * step_hours_ * 3600.0);
    return start_ + std::chrono::seconds(offset);
}

std::size_t LoadSeries::samples_per_day() const {
    if (step_hours_ >= 24.0) {
        return 1;
    }
    const long spd = integral_ratio(24.0, step_hours_);
    if (spd < 0) {
        fail(ErrorCode::InvalidArgument, "step does not divide a day");
    }
    return static_cast<std::size_t>(spd);
}

WeatherSeries::WeatherSeries(std::vector<WeatherChannel> channels) : channels_(std::move(channels)) {
    for (const auto& c : channels_) {
        if (c.values.size() != channels_.front().values.size()) {
            fail(ErrorCode::GridMismatch, "weather channels differ in length");
        }
        for (const double v : c.values) {
            if (!std::isfinite(v)) {
                fail(ErrorCode::InvalidArgument, "non-finite value in weather channel " + c.name);
            }
        }
    }
}

std::size_t WeatherSeries::length() const noexcept {
    return channels_.empty() ? 0 : channels_.front().values.size();
}

void TaskRequirements::validate() const {
    const auto on_grid = [](const auto& grid, auto v) {
        return std::find(grid.begin(), grid.end(), v) != grid.end();
    };
    std::ostringstream why;
    if (!on_grid(kGranularities, granularity_hours)) {
        why << "granularity " << granularity_hours << " h not in {0.25, 0.5, 1, 24}";
    } else if (!on_grid(kHistoryDays, history_days)) {
        why << "history " << history_days << " days not in {30, 180, 360}";
    } else if (!on_grid(kHorizons, horizon_hours)) {
        why << "horizon " << horizon_hours << " h not in {4, 24, 168, 720}";
    } else if (!on_grid(kWeatherCounts, n_weather)) {
        why << "weather count " << n_weather << " not in {0, 1, 12}";
    } else if (n_customers < 1) {
        why << "customer count must be positive";
    } else if (load_type != LoadType::Residential && load_type != LoadType::Commercial) {
        why << "unknown load type";
    } else if (integral_ratio(horizon_hours, granularity_hours) < 0) {
        why << "horizon " << horizon_hours << " h is not a whole number of " << granularity_hours
            << " h samples";
    }
    const std::string message = why.str();
    if (!message.empty()) {
        fail(ErrorCode::InvalidArgument, message);
    }
}

std::size_t TaskRequirements::horizon_samples() const {
    const long k = integral_ratio(horizon_hours, granularity_hours);
    if (k < 1) {
        fail(ErrorCode::InvalidArgument, "horizon is not a whole number of samples");
    }
    return static_cast<std::size_t>(k);
}

LFTask::LFTask(std::string id_, LoadSeries load_, WeatherSeries weather_, TaskRequirements req)
    : id(std::move(id_)), load(std::move(load_)), weather(std::move(weather_)), requirements(req) {
    requirements.validate();
    if (std::abs(load.step_hours() - requirements.granularity_hours) > 1e-9) {
        fail(ErrorCode::GridMismatch, "task " + id + ": load step differs from required granularity");
    }
    if (static_cast<int>(weather.channel_count()) != requirements.n_weather) {
        fail(ErrorCode::InvalidArgument, "task " + id + ": weather channel count " +
                                             std::to_string(weather.channel_count()) +
                                             " differs from requirement " +
                                             std::to_string(requirements.n_weather));
    }
    if (weather.channel_count() > 0 && weather.length() != load.size()) {
        fail(ErrorCode::GridMismatch, "task " + id + ": weather and load lengths differ");
    }
    if (load.size() < requirements.horizon_samples()) {
        fail(ErrorCode::TooShort, "task " + id + ": history shorter than the horizon");
    }
}

LoadSeries resample(const LoadSeries& series, double target_step_hours) {
    if (target_step_hours < series.step_hours() - 1e-12) {
        fail(ErrorCode::Upsample, "target step is finer than the source step");
    }
    const long ratio = integral_ratio(target_step_hours, series.step_hours());
    if (ratio < 0) {
        fail(ErrorCode::NonIntegralRatio, "target step is not an integer multiple of the source step");
    }
    const auto width = static_cast<std::size_t>(ratio);
    const std::size_t out_len = series.size() / width;
    if (out_len == 0) {
        fail(ErrorCode::TooShort, "series shorter than one output window");
    }
    std::vector<double> out(out_len);
    const auto v = series.values();
    for (std::size_t i = 0; i < out_len; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
            sum += v[i * width + k];
        }
        out[i] = sum / static_cast<double>(width);
    }
    return LoadSeries(series.start(), target_step_hours, std::move(out));
}

LoadSeries aggregate(std::span<const LoadSeries> series) {
    if (series.empty()) {
        fail(ErrorCode::InvalidArgument, "nothing to aggregate");
    }
    const auto& first = series.front();
    std::vector<double> sum(first.values().begin(), first.values().end());
    for (const auto& s : series.subspan(1)) {
        if (s.size() != first.size() || s.start() != first.start() ||
            std::abs(s.step_hours() - first.step_hours()) > 1e-12) {
            fail(ErrorCode::GridMismatch, "series do not share a grid");
        }
        const auto v = s.values();
        for (std::size_t n = 0; n < sum.size(); ++n) {
            sum[n] += v[n];
        }
    }
    return LoadSeries(first.start(), first.step_hours(), std::move(sum));
}

SplitPair split_at(const LFTask& task, std::size_t test_begin) {
    const std::size_t n = task.length();
    const std::size_t k = task.horizon();
    if (n < 2 * k) {
        fail(ErrorCode::TooShort, "task " + task.id + ": need N >= 2K for a split");
    }
    if (test_begin < n - 2 * k || test_begin > n - k) {
        fail(ErrorCode::InvalidArgument, "test window start outside the admissible range");
    }
    return SplitPair{IndexRange{0, test_begin}, IndexRange{test_begin, test_begin + k}};
}

SplitPair earliest_split(const LFTask& task) {
    const std::size_t n = task.length();
    const std::size_t k = task.horizon();
    if (n < 2 * k) {
        fail(ErrorCode::TooShort, "task " + task.id + ": need N >= 2K for a split");
    }
    return split_at(task, n - 2 * k);
}

SplitPair random_split(const LFTask& task, Rng& rng) {
    const std::size_t n = task.length();
    const std::size_t k = task.horizon();
    if (n < 2 * k) {
        fail(ErrorCode::TooShort, "task " + task.id + ": need N >= 2K for a split");
    }
    // K + 1 admissible starts: N-2K .. N-K inclusive.
    std::uniform_int_distribution<std::size_t> pick(0, k);
    return split_at(task, n - 2 * k + pick(rng));
}

SplitPair random_split(const LFTask& task, std::uint64_t seed) {
    Rng rng(seed);
    return random_split(task, rng);
}

}  // namespace lfsel
