#include "lfsel/similar_day.hpp"

#include <cmath>
#include <map>

#include "lfsel/error.hpp"

namespace lfsel {

namespace {

// Sample n <-> (calendar day, position within the day).
struct DayGrid {
    long first_day = 0;
    long first_pos = 0;
    long per_day = 1;

    DayGrid(const LoadSeries& load) : per_day(static_cast<long>(load.samples_per_day())) {
        const auto day0 = std::chrono::floor<std::chrono::days>(load.start());
        first_day = day0.time_since_epoch().count();
        const double offset_h = static_cast<double>((load.start() - day0).count()) / 3600.0;
        first_pos = per_day > 1 ? std::lround(offset_h / load.step_hours()) : 0;
    }
    long day(std::size_t n) const { return first_day + (first_pos + static_cast<long>(n)) / per_day; }
    long pos(std::size_t n) const { return (first_pos + static_cast<long>(n)) % per_day; }
    long index(long d, long p) const { return (d - first_day) * per_day + p - first_pos; }
    bool complete(long d, std::size_t end) const {
        return index(d, 0) >= 0 && index(d, per_day - 1) < static_cast<long>(end);
    }
};

}  // namespace

void SdParams::validate() const {
    for (const double b : {beta1, beta2, beta3}) {
        if (!(b > 0.0 && b < 1.0)) {
            fail(ErrorCode::InvalidArgument, "similar-day decay factors must lie in (0, 1)");
        }
    }
}

double sd_similarity(long delta_days, double exo_distance, const SdParams& params) {
    if (delta_days < 1 || exo_distance < 0.0) {
        fail(ErrorCode::InvalidArgument, "similarity needs a positive day gap and a non-negative distance");
    }
    const double c = delta_days % 365 == 0 ? 1.0 : 0.0;
    const double e = 1.0 - c;
    const double calendar = std::pow(params.beta1, e * static_cast<double>(delta_days % 7)) *
                            std::pow(params.beta2, e * static_cast<double>(delta_days / 7)) *
                            std::pow(params.beta3, e * static_cast<double>(delta_days / 365));
    return calendar / std::max(exo_distance, params.distance_floor);
}

std::size_t complete_days(const LoadSeries& load, std::size_t end) {
    if (end == 0) {
        return 0;
    }
    const DayGrid grid(load);
    std::size_t count = 0;
    for (long d = grid.day(0); d <= grid.day(end - 1); ++d) {
        count += grid.complete(d, end) ? 1 : 0;
    }
    return count;
}

SdModel fit_similar_day(const LoadSeries& load, const WeatherSeries& weather, std::size_t train_end,
                        const SdParams& params) {
    params.validate();
    if (complete_days(load, train_end) < 2) {
        fail(ErrorCode::Infeasible, "similar day needs two complete days of history");
    }
    SdModel m;
    m.params = params;
    for (const auto& ch : weather.channels()) {
        double mean = 0.0;
        for (std::size_t n = 0; n < train_end; ++n) mean += ch.values[n];
        mean /= static_cast<double>(train_end);
        double ss = 0.0;
        for (std::size_t n = 0; n < train_end; ++n) ss += (ch.values[n] - mean) * (ch.values[n] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(train_end));
        m.weather_mean.push_back(mean);
        m.weather_scale.push_back(sd > 0.0 ? sd : 1.0);
    }
    return m;
}

std::vector<double> similar_day_forecast(const SdModel& model, const LoadSeries& load, const WeatherSeries& weather,
                                         std::size_t origin, std::size_t horizon) {
    if (origin == 0 || origin > load.size()) {
        fail(ErrorCode::InvalidArgument, "forecast origin outside the observed series");
    }
    if (weather.channel_count() != model.weather_mean.size()) {
        fail(ErrorCode::GridMismatch, "weather channel count differs from training");
    }
    const DayGrid grid(load);
    const long wlen = static_cast<long>(weather.length());
    const auto z = [&](std::size_t c, long n) {
        return (weather.channel(c).values[static_cast<std::size_t>(n)] - model.weather_mean[c]) / model.weather_scale[c];
    };
    const auto distance = [&](long fore, long hist) {
        if (weather.channel_count() == 0) {
            return 1.0;
        }
        double ss = 0.0;
        for (long p = 0; p < grid.per_day; ++p) {
            const long a = grid.index(fore, p);
            const long b = grid.index(hist, p);
            if (a < 0 || b < 0 || a >= wlen || b >= wlen) {
                continue;
            }
            for (std::size_t c = 0; c < weather.channel_count(); ++c) {
                const double d = z(c, a) - z(c, b);
                ss += d * d;
            }
        }
        return std::sqrt(ss);
    };

    long last_complete = grid.day(origin - 1);
    while (!grid.complete(last_complete, origin)) {
        --last_complete;
    }
    const long first_day = grid.day(0);
    std::map<long, long> chosen;
    std::vector<double> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t n = origin + h;
        const long d = grid.day(n);
        auto it = chosen.find(d);
        if (it == chosen.end()) {
            long best = -1;
            double best_gamma = -1.0;
            for (long cand = last_complete; cand >= first_day && grid.complete(cand, origin); --cand) {
                const double g = sd_similarity(d - cand, distance(d, cand), model.params);
                if (g > best_gamma) {
                    best_gamma = g;
                    best = cand;
                }
            }
            if (best < 0) {
                fail(ErrorCode::Infeasible, "no complete historical day before the forecast origin");
            }
            it = chosen.emplace(d, best).first;
        }
        out[h] = load[static_cast<std::size_t>(grid.index(it->second, grid.pos(n)))];
    }
    return out;
}

}  // namespace lfsel
