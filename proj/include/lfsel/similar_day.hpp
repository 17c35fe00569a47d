#pragma once

#include <cstddef>
#include <vector>

#include "lfsel/series.hpp"

namespace lfsel {

struct SdParams {
    double beta1 = 0.9;   // per day within the week
    double beta2 = 0.85;  // per whole week
    double beta3 = 0.95;  // per whole year
    double distance_floor = 1e-6;

    /// Throws InvalidArgument unless every beta lies strictly inside (0, 1).
    void validate() const;
};

/// Calendar decay over the exogenous distance. Whole-year gaps (C = 1)
/// bypass the calendar factor entirely.
double sd_similarity(long delta_days, double exo_distance, const SdParams& params);

/// Weather normalisation captured from the training range.
struct SdModel {
    SdParams params;
    std::vector<double> weather_mean;
    std::vector<double> weather_scale;
};

/// Number of calendar days whose samples all lie in [0, end).
std::size_t complete_days(const LoadSeries& load, std::size_t end);

SdModel fit_similar_day(const LoadSeries& load, const WeatherSeries& weather, std::size_t train_end,
                        const SdParams& params);

/// Each forecast day copies the complete historical day (entirely before
/// `origin`) with the largest similarity; ties go to the more recent day.
std::vector<double> similar_day_forecast(const SdModel& model, const LoadSeries& load, const WeatherSeries& weather,
                                         std::size_t origin, std::size_t horizon);

}  // namespace lfsel
