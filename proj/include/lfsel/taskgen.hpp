#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lfsel/series.hpp"

namespace lfsel {

enum class AggregationLevel : int { Building = 0, Transformer = 1, Microgrid = 2, Feeder = 3 };

std::string_view level_name(AggregationLevel level) noexcept;
AggregationLevel level_from_name(std::string_view name);

/// Customer-count range for a level and load type (inclusive).
std::pair<int, int> customer_range(AggregationLevel level, LoadType type);

/// Parameters of one synthetic building.
struct SynthProfileParams {
    double base_kw = 1.0;
    double daily_amplitude = 1.0;
    double phase_shift_hours = 0.0;
    double weekend_factor = 1.0;
    double temp_sensitivity = 0.0;  // kW per degree away from 18 C
    double noise_std = 0.0;         // as a fraction of base_kw
    double noise_ar = 0.8;          // AR(1) coefficient per hour
    double spike_rate = 0.0;        // appliance events per hour
    double spike_kw = 0.0;
    std::uint64_t seed = 0;
};

/// Randomised building parameters for a load type.
SynthProfileParams draw_profile(LoadType type, Rng& rng);

/// Canonical daily shape in [0, 1] at hour-of-day `hour` (residential:
/// morning bump and evening peak; commercial: business-hours plateau).
double daily_shape(LoadType type, double hour);

/// Temperature (channel 0) plus, in 12-channel mode, eleven derived channels.
/// Sampled on a sub-daily grid starting at `start`.
WeatherSeries synth_weather(int days, double granularity_hours, std::size_t channels, std::uint64_t seed,
                            TimePoint start = TimePoint{});

/// One building on the weather grid; the temperature channel drives the
/// weather term (no channels means a flat 18 C).
LoadSeries synth_building(LoadType type, const SynthProfileParams& params, const WeatherSeries& weather,
                          TimePoint start, double granularity_hours, std::size_t samples);

struct CorpusSpec {
    std::vector<AggregationLevel> levels{AggregationLevel::Building, AggregationLevel::Transformer,
                                         AggregationLevel::Microgrid, AggregationLevel::Feeder};
    std::vector<LoadType> load_types{LoadType::Residential, LoadType::Commercial};
    std::vector<int> weather_counts{0, 1, 12};
    std::vector<int> history_days{30, 180, 360};
    std::vector<int> horizons{4, 24, 168, 720};
    std::vector<double> granularities{0.25, 0.5, 1.0, 24.0};
    /// Apply the grid constraints (see corpus_constraints()); off = plain product.
    bool constrained = true;
    std::uint64_t seed = 20240611;

    void validate() const;
};

/// Human-readable constraint rules, written to the corpus index header.
std::vector<std::string> corpus_constraints();

struct TaskCombination {
    std::string id;
    AggregationLevel level = AggregationLevel::Building;
    LoadType load_type = LoadType::Residential;
    int n_weather = 0;
    int history_days = 30;
    int horizon_hours = 24;
    double granularity_hours = 1.0;
    std::uint64_t seed = 0;
};

bool admissible(AggregationLevel level, int n_weather, int history_days, int horizon_hours, double granularity_hours);

/// Grid enumeration in a fixed nesting order; ids are t0000, t0001, ...
std::vector<TaskCombination> enumerate_corpus(const CorpusSpec& spec);

LFTask generate_task(const TaskCombination& combo);

/// Throws EmptySpec when the grid admits no task.
std::vector<LFTask> generate_corpus(const CorpusSpec& spec);

// -- on-disk corpus ----------------------------------------------------------

void write_requirements(const std::filesystem::path& path, const TaskRequirements& req);
TaskRequirements read_requirements(const std::filesystem::path& path);

/// <dir>/index.csv, <dir>/<id>.req and <dir>/<id>.csv.
void write_corpus(const std::filesystem::path& dir, const std::vector<TaskCombination>& combos,
                  const std::vector<LFTask>& tasks);

/// Task ids in index order.
std::vector<std::string> read_corpus_index(const std::filesystem::path& dir);
LFTask read_task(const std::filesystem::path& dir, const std::string& id);
std::vector<LFTask> read_corpus(const std::filesystem::path& dir);

}  // namespace lfsel
