#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lfsel/lstm.hpp"
#include "lfsel/sarima.hpp"
#include "lfsel/series.hpp"
#include "lfsel/similar_day.hpp"
#include "lfsel/svr.hpp"

namespace lfsel {

/// Candidate forecasters, numbered 1..10.
enum class ModelId : int {
    Sarima211 = 1,
    Sarima313,
    Sarima412,
    Sarima414,
    Sarima512,
    Sarima515,
    Lstm125,
    Lstm200,
    Svr,
    SimilarDay,
};

inline constexpr std::size_t kModelCount = 10;

inline constexpr std::array<ModelId, kModelCount> kAllModels{
    ModelId::Sarima211, ModelId::Sarima313, ModelId::Sarima412, ModelId::Sarima414, ModelId::Sarima512,
    ModelId::Sarima515, ModelId::Lstm125,   ModelId::Lstm200,   ModelId::Svr,       ModelId::SimilarDay,
};

constexpr std::size_t model_index(ModelId id) noexcept { return static_cast<std::size_t>(id) - 1; }
constexpr ModelId model_at(std::size_t index) noexcept { return static_cast<ModelId>(index + 1); }
constexpr int model_number(ModelId id) noexcept { return static_cast<int>(id); }

std::string_view model_name(ModelId id) noexcept;
std::optional<ModelId> model_from_number(int number) noexcept;

bool is_sarima(ModelId id) noexcept;
/// (p,1,q)(p,1,q)_s for the six SARIMA candidates.
SarimaOrder sarima_order(ModelId id, std::size_t season);

struct ZooConfig {
    SarimaFitOptions sarima{};
    /// SARIMA parameters are estimated on at most this many recent samples
    /// (raised when the feasibility rule needs more).
    std::size_t sarima_fit_window = 2000;
    LstmConfig lstm{};
    SvrConfig svr{};
    SdParams sd{};

    ZooConfig();
};

/// Task quantities every model's rules depend on.
struct TaskProfile {
    std::size_t period = 1;       // detected periodicity (samples), falls back to a day/week
    std::size_t horizon = 0;      // K
    std::size_t min_train = 0;    // N - 2K, the shortest training range a split can leave
    std::size_t samples_per_day = 1;
};

TaskProfile profile_task(const LFTask& task);

bool feasible(ModelId id, const LFTask& task, const ZooConfig& config = {});
bool feasible(ModelId id, const LFTask& task, const TaskProfile& profile, const ZooConfig& config = {});

/// Immutable fitted state of one candidate.
struct FittedModel {
    ModelId id = ModelId::Sarima211;
    std::variant<SarimaParams, LstmState, SvrState, SdModel> state;
    TaskProfile profile;
    /// End of the range the parameters were estimated on.
    std::size_t fit_end = 0;
    /// Length of the history tail used to condition SARIMA forecasts.
    std::size_t history_window = 0;
    double fit_time = 0.0;
};

struct ForecastResult {
    ModelId model_id = ModelId::Sarima211;
    std::vector<double> yhat;
    double fit_time = 0.0;
    bool feasible = false;
};

/// Estimates parameters on split.train. Throws Infeasible or NonConvergence.
FittedModel fit(ModelId id, const LFTask& task, const SplitPair& split, std::uint64_t seed,
                const ZooConfig& config = {});
FittedModel fit(ModelId id, const LFTask& task, const TaskProfile& profile, const SplitPair& split,
                std::uint64_t seed, const ZooConfig& config = {});

/// Forecasts split.test from the observed history before it. The split's
/// training range must contain the range the model was fitted on.
ForecastResult predict(const FittedModel& model, const LFTask& task, const SplitPair& split);

double rmse(std::span<const double> yhat, std::span<const double> y);
/// Mean of |yhat - y| / max(|y|, 1e-6 * mean|y|).
double mape(std::span<const double> yhat, std::span<const double> y);

struct ModelOutcome {
    bool ok = false;
    double rmse = std::numeric_limits<double>::infinity();
    double mape = std::numeric_limits<double>::infinity();
    double fit_time = 0.0;
    std::string error;
};

using ModelRow = std::array<ModelOutcome, kModelCount>;

/// Scores outcome against the test block; failures keep infinite errors.
ModelOutcome score_forecast(const ForecastResult& forecast, const LFTask& task, const SplitPair& split);

/// Fits and tests every candidate on one split.
ModelRow run_all(const LFTask& task, const SplitPair& split, std::uint64_t seed, const ZooConfig& config = {});

}  // namespace lfsel
