#include "lfsel/models.hpp"

#include <chrono>
#include <cmath>

#include "lfsel/error.hpp"
#include "lfsel/features.hpp"

namespace lfsel {

namespace {

constexpr std::array<std::string_view, kModelCount> kNames{
    "SARIMA(2,1,1)", "SARIMA(3,1,3)", "SARIMA(4,1,2)", "SARIMA(4,1,4)", "SARIMA(5,1,2)",
    "SARIMA(5,1,5)", "LSTM(125)",     "LSTM(200)",     "SVR",           "SD",
};

constexpr std::array<std::pair<int, int>, 6> kSarimaPQ{{{2, 1}, {3, 3}, {4, 2}, {4, 4}, {5, 2}, {5, 5}}};

std::vector<std::span<const double>> weather_spans(const LFTask& task) {
    std::vector<std::span<const double>> out;
    for (const auto& c : task.weather.channels()) {
        out.emplace_back(c.values);
    }
    return out;
}

std::size_t sarima_min_train(ModelId id, std::size_t season) {
    const auto [p, q] = kSarimaPQ[model_index(id)];
    return 3 * season + static_cast<std::size_t>(p + q) + 20;
}

std::size_t lstm_window(std::size_t period, const LstmConfig& cfg) {
    return std::clamp<std::size_t>(period, 1, std::max<std::size_t>(1, cfg.window_cap));
}

int hidden_units(ModelId id) {
    return id == ModelId::Lstm125 ? 125 : 200;
}

}  // namespace

ZooConfig::ZooConfig() {
    lstm.epochs = 10;
    lstm.learning_rate = 5e-3;
    lstm.max_fit_samples = 1000;
}

std::string_view model_name(ModelId id) noexcept {
    return kNames[model_index(id)];
}

std::optional<ModelId> model_from_number(int number) noexcept {
    if (number < 1 || number > static_cast<int>(kModelCount)) {
        return std::nullopt;
    }
    return static_cast<ModelId>(number);
}

bool is_sarima(ModelId id) noexcept {
    return model_number(id) >= 1 && model_number(id) <= 6;
}

SarimaOrder sarima_order(ModelId id, std::size_t season) {
    if (!is_sarima(id)) {
        fail(ErrorCode::InvalidArgument, std::string(model_name(id)) + " is not a SARIMA candidate");
    }
    const auto [p, q] = kSarimaPQ[model_index(id)];
    return SarimaOrder{p, 1, q, p, 1, q, season};
}

TaskProfile profile_task(const LFTask& task) {
    TaskProfile pr;
    pr.horizon = task.horizon();
    pr.min_train = task.length() >= 2 * pr.horizon ? task.length() - 2 * pr.horizon : 0;
    pr.samples_per_day = task.load.samples_per_day();
    const auto candidates = candidate_periods(task.requirements.granularity_hours);
    std::size_t period = 0;
    try {
        period = periodicity_among(task.load.values(), candidates);
    } catch (const Error&) {
        period = 0;
    }
    if (period < 2) {
        period = pr.samples_per_day > 1 ? pr.samples_per_day : 7;
    }
    pr.period = period;
    return pr;
}

bool feasible(ModelId id, const LFTask& task, const ZooConfig& config) {
    return feasible(id, task, profile_task(task), config);
}

bool feasible(ModelId id, const LFTask& task, const TaskProfile& profile, const ZooConfig& config) {
    const std::size_t n = profile.min_train;
    if (profile.horizon == 0 || task.length() < 2 * profile.horizon) {
        return false;
    }
    if (is_sarima(id)) {
        return n >= sarima_min_train(id, profile.period);
    }
    switch (id) {
        case ModelId::Lstm125:
        case ModelId::Lstm200:
            return n >= 10 * lstm_window(profile.period, config.lstm);
        case ModelId::Svr:
            return n >= svr_lags(profile.period, config.svr.max_lags).back() + 30;
        case ModelId::SimilarDay:
            return complete_days(task.load, n) >= 2;
        default:
            return false;
    }
}

FittedModel fit(ModelId id, const LFTask& task, const SplitPair& split, std::uint64_t seed, const ZooConfig& config) {
    return fit(id, task, profile_task(task), split, seed, config);
}

FittedModel fit(ModelId id, const LFTask& task, const TaskProfile& profile, const SplitPair& split,
                std::uint64_t seed, const ZooConfig& config) {
    if (!feasible(id, task, profile, config)) {
        fail(ErrorCode::Infeasible, std::string(model_name(id)) + " is infeasible for task " + task.id);
    }
    if (split.train.begin != 0 || split.train.end > task.length()) {
        fail(ErrorCode::InvalidArgument, "training range must start at the first sample");
    }
    const auto started = std::chrono::steady_clock::now();
    FittedModel m;
    m.id = id;
    m.profile = profile;
    m.fit_end = split.train.end;
    const auto y = task.load.values().first(split.train.end);
    const auto weather = weather_spans(task);
    if (is_sarima(id)) {
        const auto order = sarima_order(id, profile.period);
        const std::size_t window =
            std::min(y.size(), std::max(config.sarima_fit_window, sarima_min_train(id, profile.period)));
        m.history_window = window;
        m.state = fit_sarima(y.last(window), order, config.sarima);
    } else if (id == ModelId::Lstm125 || id == ModelId::Lstm200) {
        LstmConfig cfg = config.lstm;
        cfg.hidden_units = hidden_units(id);
        std::vector<std::span<const double>> w;
        for (const auto& c : weather) {
            w.push_back(c.first(split.train.end));
        }
        m.state = fit_lstm(y, w, profile.period, cfg, seed);
    } else if (id == ModelId::Svr) {
        m.state = fit_svr(y, weather, profile.period, config.svr);
    } else {
        m.state = fit_similar_day(task.load, task.weather, split.train.end, config.sd);
    }
    m.fit_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return m;
}

ForecastResult predict(const FittedModel& model, const LFTask& task, const SplitPair& split) {
    ForecastResult r;
    r.model_id = model.id;
    r.fit_time = model.fit_time;
    const std::size_t origin = split.test.begin;
    const std::size_t horizon = split.test.size();
    if (origin < model.fit_end || split.test.end > task.length()) {
        fail(ErrorCode::InvalidArgument, "test block overlaps the fitted range or leaves the series");
    }
    const auto y = task.load.values();
    const auto weather = weather_spans(task);
    if (const auto* p = std::get_if<SarimaParams>(&model.state)) {
        const std::size_t from = origin > model.history_window ? origin - model.history_window : 0;
        r.yhat = sarima_forecast(*p, y.subspan(from, origin - from), horizon);
    } else if (const auto* l = std::get_if<LstmState>(&model.state)) {
        r.yhat = lstm_forecast(*l, y, weather, origin, horizon);
    } else if (const auto* s = std::get_if<SvrState>(&model.state)) {
        r.yhat = svr_forecast(*s, y, weather, origin, horizon);
    } else {
        r.yhat = similar_day_forecast(std::get<SdModel>(model.state), task.load, task.weather, origin, horizon);
    }
    r.feasible = r.yhat.size() == horizon &&
                 std::all_of(r.yhat.begin(), r.yhat.end(), [](double v) { return std::isfinite(v); });
    return r;
}

double rmse(std::span<const double> yhat, std::span<const double> y) {
    if (yhat.size() != y.size() || y.empty()) {
        fail(ErrorCode::LengthMismatch, "forecast and truth differ in length");
    }
    double ss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        ss += (yhat[k] - y[k]) * (yhat[k] - y[k]);
    }
    return std::sqrt(ss / static_cast<double>(y.size()));
}

double mape(std::span<const double> yhat, std::span<const double> y) {
    if (yhat.size() != y.size() || y.empty()) {
        fail(ErrorCode::LengthMismatch, "forecast and truth differ in length");
    }
    double mean_abs = 0.0;
    for (const double v : y) mean_abs += std::abs(v);
    mean_abs /= static_cast<double>(y.size());
    const double floor = 1e-6 * mean_abs;
    double sum = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double denom = std::max(std::abs(y[k]), floor);
        sum += denom > 0.0 ? std::abs(yhat[k] - y[k]) / denom : (yhat[k] == y[k] ? 0.0 : 1.0);
    }
    return sum / static_cast<double>(y.size());
}

ModelOutcome score_forecast(const ForecastResult& forecast, const LFTask& task, const SplitPair& split) {
    ModelOutcome o;
    o.fit_time = forecast.fit_time;
    if (!forecast.feasible) {
        o.error = "non-finite forecast";
        return o;
    }
    const auto truth = task.load.values().subspan(split.test.begin, split.test.size());
    o.rmse = rmse(forecast.yhat, truth);
    o.mape = mape(forecast.yhat, truth);
    o.ok = std::isfinite(o.rmse);
    return o;
}

ModelRow run_all(const LFTask& task, const SplitPair& split, std::uint64_t seed, const ZooConfig& config) {
    ModelRow row;
    const auto profile = profile_task(task);
    for (const ModelId id : kAllModels) {
        auto& out = row[model_index(id)];
        if (!feasible(id, task, profile, config)) {
            out.error = "infeasible";
            continue;
        }
        try {
            const auto m = fit(id, task, profile, split, derive_seed(seed, static_cast<std::uint64_t>(model_number(id))),
                               config);
            out = score_forecast(predict(m, task, split), task, split);
        } catch (const Error& e) {
            out = ModelOutcome{};
            out.error = e.what();
        }
    }
    return row;
}

}  // namespace lfsel
