#include "lfsel/config.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "lfsel/error.hpp"

namespace lfsel {

namespace {

using json = nlohmann::json;
using Setter = std::function<void(const json&, RunConfig&)>;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    fail(ErrorCode::Config, "config key '" + key + "': " + why);
}

template <typename T>
T as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        bad(key, "wrong type (" + std::string(v.type_name()) + ")");
    }
}

double positive(const json& v, const std::string& key) {
    const auto x = as<double>(v, key);
    if (!(x > 0.0)) bad(key, "must be positive");
    return x;
}

std::size_t count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 1) bad(key, "must be a positive integer");
    return v.get<std::size_t>();
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["corpus.levels"] = [](const json& v, RunConfig& c) {
            c.corpus.levels.clear();
            for (const auto& s : as<std::vector<std::string>>(v, "corpus.levels")) c.corpus.levels.push_back(level_from_name(s));
        };
        t["corpus.load_types"] = [](const json& v, RunConfig& c) {
            c.corpus.load_types.clear();
            for (const auto& s : as<std::vector<std::string>>(v, "corpus.load_types")) {
                if (s == "residential") c.corpus.load_types.push_back(LoadType::Residential);
                else if (s == "commercial") c.corpus.load_types.push_back(LoadType::Commercial);
                else bad("corpus.load_types", "unknown load type '" + s + "'");
            }
        };
        t["corpus.weather_counts"] = [](const json& v, RunConfig& c) {
            c.corpus.weather_counts = as<std::vector<int>>(v, "corpus.weather_counts");
        };
        t["corpus.history_days"] = [](const json& v, RunConfig& c) {
            c.corpus.history_days = as<std::vector<int>>(v, "corpus.history_days");
        };
        t["corpus.horizons"] = [](const json& v, RunConfig& c) {
            c.corpus.horizons = as<std::vector<int>>(v, "corpus.horizons");
        };
        t["corpus.granularities"] = [](const json& v, RunConfig& c) {
            c.corpus.granularities = as<std::vector<double>>(v, "corpus.granularities");
        };
        t["corpus.constrained"] = [](const json& v, RunConfig& c) { c.corpus.constrained = as<bool>(v, "corpus.constrained"); };
        t["labeling.step"] = [](const json& v, RunConfig& c) { c.pipeline.labeling.step = count(v, "labeling.step"); };
        t["labeling.max_iterations"] = [](const json& v, RunConfig& c) {
            c.pipeline.labeling.max_iterations = count(v, "labeling.max_iterations");
        };
        t["labeling.threshold"] = [](const json& v, RunConfig& c) {
            const auto x = as<double>(v, "labeling.threshold");
            if (!(x > -1.0 && x <= 1.0)) bad("labeling.threshold", "must lie in (-1, 1]");
            c.pipeline.labeling.threshold = x;
        };
        t["zoo.sarima_fit_window"] = [](const json& v, RunConfig& c) {
            c.pipeline.labeling.zoo.sarima_fit_window = count(v, "zoo.sarima_fit_window");
        };
        t["zoo.sarima_max_evaluations"] = [](const json& v, RunConfig& c) {
            c.pipeline.labeling.zoo.sarima.max_evaluations = static_cast<int>(count(v, "zoo.sarima_max_evaluations"));
        };
        t["zoo.lstm_epochs"] = [](const json& v, RunConfig& c) {
            c.pipeline.labeling.zoo.lstm.epochs = static_cast<int>(count(v, "zoo.lstm_epochs"));
        };
        t["zoo.lstm_learning_rate"] = [](const json& v, RunConfig& c) {
            c.pipeline.labeling.zoo.lstm.learning_rate = positive(v, "zoo.lstm_learning_rate");
        };
        t["zoo.lstm_max_fit_samples"] = [](const json& v, RunConfig& c) {
            c.pipeline.labeling.zoo.lstm.max_fit_samples = as<std::size_t>(v, "zoo.lstm_max_fit_samples");
        };
        t["zoo.svr_C"] = [](const json& v, RunConfig& c) { c.pipeline.labeling.zoo.svr.C = positive(v, "zoo.svr_C"); };
        t["zoo.svr_max_samples"] = [](const json& v, RunConfig& c) {
            c.pipeline.labeling.zoo.svr.max_samples = count(v, "zoo.svr_max_samples");
        };
        const auto beta = [](double SdParams::*field, std::string key) {
            return [field, key](const json& v, RunConfig& c) {
                const auto x = as<double>(v, key);
                if (!(x > 0.0 && x < 1.0)) bad(key, "must lie strictly inside (0, 1)");
                c.pipeline.labeling.zoo.sd.*field = x;
            };
        };
        t["zoo.sd_beta1"] = beta(&SdParams::beta1, "zoo.sd_beta1");
        t["zoo.sd_beta2"] = beta(&SdParams::beta2, "zoo.sd_beta2");
        t["zoo.sd_beta3"] = beta(&SdParams::beta3, "zoo.sd_beta3");
        t["meta.rf_trees"] = [](const json& v, RunConfig& c) {
            c.pipeline.hyper.rf_trees = static_cast<int>(count(v, "meta.rf_trees"));
        };
        t["meta.rf_max_depth"] = [](const json& v, RunConfig& c) {
            c.pipeline.hyper.rf_max_depth = static_cast<int>(count(v, "meta.rf_max_depth"));
        };
        t["meta.knn_k"] = [](const json& v, RunConfig& c) { c.pipeline.hyper.knn_k = static_cast<int>(count(v, "meta.knn_k")); };
        t["meta.nb_variance_floor"] = [](const json& v, RunConfig& c) {
            c.pipeline.hyper.nb_variance_floor = positive(v, "meta.nb_variance_floor");
        };
        t["meta.ld_lambda"] = [](const json& v, RunConfig& c) { c.pipeline.hyper.ld_lambda = positive(v, "meta.ld_lambda"); };
        t["meta.n_bins"] = [](const json& v, RunConfig& c) { c.pipeline.n_bins = count(v, "meta.n_bins"); };
        t["update_threshold"] = [](const json& v, RunConfig& c) { c.update_threshold = as<double>(v, "update_threshold"); };
        return t;
    }();
    return table;
}

void walk(const json& node, const std::string& prefix, RunConfig& config) {
    for (const auto& [name, value] : node.items()) {
        const std::string key = prefix.empty() ? name : prefix + "." + name;
        const auto& table = setters();
        if (const auto it = table.find(key); it != table.end()) {
            try {
                it->second(value, config);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::Config) throw;
                bad(key, e.what());
            }
            continue;
        }
        const bool is_section = std::any_of(table.begin(), table.end(),
                                            [&](const auto& kv) { return kv.first.rfind(key + ".", 0) == 0; });
        if (is_section && value.is_object()) {
            walk(value, key, config);
        } else {
            fail(ErrorCode::Config, "unknown config key '" + key + "'");
        }
    }
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& kv : setters()) keys.push_back(kv.first);
    return keys;
}

void apply_config(const std::string& json_text, RunConfig& config) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
    RunConfig next = config;
    walk(doc, "", next);
    try {
        next.corpus.validate();
        next.pipeline.labeling.zoo.sd.validate();
    } catch (const Error& e) {
        fail(ErrorCode::Config, e.what());
    }
    config = std::move(next);
}

void apply_config_file(const std::filesystem::path& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config(ss.str(), config);
}

}  // namespace lfsel
