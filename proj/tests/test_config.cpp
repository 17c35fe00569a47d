#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "helpers.hpp"
#include "lfsel/config.hpp"
#include "lfsel/error.hpp"

using namespace lfsel;

namespace {

std::string config_error(const std::string& text) {
    RunConfig c;
    try {
        apply_config(text, c);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Config);
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("a valid overlay changes only the named settings") {
        RunConfig c;
        apply_config(R"({"labeling": {"step": 5, "threshold": 0.9},
                         "meta": {"knn_k": 7, "n_bins": 8},
                         "zoo": {"lstm_epochs": 3},
                         "corpus": {"levels": ["feeder"], "horizons": [24]},
                         "update_threshold": 0.25})",
                     c);
        CHECK(c.pipeline.labeling.step == 5);
        CHECK(c.pipeline.labeling.threshold == 0.9);
        CHECK(c.pipeline.labeling.max_iterations == 201);
        CHECK(c.pipeline.hyper.knn_k == 7);
        CHECK(c.pipeline.hyper.rf_trees == 100);
        CHECK(c.pipeline.n_bins == 8);
        CHECK(c.corpus.levels == std::vector<AggregationLevel>{AggregationLevel::Feeder});
        CHECK(c.corpus.horizons == std::vector<int>{24});
        CHECK(c.update_threshold == 0.25);
        apply_config("{}", c);
        CHECK(c.pipeline.hyper.knn_k == 7);
    }

    TEST_CASE("errors name the offending key") {
        CHECK(config_error(R"({"labeling": {"stepsize": 5}})").find("labeling.stepsize") != std::string::npos);
        CHECK(config_error(R"({"colour": 1})").find("colour") != std::string::npos);
        CHECK(config_error(R"({"meta": {"knn_k": "five"}})").find("meta.knn_k") != std::string::npos);
        CHECK(config_error(R"({"labeling": {"threshold": 3}})").find("labeling.threshold") != std::string::npos);
        CHECK(config_error(R"({"corpus": {"load_types": ["industrial"]}})").find("corpus.load_types") != std::string::npos);
        CHECK_FALSE(config_error("[1, 2").empty());
        CHECK_FALSE(config_error("[1, 2]").empty());
    }

    TEST_CASE("every advertised key is accepted") {
        const auto keys = config_keys();
        CHECK(std::find(keys.begin(), keys.end(), "labeling.step") != keys.end());
        CHECK(std::find(keys.begin(), keys.end(), "zoo.svr_C") != keys.end());
        CHECK(std::find(keys.begin(), keys.end(), "update_threshold") != keys.end());
    }

    TEST_CASE("file overlay") {
        testutil::TempDir dir("config");
        {
            std::ofstream out(dir.path / "c.json");
            out << R"({"meta": {"rf_trees": 17}})";
        }
        RunConfig c;
        apply_config_file(dir.path / "c.json", c);
        CHECK(c.pipeline.hyper.rf_trees == 17);
        CHECK_THROWS_AS(apply_config_file(dir.path / "missing.json", c), Error);
    }
}
