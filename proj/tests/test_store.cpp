#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "lfsel/error.hpp"
#include "lfsel/pipeline.hpp"
#include "lfsel/store.hpp"

using namespace lfsel;

namespace {

// Sixty cheap tasks whose label follows their noise level, with a made-up Z.
struct Fixture {
    std::vector<LFTask> tasks;
    CorpusLabels labels;
};

Fixture fixture() {
    Fixture f;
    const std::size_t J = 60;
    f.labels.z.rmse.resize(10, J);
    f.labels.z.mape.resize(10, J);
    Rng rng(1);
    for (std::size_t j = 0; j < J; ++j) {
        const double noise = 0.1 + 2.0 * static_cast<double>(j % 3);
        auto y = testutil::sine(30 * 24, j % 2 == 0 ? 24.0 : 12.0, 3.0, 20.0);
        const auto n = testutil::ar1(y.size(), 0.3, 100 + j);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += noise * n[i];
        const std::string id = "s" + std::to_string(j);
        f.tasks.push_back(testutil::make_task(std::move(y), 1.0, 24, {}, id));
        TaskLabel label;
        label.phi = j % 3 == 0 ? ModelId::Sarima211 : (j % 3 == 1 ? ModelId::Svr : ModelId::SimilarDay);
        label.distribution.omega[model_index(label.phi)] = 1.0;
        label.distribution.iterations = 11;
        label.distribution.pcc = 1.0;
        label.stabilized = true;
        for (std::size_t m = 0; m < 10; ++m) {
            const double e = model_at(m) == label.phi ? 1.0 : 1.5 + uniform01(rng);
            label.rmse[m] = e;
            label.mape[m] = e / 20.0;
            f.labels.z.rmse(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = e;
            f.labels.z.mape(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = e / 20.0;
        }
        if (j == 7) {
            label.rmse[4] = std::numeric_limits<double>::infinity();
            f.labels.z.rmse(4, 7) = label.rmse[4];
        }
        f.labels.ids.push_back(id);
        f.labels.labels.push_back(label);
        f.labels.errors.emplace_back();
    }
    return f;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("store") {
    TEST_CASE("store survives a save and load unchanged") {
        const auto f = fixture();
        const auto store = train_store(f.tasks, f.labels, 5);
        CHECK(store.ids.size() == 60);
        CHECK(store.features.rows() == 60);
        CHECK(store.features.cols() == 16);
        CHECK(store.split.test.size() == 6);
        CHECK(store.n_bins == 2);
        testutil::TempDir dir("store");
        save_store(dir.path / "a.json", store);
        const auto back = load_store(dir.path / "a.json");
        save_store(dir.path / "b.json", back);
        CHECK(slurp(dir.path / "a.json") == slurp(dir.path / "b.json"));
        CHECK(store_digest(store) == store_digest(back));
        CHECK(store_digest(store).size() == 16);
        CHECK(back.labels == store.labels);
        CHECK(std::isinf(back.z.rmse(4, 7)));

        Rng rng(9);
        for (int probe = 0; probe < 100; ++probe) {
            std::vector<double> row(16);
            const auto j = static_cast<Eigen::Index>(uniform01(rng) * 60.0);
            for (std::size_t c = 0; c < 16; ++c) row[c] = store.features(j, static_cast<Eigen::Index>(c)) * (0.8 + 0.4 * uniform01(rng));
            for (std::size_t i = 0; i < kLearnerCount; ++i) {
                CHECK(predict_scores(store.classifiers[i], row) == predict_scores(back.classifiers[i], row));
                const double s = uniform01(rng);
                CHECK(store.curves[i].eval(s) == back.curves[i].eval(s));
            }
        }
        const auto task = f.tasks[3];
        const auto r1 = recommend(store, task, 3);
        const auto r2 = recommend(back, task, 3);
        CHECK(r1.models == r2.models);
        CHECK(r1.accuracy == r2.accuracy);
    }

    TEST_CASE("training the same inputs twice gives the same bytes") {
        const auto f = fixture();
        CHECK(store_to_json(train_store(f.tasks, f.labels, 5)) == store_to_json(train_store(f.tasks, f.labels, 5)));
        CHECK(store_to_json(train_store(f.tasks, f.labels, 5)) != store_to_json(train_store(f.tasks, f.labels, 6)));
    }

    TEST_CASE("version and structure are checked on load") {
        const auto f = fixture();
        auto text = store_to_json(train_store(f.tasks, f.labels, 5));
        const auto pos = text.find("\"version\": 1");
        REQUIRE(pos != std::string::npos);
        auto bumped = text;
        bumped.replace(pos, 12, "\"version\": 2");
        try {
            store_from_json(bumped);
            FAIL("expected StoreVersion");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::StoreVersion);
        }
        try {
            store_from_json("{\"format\": \"something else\", \"version\": 1}");
            FAIL("expected StoreVersion");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::StoreVersion);
        }
        try {
            store_from_json(text.substr(0, text.size() / 2));
            FAIL("expected MalformedRow");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MalformedRow);
        }
        CHECK_THROWS_AS(load_store("/nonexistent/store.json"), Error);
    }

    TEST_CASE("labels round-trip") {
        auto f = fixture();
        f.labels.labels[10].reset();
        f.labels.errors[10] = "every candidate failed";
        const auto text = labels_to_json(f.labels, 3);
        const auto back = labels_from_json(text);
        CHECK(labels_to_json(back, 3) == text);
        CHECK(back.ids == f.labels.ids);
        CHECK_FALSE(back.labels[10].has_value());
        CHECK(back.errors[10] == "every candidate failed");
        CHECK(back.labels[4]->phi == f.labels.labels[4]->phi);
        CHECK(back.labels[4]->distribution.omega == f.labels.labels[4]->distribution.omega);
        CHECK(std::isinf(back.labels[7]->rmse[4]));
        // Z is rebuilt from the labels, so the unlabelled task reads as all failures.
        for (Eigen::Index j = 0; j < 60; ++j) {
            for (Eigen::Index m = 0; m < 10; ++m) {
                if (j == 10) CHECK(std::isinf(back.z.rmse(m, j)));
                else CHECK(back.z.rmse(m, j) == f.labels.z.rmse(m, j));
            }
        }
        // Unlabelled tasks stay out of the store.
        const auto store = train_store(f.tasks, f.labels, 5);
        CHECK(store.ids.size() == 59);
    }
}
