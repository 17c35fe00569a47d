#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "lfsel/error.hpp"
#include "lfsel/labeling.hpp"

using namespace lfsel;

namespace {

// Two days plus a 4 h horizon pair: only the similar-day copy has enough data.
LFTask sd_only_task() {
    return testutil::make_task(testutil::sine(56, 24.0, 2.0, 10.0), 1.0, 4, {}, "sd_only");
}

LFTask noisy_task(std::uint64_t seed, std::string id) {
    auto y = testutil::sine(30 * 24, 24.0, 3.0, 20.0);
    const auto n = testutil::ar1(y.size(), 0.5, seed);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.6 * n[i];
    return testutil::make_task(std::move(y), 1.0, 24, {}, std::move(id));
}

double oracle_pearson(const std::vector<double>& u, const std::vector<double>& v) {
    const double n = static_cast<double>(u.size());
    const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
    const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double suv = 0, suu = 0, svv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suv += (u[i] - mu) * (v[i] - mv);
        suu += (u[i] - mu) * (u[i] - mu);
        svv += (v[i] - mv) * (v[i] - mv);
    }
    return suv / std::sqrt(suu * svv);
}

}  // namespace

TEST_SUITE("labeling") {
    TEST_CASE("pearson examples") {
        CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == doctest::Approx(1.0));
        CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
        CHECK(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) == doctest::Approx(0.8));
        CHECK(pearson(std::vector<double>{2, 2}, std::vector<double>{2, 2}) == 1.0);
        CHECK(pearson(std::vector<double>{2, 2}, std::vector<double>{1, 3}) == 0.0);
        CHECK(pearson(std::vector<double>{2, 2}, std::vector<double>{3, 3}) == 0.0);
        CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
        Rng rng(2);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> u(10), v(10);
            for (std::size_t i = 0; i < 10; ++i) {
                u[i] = uniform01(rng);
                v[i] = u[i] + uniform01(rng);
            }
            CHECK(pearson(u, v) == doctest::Approx(oracle_pearson(u, v)).epsilon(1e-12));
        }
    }

    TEST_CASE("a model that wins every split stops at the first check") {
        const auto task = sd_only_task();
        const auto profile = profile_task(task);
        for (const auto id : kAllModels) CHECK(feasible(id, task, profile) == (id == ModelId::SimilarDay));
        const auto label = label_task(task, 7);
        CHECK(label.phi == ModelId::SimilarDay);
        CHECK(label.distribution.iterations == 11);
        CHECK(label.distribution.pcc == doctest::Approx(1.0));
        CHECK(label.stabilized);
        CHECK(label.distribution.omega[model_index(ModelId::SimilarDay)] == 1.0);
        CHECK(std::isinf(label.rmse[0]));
        CHECK(std::isfinite(label.rmse[model_index(ModelId::SimilarDay)]));
    }

    TEST_CASE("no feasible candidate") {
        const auto task = testutil::make_task(testutil::white_noise(8, 1), 1.0, 4);
        try {
            label_task(task, 1);
            FAIL("expected AllInfeasible");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::AllInfeasible);
        }
    }

    TEST_CASE("label contract on a contested task") {
        const auto task = noisy_task(3, "contested");
        LabelingConfig cfg;
        cfg.max_iterations = 41;
        const auto a = label_task(task, 11, cfg);
        const auto& omega = a.distribution.omega;
        CHECK(std::accumulate(omega.begin(), omega.end(), 0.0) == doctest::Approx(1.0));
        for (const double w : omega) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
        }
        CHECK((a.distribution.iterations - 1) % 10 == 0);
        CHECK(a.distribution.iterations >= 11);
        CHECK(a.distribution.iterations <= 41);
        CHECK(a.stabilized == (a.distribution.pcc >= cfg.threshold));
        // phi is the first maximiser of omega.
        const auto best = static_cast<std::size_t>(std::max_element(omega.begin(), omega.end()) - omega.begin());
        CHECK(a.phi == model_at(best));
        const auto b = label_task(task, 11, cfg);
        CHECK(a.phi == b.phi);
        CHECK(a.distribution.omega == b.distribution.omega);
        CHECK(a.rmse == b.rmse);
    }

    TEST_CASE("split winner ignores failures") {
        ModelRow row;
        CHECK_FALSE(split_winner(row).has_value());
        row[3] = ModelOutcome{true, 2.0, 0.1, 0.0, {}};
        row[5] = ModelOutcome{true, 1.5, 0.1, 0.0, {}};
        row[7] = ModelOutcome{true, 1.5, 0.1, 0.0, {}};
        CHECK(split_winner(row) == 5u);
    }

    TEST_CASE("corpus labelling keeps failures and order") {
        std::vector<LFTask> tasks;
        tasks.push_back(sd_only_task());
        tasks.push_back(testutil::make_task(testutil::white_noise(8, 1), 1.0, 4, {}, "hopeless"));
        tasks.push_back(testutil::make_task(testutil::sine(3 * 24, 24.0, 1.0, 5.0), 1.0, 4, {}, "short"));
        LabelingConfig cfg;
        cfg.max_iterations = 21;
        const auto a = label_corpus(tasks, 99, cfg, 1);
        REQUIRE(a.ids.size() == 3);
        CHECK(a.ids[1] == "hopeless");
        CHECK(a.z.rmse.rows() == 10);
        CHECK(a.z.rmse.cols() == 3);
        CHECK(a.labels[0].has_value());
        CHECK_FALSE(a.labels[1].has_value());
        CHECK_FALSE(a.errors[1].empty());
        for (std::size_t m = 0; m < 10; ++m) CHECK(a.z.failed(m, 1));
        CHECK(a.labels[2].has_value());
        const auto b = label_corpus(tasks, 99, cfg, 2);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(a.labels[j].has_value() == b.labels[j].has_value());
            if (a.labels[j]) CHECK(a.labels[j]->phi == b.labels[j]->phi);
        }
        CHECK(task_seed(99, "short") == task_seed(99, "short"));
        CHECK(task_seed(99, "short") != task_seed(100, "short"));
    }
}
