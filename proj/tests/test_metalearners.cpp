#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "lfsel/error.hpp"
#include "lfsel/metalearners.hpp"
#include "lfsel/random.hpp"

using namespace lfsel;

namespace {

struct Dataset {
    Eigen::MatrixXd x;
    std::vector<ModelId> y;
};

// Gaussian blobs around well separated centres in 16 dimensions.
Dataset blobs(std::size_t per_class, std::vector<ModelId> classes, double spread, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(per_class * classes.size()), 16);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            for (Eigen::Index j = 0; j < 16; ++j) {
                const double centre = (static_cast<std::size_t>(j) % classes.size() == c) ? 4.0 : 0.0;
                d.x(row, j) = centre + spread * standard_normal(rng) + 0.1 * static_cast<double>(j);
            }
            d.y.push_back(classes[c]);
        }
    }
    return d;
}

std::vector<double> copy_row(const Eigen::MatrixXd& x, Eigen::Index i) {
    std::vector<double> r(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) r[static_cast<std::size_t>(j)] = x(i, j);
    return r;
}

double accuracy(const TrainedClassifier& clf, const Dataset& d) {
    std::size_t hit = 0;
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        if (predict(clf, copy_row(d.x, i)) == d.y[static_cast<std::size_t>(i)]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(d.x.rows());
}

const std::vector<ModelId> kThree{ModelId::Sarima211, ModelId::Lstm125, ModelId::SimilarDay};

}  // namespace

TEST_SUITE("metalearners") {
    TEST_CASE("names") {
        CHECK(classifier_name(ClassifierKind::KNN) == "KNN");
        CHECK(classifier_from_name("LD") == ClassifierKind::LD);
        CHECK_THROWS_AS(classifier_from_name("SVM"), Error);
    }

    TEST_CASE("separable classes are learned by every kind") {
        const auto train = blobs(40, kThree, 0.5, 1);
        const auto test = blobs(30, kThree, 0.5, 2);
        for (const auto kind : kAllLearners) {
            CAPTURE(classifier_name(kind));
            const auto clf = train_classifier(kind, train.x, train.y, MetaHyper{}, 5);
            CHECK(accuracy(clf, test) >= 0.95);
            CHECK(clf.training_size() == 120);
        }
    }

    TEST_CASE("scores are a distribution and predict is their argmax") {
        const auto train = blobs(30, {ModelId::Sarima211, ModelId::Sarima412, ModelId::Svr, ModelId::Lstm200}, 2.0, 3);
        Rng rng(4);
        for (const auto kind : kAllLearners) {
            CAPTURE(classifier_name(kind));
            const auto clf = train_classifier(kind, train.x, train.y, MetaHyper{}, 9);
            for (int probe = 0; probe < 250; ++probe) {
                std::vector<double> r(16);
                for (auto& v : r) v = 6.0 * uniform01(rng) - 1.0;
                const auto s = predict_scores(clf, r);
                double total = 0.0;
                for (const double v : s) {
                    CHECK(v >= 0.0);
                    total += v;
                }
                CHECK(total == doctest::Approx(1.0));
                // Classes absent from training never score.
                CHECK(s[model_index(ModelId::SimilarDay)] == 0.0);
                const auto best = *std::max_element(s.begin(), s.end());
                CHECK(s[model_index(predict(clf, r))] == best);
            }
        }
    }

    TEST_CASE("training is deterministic for a fixed seed") {
        const auto train = blobs(25, kThree, 1.5, 7);
        for (const auto kind : kAllLearners) {
            const auto a = train_classifier(kind, train.x, train.y, MetaHyper{}, 11);
            const auto b = train_classifier(kind, train.x, train.y, MetaHyper{}, 11);
            for (Eigen::Index i = 0; i < train.x.rows(); ++i) {
                const auto r = copy_row(train.x, i);
                CHECK(predict_scores(a, r) == predict_scores(b, r));
            }
        }
    }

    TEST_CASE("degenerate training sets") {
        auto d = blobs(20, kThree, 0.5, 1);
        std::vector<ModelId> one(d.y.size(), ModelId::Svr);
        for (const auto kind : kAllLearners) {
            try {
                train_classifier(kind, d.x, one);
                FAIL("expected SingleClass");
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::SingleClass);
            }
            try {
                train_classifier(kind, d.x.topRows(9), std::span<const ModelId>(d.y.data(), 9));
                FAIL("expected TooFewSamples");
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::TooFewSamples);
            }
        }
    }

    TEST_CASE("RF trees agree on a trivially separable problem") {
        const auto train = blobs(20, {ModelId::Sarima211, ModelId::Svr}, 0.1, 8);
        const auto clf = train_classifier(ClassifierKind::RF, train.x, train.y, MetaHyper{}, 2);
        CHECK(clf.trees.size() == 100);
        const auto s = predict_scores(clf, copy_row(train.x, 0));
        CHECK(s[model_index(ModelId::Sarima211)] == doctest::Approx(1.0));
    }

    TEST_CASE("KNN scores are neighbour vote shares") {
        // One informative coordinate; the query sits nearest five points of which
        // three are labelled 3 and two are labelled 9.
        Eigen::MatrixXd x(12, 2);
        std::vector<ModelId> y;
        const double pos[12] = {0.0, 0.1, -0.1, 0.2, -0.2, 5, 6, 7, 8, 9, 10, 11};
        const int cls[12] = {3, 3, 3, 9, 9, 9, 9, 9, 3, 3, 9, 3};
        for (int i = 0; i < 12; ++i) {
            x(i, 0) = pos[i];
            x(i, 1) = (i % 2 == 0) ? 1.0 : -1.0;
            y.push_back(*model_from_number(cls[i]));
        }
        x(0, 1) = 0.0;
        x(1, 1) = 0.0;
        x(2, 1) = 0.0;
        x(3, 1) = 0.0;
        x(4, 1) = 0.0;
        const auto clf = train_classifier(ClassifierKind::KNN, x, y);
        const auto s = predict_scores(clf, std::vector<double>{0.0, 0.0});
        CHECK(s[2] == doctest::Approx(0.6));
        CHECK(s[8] == doctest::Approx(0.4));
        CHECK(predict(clf, std::vector<double>{0.0, 0.0}) == *model_from_number(3));

        MetaHyper one;
        one.knn_k = 1;
        const auto train = blobs(20, kThree, 3.0, 12);
        const auto nn = train_classifier(ClassifierKind::KNN, train.x, train.y, one);
        CHECK(accuracy(nn, train) == 1.0);
    }

    TEST_CASE("NB posterior matches a direct Bayes computation") {
        const auto train = blobs(30, kThree, 1.5, 13);
        const auto clf = train_classifier(ClassifierKind::NB, train.x, train.y);
        // Diagonal Gaussian Bayes with ML variances on the raw features; the
        // per-feature z-scoring inside the classifier cancels out.
        const std::size_t C = kThree.size();
        std::vector<Eigen::VectorXd> mu(C, Eigen::VectorXd::Zero(16)), var(C, Eigen::VectorXd::Zero(16));
        std::vector<double> n(C, 0.0);
        for (Eigen::Index i = 0; i < train.x.rows(); ++i) {
            const auto c = static_cast<std::size_t>(std::find(kThree.begin(), kThree.end(), train.y[static_cast<std::size_t>(i)]) - kThree.begin());
            mu[c] += train.x.row(i).transpose();
            n[c] += 1.0;
        }
        for (std::size_t c = 0; c < C; ++c) mu[c] /= n[c];
        for (Eigen::Index i = 0; i < train.x.rows(); ++i) {
            const auto c = static_cast<std::size_t>(std::find(kThree.begin(), kThree.end(), train.y[static_cast<std::size_t>(i)]) - kThree.begin());
            var[c] += (train.x.row(i).transpose() - mu[c]).cwiseAbs2();
        }
        for (std::size_t c = 0; c < C; ++c) var[c] /= n[c];

        Rng rng(14);
        for (int probe = 0; probe < 100; ++probe) {
            Eigen::VectorXd q(16);
            for (Eigen::Index j = 0; j < 16; ++j) q(j) = 2.0 * standard_normal(rng) + 1.5;
            std::vector<long double> lp(C);
            for (std::size_t c = 0; c < C; ++c) {
                long double v = std::log(static_cast<long double>(n[c]) / train.x.rows());
                for (Eigen::Index j = 0; j < 16; ++j) {
                    const long double d = q(j) - mu[c](j);
                    v -= 0.5L * std::log(2.0L * std::numbers::pi_v<long double> * var[c](j)) + d * d / (2.0L * var[c](j));
                }
                lp[c] = v;
            }
            const long double top = *std::max_element(lp.begin(), lp.end());
            long double z = 0.0L;
            for (auto& v : lp) z += std::exp(v - top);
            const std::vector<double> r(q.data(), q.data() + 16);
            const auto s = predict_scores(clf, r);
            for (std::size_t c = 0; c < C; ++c) {
                const double expected = static_cast<double>(std::exp(lp[c] - top) / z);
                CHECK(s[model_index(kThree[c])] == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
            }
        }
    }

    TEST_CASE("predictions are invariant to positive affine feature maps") {
        const auto train = blobs(30, kThree, 1.8, 15);
        Eigen::MatrixXd mapped = train.x;
        Eigen::VectorXd a(16), b(16);
        Rng rng(16);
        for (Eigen::Index j = 0; j < 16; ++j) {
            a(j) = 0.1 + 10.0 * uniform01(rng);
            b(j) = 100.0 * standard_normal(rng);
        }
        for (Eigen::Index i = 0; i < mapped.rows(); ++i) {
            for (Eigen::Index j = 0; j < 16; ++j) mapped(i, j) = a(j) * train.x(i, j) + b(j);
        }
        const auto probes = blobs(10, kThree, 2.5, 17);
        for (const auto kind : kAllLearners) {
            CAPTURE(classifier_name(kind));
            const auto c1 = train_classifier(kind, train.x, train.y, MetaHyper{}, 3);
            const auto c2 = train_classifier(kind, mapped, train.y, MetaHyper{}, 3);
            for (Eigen::Index i = 0; i < probes.x.rows(); ++i) {
                auto r1 = copy_row(probes.x, i);
                auto r2 = r1;
                for (std::size_t j = 0; j < 16; ++j) r2[j] = a(static_cast<Eigen::Index>(j)) * r1[j] + b(static_cast<Eigen::Index>(j));
                CHECK(predict(c1, r1) == predict(c2, r2));
            }
        }
    }

    TEST_CASE("top choice respects the mask and tie rules") {
        ScoreVector s{};
        s[1] = 0.4;
        s[4] = 0.4;
        s[6] = 0.2;
        std::array<std::size_t, kModelCount> counts{};
        CHECK(top_choice(s, counts) == model_at(1));
        counts[4] = 3;
        counts[1] = 2;
        CHECK(top_choice(s, counts) == model_at(4));
        FeasibilityMask mask;
        mask.fill(true);
        mask[4] = false;
        mask[1] = false;
        CHECK(top_choice(s, counts, &mask) == model_at(6));
    }

    TEST_CASE("constant columns are dropped") {
        Eigen::MatrixXd x(4, 3);
        x << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 8;
        const auto st = Standardizer::fit(x);
        CHECK(st.kept == std::vector<std::size_t>{0, 2});
        const auto z = st.transform(x);
        CHECK(z.cols() == 2);
        CHECK(z.col(0).sum() == doctest::Approx(0.0).scale(1.0));
    }
}
