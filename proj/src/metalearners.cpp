#include "lfsel/metalearners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "lfsel/error.hpp"
#include "lfsel/random.hpp"

namespace lfsel {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::array<std::string_view, kLearnerCount> kLearnerNames{"RF", "KNN", "NB", "LD"};

int majority(const std::array<std::size_t, kModelCount>& counts,
             const std::array<std::size_t, kModelCount>& training_counts) {
    int best = -1;
    for (std::size_t c = 0; c < kModelCount; ++c) {
        if (counts[c] == 0) continue;
        if (best < 0 || counts[c] > counts[best] ||
            (counts[c] == counts[best] && training_counts[c] > training_counts[best])) {
            best = static_cast<int>(c);
        }
    }
    return best;
}

double gini(const std::array<std::size_t, kModelCount>& counts, std::size_t n) {
    if (n == 0) return 0.0;
    double s = 0.0;
    for (const auto c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        s += p * p;
    }
    return 1.0 - s;
}

class TreeBuilder {
public:
    TreeBuilder(const MatrixXd& z, const std::vector<int>& y, const std::array<std::size_t, kModelCount>& training,
                int max_depth, Rng& rng)
        : z_(z), y_(y), training_(training), max_depth_(max_depth), rng_(rng) {
        features_.resize(static_cast<std::size_t>(z.cols()));
        std::iota(features_.begin(), features_.end(), 0);
        try_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(z.cols())))));
    }

    int build(std::vector<std::size_t>& idx, int depth, DecisionTree& tree) {
        std::array<std::size_t, kModelCount> counts{};
        for (const auto i : idx) ++counts[static_cast<std::size_t>(y_[i])];
        const int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int label = majority(counts, training_);
        const auto distinct = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
        if (depth >= max_depth_ || distinct <= 1 || idx.size() < 2) {
            tree.nodes[node].leaf_class = label;
            return node;
        }
        const double parent = gini(counts, idx.size());
        double best_score = parent - 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        // Partial Fisher-Yates draw of the candidate features.
        for (std::size_t k = 0; k < try_; ++k) {
            const std::size_t pick = k + static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(features_.size() - k));
            std::swap(features_[k], features_[std::min(pick, features_.size() - 1)]);
        }
        std::vector<std::size_t> order(idx);
        for (std::size_t k = 0; k < try_; ++k) {
            const auto f = static_cast<Index>(features_[k]);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return z_(static_cast<Index>(a), f) < z_(static_cast<Index>(b), f); });
            std::array<std::size_t, kModelCount> left{};
            std::array<std::size_t, kModelCount> right = counts;
            const std::size_t n = order.size();
            for (std::size_t s = 0; s + 1 < n; ++s) {
                const auto c = static_cast<std::size_t>(y_[order[s]]);
                ++left[c];
                --right[c];
                const double v = z_(static_cast<Index>(order[s]), f);
                const double next = z_(static_cast<Index>(order[s + 1]), f);
                if (!(next > v)) continue;
                const std::size_t nl = s + 1, nr = n - nl;
                const double score = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                                     static_cast<double>(n);
                if (score < best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (v + next);
                }
            }
        }
        if (best_feature < 0) {
            tree.nodes[node].leaf_class = label;
            return node;
        }
        std::vector<std::size_t> lidx, ridx;
        for (const auto i : idx) {
            (z_(static_cast<Index>(i), best_feature) <= best_threshold ? lidx : ridx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = build(lidx, depth + 1, tree);
        const int r = build(ridx, depth + 1, tree);
        auto& nd = tree.nodes[node];
        nd.feature = best_feature;
        nd.threshold = best_threshold;
        nd.left = l;
        nd.right = r;
        nd.leaf_class = label;
        return node;
    }

private:
    const MatrixXd& z_;
    const std::vector<int>& y_;
    const std::array<std::size_t, kModelCount>& training_;
    int max_depth_;
    Rng& rng_;
    std::vector<std::size_t> features_;
    std::size_t try_ = 1;
};

void normalise(ScoreVector& s) {
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : s) v /= total;
    }
}

// Softmax over the log-scores of the classes present in training.
ScoreVector softmax_scores(const TrainedClassifier& clf, const std::vector<double>& logits) {
    ScoreVector s{};
    const double top = *std::max_element(logits.begin(), logits.end());
    for (std::size_t c = 0; c < clf.classes.size(); ++c) {
        s[static_cast<std::size_t>(clf.classes[c])] = std::exp(logits[c] - top);
    }
    normalise(s);
    return s;
}

}  // namespace

std::string_view classifier_name(ClassifierKind kind) noexcept {
    return kLearnerNames[static_cast<std::size_t>(kind)];
}

ClassifierKind classifier_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kLearnerNames.size(); ++i) {
        if (kLearnerNames[i] == name) return static_cast<ClassifierKind>(i);
    }
    fail(ErrorCode::InvalidArgument, "unknown metalearner '" + std::string(name) + "'");
}

Standardizer Standardizer::fit(const MatrixXd& x) {
    Standardizer s;
    s.input_dim = static_cast<std::size_t>(x.cols());
    const double n = static_cast<double>(x.rows());
    for (Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).sum() / n;
        const double var = (x.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
            s.kept.push_back(static_cast<std::size_t>(c));
            s.mean.push_back(mean);
            s.scale.push_back(sd);
        }
    }
    return s;
}

VectorXd Standardizer::transform(std::span<const double> row) const {
    if (row.size() != input_dim) {
        fail(ErrorCode::LengthMismatch, "feature row has " + std::to_string(row.size()) + " entries, expected " +
                                            std::to_string(input_dim));
    }
    VectorXd z(static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        z(static_cast<Index>(k)) = (row[kept[k]] - mean[k]) / scale[k];
    }
    return z;
}

MatrixXd Standardizer::transform(const MatrixXd& x) const {
    MatrixXd z(x.rows(), static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        z.col(static_cast<Index>(k)) = (x.col(static_cast<Index>(kept[k])).array() - mean[k]) / scale[k];
    }
    return z;
}

int DecisionTree::predict(std::span<const double> z) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        node = z[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].leaf_class;
}

std::size_t TrainedClassifier::training_size() const {
    return std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
}

Eigen::MatrixXd feature_matrix(std::span<const FeatureVector> features) {
    MatrixXd x(static_cast<Index>(features.size()), static_cast<Index>(kFeatureCount));
    for (std::size_t r = 0; r < features.size(); ++r) {
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            x(static_cast<Index>(r), static_cast<Index>(c)) = features[r].values[c];
        }
    }
    return x;
}

TrainedClassifier train_classifier(ClassifierKind kind, std::span<const FeatureVector> features,
                                   std::span<const ModelId> labels, const MetaHyper& hyper, std::uint64_t seed) {
    return train_classifier(kind, feature_matrix(features), labels, hyper, seed);
}

TrainedClassifier train_classifier(ClassifierKind kind, const MatrixXd& x, std::span<const ModelId> labels,
                                   const MetaHyper& hyper, std::uint64_t seed) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        fail(ErrorCode::LengthMismatch, "feature rows and labels differ in count");
    }
    if (labels.size() < 10) {
        fail(ErrorCode::TooFewSamples, "metalearners need at least 10 training tasks");
    }
    TrainedClassifier clf;
    clf.kind = kind;
    clf.hyper = hyper;
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y[i] = static_cast<int>(model_index(labels[i]));
        ++clf.class_counts[static_cast<std::size_t>(y[i])];
    }
    if (std::count_if(clf.class_counts.begin(), clf.class_counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
        fail(ErrorCode::SingleClass, "metalearners need at least two distinct labels");
    }
    clf.norm = Standardizer::fit(x);
    if (clf.norm.kept.empty()) {
        fail(ErrorCode::InvalidArgument, "every feature is constant over the training set");
    }
    const MatrixXd z = clf.norm.transform(x);
    const Index n = z.rows();
    const Index d = z.cols();

    switch (kind) {
        case ClassifierKind::RF: {
            if (hyper.rf_trees < 1 || hyper.rf_max_depth < 1) {
                fail(ErrorCode::InvalidArgument, "random forest needs at least one tree of depth >= 1");
            }
            for (int t = 0; t < hyper.rf_trees; ++t) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
                std::vector<std::size_t> sample(static_cast<std::size_t>(n));
                for (auto& s : sample) {
                    s = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)),
                                 static_cast<std::size_t>(n - 1));
                }
                DecisionTree tree;
                TreeBuilder builder(z, y, clf.class_counts, hyper.rf_max_depth, rng);
                builder.build(sample, 0, tree);
                clf.trees.push_back(std::move(tree));
            }
            break;
        }
        case ClassifierKind::KNN:
            if (hyper.knn_k < 1) {
                fail(ErrorCode::InvalidArgument, "KNN needs k >= 1");
            }
            clf.exemplars = z;
            clf.exemplar_class = y;
            break;
        case ClassifierKind::NB:
        case ClassifierKind::LD: {
            for (std::size_t c = 0; c < kModelCount; ++c) {
                if (clf.class_counts[c] > 0) clf.classes.push_back(static_cast<int>(c));
            }
            const auto C = static_cast<Index>(clf.classes.size());
            clf.means = MatrixXd::Zero(C, d);
            clf.variances = MatrixXd::Zero(C, d);
            for (Index i = 0; i < n; ++i) {
                const auto k = static_cast<Index>(std::find(clf.classes.begin(), clf.classes.end(), y[static_cast<std::size_t>(i)]) - clf.classes.begin());
                clf.means.row(k) += z.row(i);
            }
            for (Index k = 0; k < C; ++k) {
                const auto cnt = static_cast<double>(clf.class_counts[static_cast<std::size_t>(clf.classes[static_cast<std::size_t>(k)])]);
                clf.means.row(k) /= cnt;
                clf.log_prior.push_back(std::log(cnt / static_cast<double>(n)));
            }
            MatrixXd pooled = MatrixXd::Zero(d, d);
            for (Index i = 0; i < n; ++i) {
                const auto k = static_cast<Index>(std::find(clf.classes.begin(), clf.classes.end(), y[static_cast<std::size_t>(i)]) - clf.classes.begin());
                const VectorXd r = (z.row(i) - clf.means.row(k)).transpose();
                clf.variances.row(k) += r.cwiseProduct(r).transpose();
                if (kind == ClassifierKind::LD) pooled.noalias() += r * r.transpose();
            }
            if (kind == ClassifierKind::NB) {
                for (Index k = 0; k < C; ++k) {
                    const auto cnt = static_cast<double>(clf.class_counts[static_cast<std::size_t>(clf.classes[static_cast<std::size_t>(k)])]);
                    clf.variances.row(k) = (clf.variances.row(k) / cnt).cwiseMax(hyper.nb_variance_floor);
                }
                clf.precision.resize(0, 0);
            } else {
                const double dof = n > C ? static_cast<double>(n - C) : static_cast<double>(n);
                pooled /= dof;
                pooled.diagonal().array() += hyper.ld_lambda;
                clf.precision = pooled.ldlt().solve(MatrixXd::Identity(d, d));
                clf.variances.resize(0, 0);
            }
            break;
        }
    }
    return clf;
}

ScoreVector predict_scores(const TrainedClassifier& clf, const FeatureVector& f) {
    return predict_scores(clf, std::span<const double>(f.values));
}

ScoreVector predict_scores(const TrainedClassifier& clf, std::span<const double> row) {
    const VectorXd z = clf.norm.transform(row);
    ScoreVector s{};
    switch (clf.kind) {
        case ClassifierKind::RF: {
            std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
            for (const auto& tree : clf.trees) {
                s[static_cast<std::size_t>(tree.predict(zs))] += 1.0;
            }
            for (auto& v : s) v /= static_cast<double>(clf.trees.size());
            return s;
        }
        case ClassifierKind::KNN: {
            const auto n = static_cast<std::size_t>(clf.exemplars.rows());
            std::vector<std::pair<long long, std::size_t>> keyed(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double d2 = (clf.exemplars.row(static_cast<Index>(i)).transpose() - z).squaredNorm();
                // Quantised so that rounding noise from rescaled inputs cannot reorder equal distances.
                keyed[i] = {std::llround(d2 * 1e8), i};
            }
            const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(clf.hyper.knn_k), n);
            std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k), keyed.end());
            for (std::size_t j = 0; j < k; ++j) {
                s[static_cast<std::size_t>(clf.exemplar_class[keyed[j].second])] += 1.0 / static_cast<double>(k);
            }
            return s;
        }
        case ClassifierKind::NB: {
            std::vector<double> logits(clf.classes.size());
            for (std::size_t c = 0; c < clf.classes.size(); ++c) {
                double lp = clf.log_prior[c];
                for (Index j = 0; j < z.size(); ++j) {
                    const double var = clf.variances(static_cast<Index>(c), j);
                    const double r = z(j) - clf.means(static_cast<Index>(c), j);
                    lp += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * r * r / var;
                }
                logits[c] = lp;
            }
            return softmax_scores(clf, logits);
        }
        case ClassifierKind::LD: {
            std::vector<double> logits(clf.classes.size());
            for (std::size_t c = 0; c < clf.classes.size(); ++c) {
                const VectorXd r = z - clf.means.row(static_cast<Index>(c)).transpose();
                logits[c] = clf.log_prior[c] - 0.5 * r.dot(clf.precision * r);
            }
            return softmax_scores(clf, logits);
        }
    }
    return s;
}

ModelId top_choice(const ScoreVector& scores, const std::array<std::size_t, kModelCount>& class_counts,
                   const FeasibilityMask* mask) {
    int best = -1;
    for (std::size_t c = 0; c < kModelCount; ++c) {
        if (mask != nullptr && !(*mask)[c]) continue;
        if (best < 0 || scores[c] > scores[best] ||
            (scores[c] == scores[best] && class_counts[c] > class_counts[best])) {
            best = static_cast<int>(c);
        }
    }
    if (best < 0) {
        fail(ErrorCode::AllInfeasible, "no candidate model is allowed by the feasibility mask");
    }
    return model_at(static_cast<std::size_t>(best));
}

ModelId predict(const TrainedClassifier& clf, std::span<const double> row) {
    return top_choice(predict_scores(clf, row), clf.class_counts);
}

ModelId predict(const TrainedClassifier& clf, const FeatureVector& f) {
    return predict(clf, std::span<const double>(f.values));
}

}  // namespace lfsel
