#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lfsel/features.hpp"
#include "lfsel/models.hpp"

namespace lfsel {

enum class ClassifierKind : int { RF = 0, KNN = 1, NB = 2, LD = 3 };
inline constexpr std::size_t kLearnerCount = 4;
inline constexpr std::array<ClassifierKind, kLearnerCount> kAllLearners{ClassifierKind::RF, ClassifierKind::KNN,
                                                                        ClassifierKind::NB, ClassifierKind::LD};

std::string_view classifier_name(ClassifierKind kind) noexcept;
ClassifierKind classifier_from_name(std::string_view name);

/// Per-candidate scores, indexed by model_index(); non-negative, summing to 1.
using ScoreVector = std::array<double, kModelCount>;
/// true = candidate allowed.
using FeasibilityMask = std::array<bool, kModelCount>;

struct MetaHyper {
    int rf_trees = 100;
    int rf_max_depth = 12;
    int knn_k = 5;
    double nb_variance_floor = 1e-6;
    double ld_lambda = 1e-3;
};

/// Z-scoring over the columns that vary in training; constant columns are dropped.
struct Standardizer {
    std::vector<std::size_t> kept;
    std::vector<double> mean;
    std::vector<double> scale;
    std::size_t input_dim = 0;

    static Standardizer fit(const Eigen::MatrixXd& x);
    Eigen::VectorXd transform(std::span<const double> row) const;
    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = -1;  // model index voted by a leaf
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int predict(std::span<const double> z) const;
};

struct TrainedClassifier {
    ClassifierKind kind = ClassifierKind::RF;
    MetaHyper hyper;
    Standardizer norm;
    std::array<std::size_t, kModelCount> class_counts{};

    std::vector<DecisionTree> trees;  // RF

    Eigen::MatrixXd exemplars;   // KNN, z-scored rows
    std::vector<int> exemplar_class;

    std::vector<int> classes;  // NB / LD, model indices present in training
    Eigen::MatrixXd means;     // one row per entry of `classes`
    Eigen::MatrixXd variances; // NB
    Eigen::MatrixXd precision; // LD, inverse of the regularised pooled covariance
    std::vector<double> log_prior;

    std::size_t training_size() const;
};

/// Throws SingleClass (< 2 distinct labels) and TooFewSamples (< 10 rows).
TrainedClassifier train_classifier(ClassifierKind kind, const Eigen::MatrixXd& x, std::span<const ModelId> labels,
                                   const MetaHyper& hyper = {}, std::uint64_t seed = 0);
TrainedClassifier train_classifier(ClassifierKind kind, std::span<const FeatureVector> features,
                                   std::span<const ModelId> labels, const MetaHyper& hyper = {},
                                   std::uint64_t seed = 0);

ScoreVector predict_scores(const TrainedClassifier& clf, std::span<const double> row);
ScoreVector predict_scores(const TrainedClassifier& clf, const FeatureVector& f);

/// Highest score among allowed candidates; ties go to the class seen more
/// often in training, then to the lower model id.
ModelId top_choice(const ScoreVector& scores, const std::array<std::size_t, kModelCount>& class_counts,
                   const FeasibilityMask* mask = nullptr);

ModelId predict(const TrainedClassifier& clf, std::span<const double> row);
ModelId predict(const TrainedClassifier& clf, const FeatureVector& f);

Eigen::MatrixXd feature_matrix(std::span<const FeatureVector> features);

}  // namespace lfsel
