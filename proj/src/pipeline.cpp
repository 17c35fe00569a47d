#include "lfsel/pipeline.hpp"

#include <algorithm>
#include <iostream>

#include "lfsel/error.hpp"
#include "lfsel/random.hpp"

namespace lfsel {

namespace {

constexpr std::uint64_t kSplitStream = 0x5B117;
constexpr std::uint64_t kLearnerStream = 0x1EA7;

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

std::vector<ModelId> labels_of(const std::vector<ModelId>& labels, std::span<const std::size_t> idx) {
    std::vector<ModelId> out;
    out.reserve(idx.size());
    for (const auto i : idx) out.push_back(labels[i]);
    return out;
}

}  // namespace

FeasibilityMask feasibility_mask(const LFTask& task, const ZooConfig& config) {
    const TaskProfile profile = profile_task(task);
    FeasibilityMask mask{};
    for (std::size_t m = 0; m < kModelCount; ++m) mask[m] = feasible(model_at(m), task, profile, config);
    return mask;
}

MetaKnowledgeStore train_store(const std::vector<LFTask>& tasks, const CorpusLabels& labels, std::uint64_t seed,
                               const PipelineConfig& config) {
    if (labels.ids.size() != tasks.size()) {
        fail(ErrorCode::LengthMismatch, "label file covers " + std::to_string(labels.ids.size()) + " tasks, corpus has " +
                                            std::to_string(tasks.size()));
    }
    MetaKnowledgeStore s;
    s.seed = seed;
    s.hyper = config.hyper;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < tasks.size(); ++j) {
        if (labels.ids[j] != tasks[j].id) {
            fail(ErrorCode::InvalidArgument, "label entry " + labels.ids[j] + " does not match task " + tasks[j].id);
        }
        if (labels.labels[j]) kept.push_back(j);
    }
    const auto J = static_cast<Eigen::Index>(kept.size());
    s.features.resize(J, static_cast<Eigen::Index>(kFeatureCount));
    s.z.rmse.resize(static_cast<Eigen::Index>(kModelCount), J);
    s.z.mape.resize(static_cast<Eigen::Index>(kModelCount), J);
    for (Eigen::Index c = 0; c < J; ++c) {
        const std::size_t j = kept[static_cast<std::size_t>(c)];
        const LFTask& task = tasks[j];
        try {
            const FeatureVector f = extract_features(task);
            for (std::size_t k = 0; k < kFeatureCount; ++k) s.features(c, static_cast<Eigen::Index>(k)) = f.values[k];
            s.masks.push_back(feasibility_mask(task, config.labeling.zoo));
        } catch (const Error& e) {
            throw Error(e.code(), "task " + task.id + ": " + e.what());
        }
        s.ids.push_back(task.id);
        s.labels.push_back(labels.labels[j]->phi);
        s.z.rmse.col(c) = labels.z.rmse.col(static_cast<Eigen::Index>(j));
        s.z.mape.col(c) = labels.z.mape.col(static_cast<Eigen::Index>(j));
    }
    s.split = split_corpus(kept.size(), derive_seed(seed, kSplitStream));

    const Eigen::MatrixXd x_train = rows_of(s.features, s.split.train);
    const auto y_train = labels_of(s.labels, s.split.train);
    const Eigen::MatrixXd x_val = rows_of(s.features, s.split.validation);
    const auto y_val = labels_of(s.labels, s.split.validation);
    s.n_bins = std::clamp<std::size_t>(s.split.validation.size() / 5, 1, config.n_bins);
    if (config.verbose && s.n_bins < config.n_bins) {
        std::cerr << "calibration: " << s.split.validation.size() << " validation tasks, using " << s.n_bins
                  << " bins\n";
    }
    for (std::size_t i = 0; i < kLearnerCount; ++i) {
        s.classifiers[i] =
            train_classifier(kAllLearners[i], x_train, y_train, config.hyper, derive_seed(seed, kLearnerStream + i));
        s.curves[i] = fit_calibration(s.classifiers[i], x_val, y_val, s.n_bins);
    }
    return s;
}

MetaKnowledgeStore train_pipeline(const std::vector<LFTask>& tasks, std::uint64_t seed, const PipelineConfig& config,
                                  CorpusLabels* labels_out) {
    CorpusLabels labels = label_corpus(tasks, seed, config.labeling, config.threads, config.verbose);
    MetaKnowledgeStore s = train_store(tasks, labels, seed, config);
    if (labels_out != nullptr) *labels_out = std::move(labels);
    return s;
}

Recommendation recommend(const MetaKnowledgeStore& store, const LFTask& task, std::size_t k, bool masked,
                         const ZooConfig& zoo) {
    const FeatureVector f = extract_features(task);
    std::array<Ballot, kLearnerCount> ballots;
    for (std::size_t i = 0; i < kLearnerCount; ++i) ballots[i] = make_ballot(store.classifiers[i], f.values);
    if (!masked) return rank(ballots, store.curves, k);
    const FeasibilityMask mask = feasibility_mask(task, zoo);
    return rank(ballots, store.curves, k, &mask);
}

BenchmarkReport benchmark_store(const MetaKnowledgeStore& store) {
    store.validate();
    return benchmark(store.features, store.labels, store.z, store.split.test, store.classifiers, store.curves,
                     store.masks);
}

}  // namespace lfsel
