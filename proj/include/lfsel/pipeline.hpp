#pragma once

#include <cstdint>
#include <vector>

#include "lfsel/evaluation.hpp"
#include "lfsel/features.hpp"
#include "lfsel/labeling.hpp"
#include "lfsel/store.hpp"

namespace lfsel {

struct PipelineConfig {
    LabelingConfig labeling{};
    MetaHyper hyper{};
    std::size_t n_bins = 10;
    unsigned threads = 1;
    bool verbose = false;
};

/// Statically admissible candidates for a task.
FeasibilityMask feasibility_mask(const LFTask& task, const ZooConfig& config = {});

/// Builds the store from already labelled tasks (labels[i] belongs to
/// tasks[i]); unlabelled tasks are left out. The calibration bin count drops
/// to floor(|validation| / 5) when the validation set is too small for
/// config.n_bins.
MetaKnowledgeStore train_store(const std::vector<LFTask>& tasks, const CorpusLabels& labels, std::uint64_t seed,
                               const PipelineConfig& config = {});

/// label_corpus followed by train_store.
MetaKnowledgeStore train_pipeline(const std::vector<LFTask>& tasks, std::uint64_t seed,
                                  const PipelineConfig& config = {}, CorpusLabels* labels_out = nullptr);

/// Forward path for a new task: features, four classifiers, calibrated rank.
/// Feasibility masking is applied unless `masked` is false.
Recommendation recommend(const MetaKnowledgeStore& store, const LFTask& task, std::size_t k, bool masked = true,
                         const ZooConfig& zoo = {});

/// Evaluation on the store's testing partition.
BenchmarkReport benchmark_store(const MetaKnowledgeStore& store);

}  // namespace lfsel
