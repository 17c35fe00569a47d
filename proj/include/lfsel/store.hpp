#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lfsel/evaluation.hpp"
#include "lfsel/labeling.hpp"
#include "lfsel/metalearners.hpp"
#include "lfsel/voting.hpp"

namespace lfsel {

inline constexpr int kStoreVersion = 1;
inline constexpr int kLabelsVersion = 1;

/// Offline training output: meta-data, classifiers and their calibration.
struct MetaKnowledgeStore {
    int version = kStoreVersion;
    std::uint64_t seed = 0;
    std::size_t n_bins = 10;
    std::vector<std::string> ids;
    Eigen::MatrixXd features;  // J x 16
    std::vector<ModelId> labels;
    ErrorMatrix z;             // 10 x J
    std::vector<FeasibilityMask> masks;
    CorpusSplit split;
    MetaHyper hyper;
    std::array<TrainedClassifier, kLearnerCount> classifiers;
    std::array<CalibrationCurve, kLearnerCount> curves;

    /// Throws InvalidArgument when row counts disagree.
    void validate() const;
};

std::string store_to_json(const MetaKnowledgeStore& store);
/// Throws StoreVersion for an unknown format or version, MalformedRow for
/// structurally broken documents.
MetaKnowledgeStore store_from_json(const std::string& text);

void save_store(const std::filesystem::path& path, const MetaKnowledgeStore& store);
MetaKnowledgeStore load_store(const std::filesystem::path& path);

/// FNV-1a over the serialised store, as 16 hex digits.
std::string store_digest(const MetaKnowledgeStore& store);

std::string labels_to_json(const CorpusLabels& labels, std::uint64_t seed);
CorpusLabels labels_from_json(const std::string& text);
void save_labels(const std::filesystem::path& path, const CorpusLabels& labels, std::uint64_t seed);
CorpusLabels load_labels(const std::filesystem::path& path);

}  // namespace lfsel
