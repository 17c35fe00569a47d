#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lfsel/labeling.hpp"
#include "lfsel/voting.hpp"

namespace lfsel {

/// Index partition of a corpus of J tasks.
struct CorpusSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Shuffled 70/20/10 partition with sizes floor(0.7J), floor(0.2J) and the
/// remainder. Throws TooFew for J < 10.
CorpusSplit split_corpus(std::size_t j, std::uint64_t seed);

/// Fraction of exact matches. Throws LengthMismatch (also for empty input).
double eta(std::span<const ModelId> predicted, std::span<const ModelId> truth);

struct SerReport {
    double e_select = 0.0;
    double e_best = 0.0;
    double ser = 1.0;
    bool failure = false;  // selected model has no finite error on the task
};

/// Throws AllInfeasible when every model failed on task j.
SerReport ser(const ErrorMatrix& z, ModelId selected, std::size_t j);

/// Everything the report needs for one evaluated task.
struct TaskOutcome {
    std::size_t column = 0;  // task index into Z
    ModelId truth = ModelId::Sarima211;
    std::array<ModelId, kLearnerCount> learner_choice{};
    Recommendation ranking;  // full ranking, first entry is the voted pick
};

struct BenchmarkReport {
    std::size_t tasks = 0;
    std::array<double, kLearnerCount> learner_eta{};
    double voted_eta = 0.0;
    double random_baseline = 1.0 / static_cast<double>(kModelCount);
    std::array<double, kModelCount> hit_rate{};     // true best within the top k (k = index + 1)
    std::array<double, kModelCount> rank_share{};   // true best exactly at rank k
    std::array<double, kModelCount> rank_ser{};     // mean SER over tasks where rank k did not fail
    std::array<double, kModelCount> rank_mape{};
    std::array<std::size_t, kModelCount> rank_failures{};
    std::array<std::size_t, kModelCount> top1_count{};      // per model
    std::array<std::size_t, kModelCount> top1_failures{};   // per model
    std::array<double, kModelCount> model_ser{};    // each model used alone, mean over tasks where it ran
    std::array<double, kModelCount> model_mape{};
    std::array<std::size_t, kModelCount> model_failures{};
    ModelId best_single = ModelId::Sarima211;
    double best_single_ser = 0.0;
};

/// Aggregates per-task outcomes into the report.
BenchmarkReport summarize(std::span<const TaskOutcome> outcomes, const ErrorMatrix& z);

/// Runs the four metalearners and the voting engine on the listed tasks.
/// masks[i] restricts the candidates for features row i (nullptr entries in
/// an empty vector mean no masking).
BenchmarkReport benchmark(const Eigen::MatrixXd& features, std::span<const ModelId> labels, const ErrorMatrix& z,
                          std::span<const std::size_t> tasks, std::span<const TrainedClassifier> classifiers,
                          std::span<const CalibrationCurve> curves, std::span<const FeasibilityMask> masks = {});

std::vector<TaskOutcome> evaluate_tasks(const Eigen::MatrixXd& features, std::span<const ModelId> labels,
                                        std::span<const std::size_t> tasks,
                                        std::span<const TrainedClassifier> classifiers,
                                        std::span<const CalibrationCurve> curves,
                                        std::span<const FeasibilityMask> masks = {});

std::string report_table(const BenchmarkReport& report);
/// "metric,name,value" rows with a header line.
std::string report_csv(const BenchmarkReport& report);

}  // namespace lfsel
