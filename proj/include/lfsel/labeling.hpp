#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lfsel/models.hpp"

namespace lfsel {

/// Sample Pearson correlation. Two constant vectors that are equal give 1,
/// any other constant input gives 0.
double pearson(std::span<const double> u, std::span<const double> v);

struct LabelingConfig {
    std::size_t step = 10;
    std::size_t max_iterations = 201;  // L_max
    double threshold = 0.95;
    ZooConfig zoo{};
};

struct LabelDistribution {
    std::array<double, kModelCount> omega{};
    std::size_t iterations = 0;  // L at stop
    double pcc = 0.0;
};

struct TaskLabel {
    ModelId phi = ModelId::Sarima211;
    LabelDistribution distribution;
    /// False when L_max was reached before the correlation rule fired.
    bool stabilized = false;
    /// Mean test RMSE / MAPE per model over the final iteration's splits
    /// (infinite for models that failed on any of them).
    std::array<double, kModelCount> rmse{};
    std::array<double, kModelCount> mape{};
    std::array<double, kModelCount> fit_time{};
};

/// Evaluates candidates on splits of one task. Each feasible model is fitted
/// once on the training prefix shared by every admissible split and then
/// forecasts each split from the history before its test block; outcomes are
/// memoised by test start.
class TaskEvaluator {
public:
    TaskEvaluator(const LFTask& task, std::uint64_t seed, const ZooConfig& config);

    const ModelRow& evaluate(const SplitPair& split);
    bool any_feasible() const noexcept;
    const TaskProfile& profile() const noexcept { return profile_; }

private:
    const LFTask& task_;
    TaskProfile profile_;
    std::array<std::optional<FittedModel>, kModelCount> fitted_;
    std::array<std::string, kModelCount> fit_error_;
    std::map<std::size_t, ModelRow> memo_;
};

/// Index of the smallest RMSE among successful models (ties to the lower id);
/// nullopt when every model failed.
std::optional<std::size_t> split_winner(const ModelRow& row);

/// Algorithm 1 with the Pearson stopping rule. Throws AllInfeasible.
TaskLabel label_task(const LFTask& task, std::uint64_t seed, const LabelingConfig& config = {});

/// Z (10 x J) of mean test RMSE, MAPE alongside; non-finite marks a failure.
struct ErrorMatrix {
    Eigen::MatrixXd rmse;
    Eigen::MatrixXd mape;

    bool failed(std::size_t model, std::size_t task) const;
};

struct CorpusLabels {
    std::vector<std::string> ids;
    std::vector<std::optional<TaskLabel>> labels;
    std::vector<std::string> errors;  // empty when the task was labelled
    ErrorMatrix z;
};

/// Per-task seed derived from the master seed and the task id.
std::uint64_t task_seed(std::uint64_t master, const std::string& task_id);

/// Labels every task (in parallel when threads > 1); assembly follows input
/// order so results do not depend on scheduling. Failed tasks keep an error
/// message and an all-infinite Z column.
CorpusLabels label_corpus(const std::vector<LFTask>& tasks, std::uint64_t seed, const LabelingConfig& config = {},
                          unsigned threads = 1, bool verbose = false);

}  // namespace lfsel
