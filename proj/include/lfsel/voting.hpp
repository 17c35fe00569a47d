#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lfsel/metalearners.hpp"

namespace lfsel {

/// Monotone score -> accuracy map of one metalearner.
struct CalibrationCurve {
    ClassifierKind kind = ClassifierKind::RF;
    std::vector<double> centers;       // mean top score per (merged) bin, strictly increasing
    std::vector<double> accuracy;      // isotonic fit at each center
    std::vector<double> raw_accuracy;  // empirical accuracy per bin
    std::vector<double> bin_low;       // smallest score in each bin
    std::vector<double> bin_high;      // largest score in each bin
    std::vector<std::size_t> bin_count;
    double validation_accuracy = 0.0;  // fraction of validation tasks whose argmax was right

    /// Linear between centers, constant past the end bins.
    double eval(double score) const;
};

/// Weighted pool-adjacent-violators; result is non-decreasing.
std::vector<double> isotonic_fit(std::span<const double> values, std::span<const double> weights);

/// Core fit on (top score, correct) pairs. Throws TooFewSamples when fewer
/// than 5 * n_bins samples are given.
CalibrationCurve fit_calibration(ClassifierKind kind, std::span<const double> top_scores,
                                 std::span<const bool> correct, std::size_t n_bins = 10);

CalibrationCurve fit_calibration(const TrainedClassifier& clf, const Eigen::MatrixXd& f_val,
                                 std::span<const ModelId> phi_val, std::size_t n_bins = 10);

/// One metalearner's output for a query task.
struct Ballot {
    ScoreVector scores{};
    std::array<std::size_t, kModelCount> class_counts{};  // argmax tie-breaking
};

struct Recommendation {
    std::vector<ModelId> models;
    std::vector<double> accuracy;          // A(b)
    std::vector<ClassifierKind> learner;   // metalearner attaining A(b)
};

/// Each learner nominates its best allowed candidate at calibrated accuracy
/// h(S(nominee)); the highest estimate wins, ties to the learner with the
/// higher validation accuracy, then to the lower model id.
/// Throws AllInfeasible when the mask admits nothing.
ModelId vote(std::span<const Ballot> ballots, std::span<const CalibrationCurve> curves,
             const FeasibilityMask* mask = nullptr);

/// Candidates ordered by A(b) = max_i h_i(S_i(b)); masked candidates are
/// skipped, so fewer than k entries come back when few are allowed.
Recommendation rank(std::span<const Ballot> ballots, std::span<const CalibrationCurve> curves, std::size_t k,
                    const FeasibilityMask* mask = nullptr);

Ballot make_ballot(const TrainedClassifier& clf, std::span<const double> features);

}  // namespace lfsel
