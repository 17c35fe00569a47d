#include "lfsel/voting.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "lfsel/error.hpp"

namespace lfsel {

namespace {

void check_inputs(std::span<const Ballot> ballots, std::span<const CalibrationCurve> curves) {
    if (ballots.empty() || ballots.size() != curves.size()) {
        fail(ErrorCode::LengthMismatch, "need one calibration curve per metalearner ballot");
    }
}

// Learner i beats j on a tied estimate.
bool learner_before(const CalibrationCurve& a, std::size_t ia, const CalibrationCurve& b, std::size_t ib) {
    if (a.validation_accuracy != b.validation_accuracy) return a.validation_accuracy > b.validation_accuracy;
    return ia < ib;
}

struct Support {
    double value = -1.0;
    std::size_t learner = 0;
};

}  // namespace

double CalibrationCurve::eval(double score) const {
    if (centers.empty()) return 0.0;
    if (score <= centers.front()) return accuracy.front();
    if (score >= centers.back()) return accuracy.back();
    const auto it = std::upper_bound(centers.begin(), centers.end(), score);
    const auto hi = static_cast<std::size_t>(it - centers.begin());
    const std::size_t lo = hi - 1;
    const double t = (score - centers[lo]) / (centers[hi] - centers[lo]);
    return accuracy[lo] + t * (accuracy[hi] - accuracy[lo]);
}

std::vector<double> isotonic_fit(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) {
        fail(ErrorCode::LengthMismatch, "isotonic values and weights differ in length");
    }
    struct Block {
        double mean;
        double weight;
        std::size_t size;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            const Block top = blocks.back();
            blocks.pop_back();
            auto& prev = blocks.back();
            const double w = prev.weight + top.weight;
            prev.mean = w > 0.0 ? (prev.mean * prev.weight + top.mean * top.weight) / w : 0.5 * (prev.mean + top.mean);
            prev.weight = w;
            prev.size += top.size;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& b : blocks) out.insert(out.end(), b.size, b.mean);
    return out;
}

CalibrationCurve fit_calibration(ClassifierKind kind, std::span<const double> top_scores,
                                 std::span<const bool> correct, std::size_t n_bins) {
    if (top_scores.size() != correct.size()) {
        fail(ErrorCode::LengthMismatch, "scores and correctness flags differ in length");
    }
    if (n_bins == 0) fail(ErrorCode::InvalidArgument, "calibration needs at least one bin");
    const std::size_t n = top_scores.size();
    if (n < 5 * n_bins) {
        fail(ErrorCode::TooFewSamples, "calibration with " + std::to_string(n_bins) + " bins needs at least " +
                                           std::to_string(5 * n_bins) + " validation tasks, got " + std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return top_scores[a] < top_scores[b]; });

    CalibrationCurve curve;
    curve.kind = kind;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        const std::size_t lo = b * n / n_bins;
        const std::size_t hi = (b + 1) * n / n_bins;
        double s = 0.0, a = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            s += top_scores[order[i]];
            a += correct[order[i]] ? 1.0 : 0.0;
        }
        hits += static_cast<std::size_t>(a);
        const double center = s / static_cast<double>(hi - lo);
        const double low = top_scores[order[lo]];
        const double high = top_scores[order[hi - 1]];
        // Bins whose mean score coincides with the previous one are merged so
        // that the interpolation grid stays strictly increasing.
        if (!curve.centers.empty() && center <= curve.centers.back()) {
            const auto c0 = static_cast<double>(curve.bin_count.back());
            const auto c1 = static_cast<double>(hi - lo);
            curve.centers.back() = std::max(curve.centers.back(), (curve.centers.back() * c0 + s) / (c0 + c1));
            curve.raw_accuracy.back() = (curve.raw_accuracy.back() * c0 + a) / (c0 + c1);
            curve.bin_high.back() = high;
            curve.bin_count.back() += hi - lo;
            continue;
        }
        curve.centers.push_back(center);
        curve.raw_accuracy.push_back(a / static_cast<double>(hi - lo));
        curve.bin_low.push_back(low);
        curve.bin_high.push_back(high);
        curve.bin_count.push_back(hi - lo);
    }
    std::vector<double> w(curve.bin_count.begin(), curve.bin_count.end());
    curve.accuracy = isotonic_fit(curve.raw_accuracy, w);
    for (auto& v : curve.accuracy) v = std::clamp(v, 0.0, 1.0);
    curve.validation_accuracy = static_cast<double>(hits) / static_cast<double>(n);
    return curve;
}

CalibrationCurve fit_calibration(const TrainedClassifier& clf, const Eigen::MatrixXd& f_val,
                                 std::span<const ModelId> phi_val, std::size_t n_bins) {
    if (static_cast<std::size_t>(f_val.rows()) != phi_val.size()) {
        fail(ErrorCode::LengthMismatch, "validation features and labels differ in count");
    }
    std::vector<double> top(phi_val.size());
    auto ok = std::make_unique<bool[]>(phi_val.size());
    std::vector<double> row(static_cast<std::size_t>(f_val.cols()));
    for (std::size_t i = 0; i < phi_val.size(); ++i) {
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = f_val(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        const auto s = predict_scores(clf, row);
        const ModelId choice = top_choice(s, clf.class_counts);
        top[i] = s[model_index(choice)];
        ok[i] = choice == phi_val[i];
    }
    return fit_calibration(clf.kind, top, std::span<const bool>(ok.get(), phi_val.size()), n_bins);
}

Ballot make_ballot(const TrainedClassifier& clf, std::span<const double> features) {
    return Ballot{predict_scores(clf, features), clf.class_counts};
}

ModelId vote(std::span<const Ballot> ballots, std::span<const CalibrationCurve> curves, const FeasibilityMask* mask) {
    check_inputs(ballots, curves);
    std::size_t best = 0;
    ModelId best_model = ModelId::Sarima211;
    double best_eta = -1.0;
    for (std::size_t i = 0; i < ballots.size(); ++i) {
        const ModelId nominee = top_choice(ballots[i].scores, ballots[i].class_counts, mask);
        const double eta = curves[i].eval(ballots[i].scores[model_index(nominee)]);
        const double va = curves[i].validation_accuracy;
        const double vb = curves[best].validation_accuracy;
        const bool take = eta > best_eta ||
                          (eta == best_eta && (va > vb || (va == vb && model_number(nominee) < model_number(best_model))));
        if (take) {
            best = i;
            best_eta = eta;
            best_model = nominee;
        }
    }
    return best_model;
}

Recommendation rank(std::span<const Ballot> ballots, std::span<const CalibrationCurve> curves, std::size_t k,
                    const FeasibilityMask* mask) {
    check_inputs(ballots, curves);
    if (k < 1 || k > kModelCount) fail(ErrorCode::InvalidArgument, "rank depth must be in 1..10");
    const ModelId winner = vote(ballots, curves, mask);

    std::array<Support, kModelCount> support{};
    for (std::size_t b = 0; b < kModelCount; ++b) {
        for (std::size_t i = 0; i < ballots.size(); ++i) {
            const double a = curves[i].eval(ballots[i].scores[b]);
            if (a > support[b].value ||
                (a == support[b].value && learner_before(curves[i], i, curves[support[b].learner], support[b].learner))) {
                support[b] = {a, i};
            }
        }
    }
    std::vector<std::size_t> order;
    for (std::size_t b = 0; b < kModelCount; ++b) {
        if (mask == nullptr || (*mask)[b]) order.push_back(b);
    }
    const std::size_t w = model_index(winner);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if ((a == w) != (b == w)) return a == w;
        if (support[a].value != support[b].value) return support[a].value > support[b].value;
        const auto& ca = curves[support[a].learner];
        const auto& cb = curves[support[b].learner];
        if (ca.validation_accuracy != cb.validation_accuracy) return ca.validation_accuracy > cb.validation_accuracy;
        return a < b;
    });
    order.resize(std::min(order.size(), k));

    Recommendation rec;
    for (const auto b : order) {
        rec.models.push_back(model_at(b));
        rec.accuracy.push_back(support[b].value);
        rec.learner.push_back(curves[support[b].learner].kind);
    }
    return rec;
}

}  // namespace lfsel
