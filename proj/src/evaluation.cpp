#include "lfsel/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lfsel/csv_io.hpp"
#include "lfsel/error.hpp"
#include "lfsel/random.hpp"

namespace lfsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_or_nan(double sum, std::size_t n) {
    return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::string quoted(std::string_view s) {
    if (s.find_first_of(",\"") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

CorpusSplit split_corpus(std::size_t j, std::uint64_t seed) {
    if (j < 10) fail(ErrorCode::TooFew, "a corpus split needs at least 10 tasks, got " + std::to_string(j));
    std::vector<std::size_t> perm(j);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = j - 1; i > 0; --i) {
        const auto pick = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1)), i);
        std::swap(perm[i], perm[pick]);
    }
    const std::size_t n_train = j * 7 / 10;
    const std::size_t n_val = j * 2 / 10;
    CorpusSplit s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                        perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    return s;
}

double eta(std::span<const ModelId> predicted, std::span<const ModelId> truth) {
    if (predicted.size() != truth.size() || predicted.empty()) {
        fail(ErrorCode::LengthMismatch, "accuracy needs equal, non-empty prediction and label lists");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

SerReport ser(const ErrorMatrix& z, ModelId selected, std::size_t j) {
    double best = kInf;
    for (std::size_t m = 0; m < kModelCount; ++m) {
        if (!z.failed(m, j)) best = std::min(best, z.rmse(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)));
    }
    if (!std::isfinite(best)) {
        fail(ErrorCode::AllInfeasible, "every model failed on task column " + std::to_string(j));
    }
    SerReport r;
    r.e_best = best;
    const auto m = model_index(selected);
    if (z.failed(m, j)) {
        r.e_select = kInf;
        r.ser = kInf;
        r.failure = true;
        return r;
    }
    r.e_select = z.rmse(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
    // A perfect forecast makes both errors zero; that is a tie, not 0/0.
    r.ser = best > 0.0 ? r.e_select / best : (r.e_select > 0.0 ? kInf : 1.0);
    return r;
}

BenchmarkReport summarize(std::span<const TaskOutcome> outcomes, const ErrorMatrix& z) {
    if (outcomes.empty()) fail(ErrorCode::TooFew, "benchmark needs at least one evaluated task");
    BenchmarkReport r;
    r.tasks = outcomes.size();
    const double n = static_cast<double>(outcomes.size());
    std::array<double, kModelCount> rank_ser_sum{}, rank_mape_sum{}, model_ser_sum{}, model_mape_sum{};
    std::array<std::size_t, kModelCount> rank_ok{}, model_ok{};
    std::array<std::size_t, kLearnerCount> learner_hits{};
    std::size_t voted_hits = 0;

    for (const auto& o : outcomes) {
        const auto col = static_cast<Eigen::Index>(o.column);
        for (std::size_t i = 0; i < kLearnerCount; ++i) learner_hits[i] += o.learner_choice[i] == o.truth ? 1 : 0;
        if (!o.ranking.models.empty() && o.ranking.models.front() == o.truth) ++voted_hits;

        const auto pos = std::find(o.ranking.models.begin(), o.ranking.models.end(), o.truth);
        if (pos != o.ranking.models.end()) {
            const auto k = static_cast<std::size_t>(pos - o.ranking.models.begin());
            r.rank_share[k] += 1.0 / n;
            for (std::size_t q = k; q < kModelCount; ++q) r.hit_rate[q] += 1.0 / n;
        }
        for (std::size_t k = 0; k < o.ranking.models.size(); ++k) {
            const ModelId m = o.ranking.models[k];
            const SerReport s = ser(z, m, o.column);
            if (k == 0) {
                ++r.top1_count[model_index(m)];
                if (s.failure) ++r.top1_failures[model_index(m)];
            }
            if (s.failure) {
                ++r.rank_failures[k];
            } else {
                rank_ser_sum[k] += s.ser;
                rank_mape_sum[k] += z.mape(static_cast<Eigen::Index>(model_index(m)), col);
                ++rank_ok[k];
            }
        }
        for (std::size_t m = 0; m < kModelCount; ++m) {
            const SerReport s = ser(z, model_at(m), o.column);
            if (s.failure) {
                ++r.model_failures[m];
            } else {
                model_ser_sum[m] += s.ser;
                model_mape_sum[m] += z.mape(static_cast<Eigen::Index>(m), col);
                ++model_ok[m];
            }
        }
    }
    for (std::size_t i = 0; i < kLearnerCount; ++i) r.learner_eta[i] = static_cast<double>(learner_hits[i]) / n;
    r.voted_eta = static_cast<double>(voted_hits) / n;
    for (std::size_t k = 0; k < kModelCount; ++k) {
        r.rank_ser[k] = mean_or_nan(rank_ser_sum[k], rank_ok[k]);
        r.rank_mape[k] = mean_or_nan(rank_mape_sum[k], rank_ok[k]);
        r.model_ser[k] = mean_or_nan(model_ser_sum[k], model_ok[k]);
        r.model_mape[k] = mean_or_nan(model_mape_sum[k], model_ok[k]);
    }
    // The fixed-model baseline must run everywhere; if none does, fall back to
    // the lowest mean over the tasks each model managed.
    r.best_single_ser = kInf;
    for (const bool need_clean : {true, false}) {
        for (std::size_t m = 0; m < kModelCount; ++m) {
            if (need_clean && r.model_failures[m] > 0) continue;
            if (model_ok[m] > 0 && r.model_ser[m] < r.best_single_ser) {
                r.best_single_ser = r.model_ser[m];
                r.best_single = model_at(m);
            }
        }
        if (std::isfinite(r.best_single_ser)) break;
    }
    return r;
}

std::vector<TaskOutcome> evaluate_tasks(const Eigen::MatrixXd& features, std::span<const ModelId> labels,
                                        std::span<const std::size_t> tasks,
                                        std::span<const TrainedClassifier> classifiers,
                                        std::span<const CalibrationCurve> curves,
                                        std::span<const FeasibilityMask> masks) {
    if (classifiers.size() != kLearnerCount || curves.size() != kLearnerCount) {
        fail(ErrorCode::LengthMismatch, "benchmark expects four classifiers and four curves");
    }
    if (!masks.empty() && masks.size() != static_cast<std::size_t>(features.rows())) {
        fail(ErrorCode::LengthMismatch, "one feasibility mask per task is required");
    }
    std::vector<TaskOutcome> out;
    out.reserve(tasks.size());
    std::vector<double> row(static_cast<std::size_t>(features.cols()));
    for (const auto j : tasks) {
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = features(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
        const FeasibilityMask* mask = masks.empty() ? nullptr : &masks[j];
        std::array<Ballot, kLearnerCount> ballots;
        TaskOutcome o;
        o.column = j;
        o.truth = labels[j];
        for (std::size_t i = 0; i < kLearnerCount; ++i) {
            ballots[i] = make_ballot(classifiers[i], row);
            o.learner_choice[i] = top_choice(ballots[i].scores, ballots[i].class_counts);
        }
        o.ranking = rank(ballots, curves, kModelCount, mask);
        out.push_back(std::move(o));
    }
    return out;
}

BenchmarkReport benchmark(const Eigen::MatrixXd& features, std::span<const ModelId> labels, const ErrorMatrix& z,
                          std::span<const std::size_t> tasks, std::span<const TrainedClassifier> classifiers,
                          std::span<const CalibrationCurve> curves, std::span<const FeasibilityMask> masks) {
    const auto outcomes = evaluate_tasks(features, labels, tasks, classifiers, curves, masks);
    return summarize(outcomes, z);
}

std::string report_table(const BenchmarkReport& r) {
    std::string s = fmt::format("test tasks: {}\n\nmetalearner accuracy\n", r.tasks);
    for (std::size_t i = 0; i < kLearnerCount; ++i) {
        s += fmt::format("  {:<8} {:6.3f}\n", classifier_name(kAllLearners[i]), r.learner_eta[i]);
    }
    s += fmt::format("  {:<8} {:6.3f}\n  {:<8} {:6.3f}\n\n", "voted", r.voted_eta, "random", r.random_baseline);
    s += fmt::format("{:>4} {:>8} {:>8} {:>8} {:>10} {:>8}\n", "rank", "hit@k", "share", "SER", "MAPE", "failures");
    for (std::size_t k = 0; k < kModelCount; ++k) {
        s += fmt::format("{:>4} {:8.3f} {:8.3f} {:8.3f} {:10.4f} {:8}\n", k + 1, r.hit_rate[k], r.rank_share[k],
                         r.rank_ser[k], r.rank_mape[k], r.rank_failures[k]);
    }
    s += fmt::format("\n{:<15} {:>6} {:>8} {:>8} {:>10} {:>8}\n", "model", "top-1", "top1 fail", "SER", "MAPE",
                     "failures");
    for (std::size_t m = 0; m < kModelCount; ++m) {
        s += fmt::format("{:<15} {:6} {:8} {:8.3f} {:10.4f} {:8}\n", model_name(model_at(m)), r.top1_count[m],
                         r.top1_failures[m], r.model_ser[m], r.model_mape[m], r.model_failures[m]);
    }
    s += fmt::format("\nbest single model: {} (mean SER {:.3f})\n", model_name(r.best_single), r.best_single_ser);
    return s;
}

std::string report_csv(const BenchmarkReport& r) {
    std::string s = "metric,name,value\n";
    const auto row = [&s](std::string_view metric, std::string_view name, const std::string& value) {
        s += std::string(metric) + "," + quoted(name) + "," + value + "\n";
    };
    row("tasks", "test", std::to_string(r.tasks));
    for (std::size_t i = 0; i < kLearnerCount; ++i) {
        row("eta", classifier_name(kAllLearners[i]), format_double(r.learner_eta[i]));
    }
    row("eta", "voted", format_double(r.voted_eta));
    row("eta", "random", format_double(r.random_baseline));
    for (std::size_t k = 0; k < kModelCount; ++k) {
        const std::string name = "top" + std::to_string(k + 1);
        row("hit_rate", name, format_double(r.hit_rate[k]));
        row("rank_share", name, format_double(r.rank_share[k]));
        row("rank_ser", name, format_double(r.rank_ser[k]));
        row("rank_mape", name, format_double(r.rank_mape[k]));
        row("rank_failures", name, std::to_string(r.rank_failures[k]));
    }
    for (std::size_t m = 0; m < kModelCount; ++m) {
        const auto name = model_name(model_at(m));
        row("top1_count", name, std::to_string(r.top1_count[m]));
        row("top1_failures", name, std::to_string(r.top1_failures[m]));
        row("model_ser", name, format_double(r.model_ser[m]));
        row("model_mape", name, format_double(r.model_mape[m]));
        row("model_failures", name, std::to_string(r.model_failures[m]));
    }
    row("best_single_ser", model_name(r.best_single), format_double(r.best_single_ser));
    return s;
}

}  // namespace lfsel
