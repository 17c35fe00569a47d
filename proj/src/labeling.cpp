#include "lfsel/labeling.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "lfsel/error.hpp"

namespace lfsel {

double pearson(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.size() < 2) {
        fail(ErrorCode::LengthMismatch, "Pearson correlation needs two vectors of equal length >= 2");
    }
    const auto n = static_cast<double>(u.size());
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= n;
    mv /= n;
    double suv = 0.0, suu = 0.0, svv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suv += (u[i] - mu) * (v[i] - mv);
        suu += (u[i] - mu) * (u[i] - mu);
        svv += (v[i] - mv) * (v[i] - mv);
    }
    if (suu == 0.0 || svv == 0.0) {
        const bool equal = suu == 0.0 && svv == 0.0 && std::equal(u.begin(), u.end(), v.begin());
        return equal ? 1.0 : 0.0;
    }
    return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

TaskEvaluator::TaskEvaluator(const LFTask& task, std::uint64_t seed, const ZooConfig& config)
    : task_(task), profile_(profile_task(task)) {
    const SplitPair base = earliest_split(task);
    for (const ModelId id : kAllModels) {
        const std::size_t i = model_index(id);
        if (!feasible(id, task, profile_, config)) {
            fit_error_[i] = "infeasible";
            continue;
        }
        try {
            fitted_[i] = fit(id, task, profile_, base, derive_seed(seed, static_cast<std::uint64_t>(model_number(id))),
                             config);
        } catch (const Error& e) {
            fit_error_[i] = e.what();
        }
    }
}

bool TaskEvaluator::any_feasible() const noexcept {
    return std::any_of(fitted_.begin(), fitted_.end(), [](const auto& m) { return m.has_value(); });
}

const ModelRow& TaskEvaluator::evaluate(const SplitPair& split) {
    const auto it = memo_.find(split.test.begin);
    if (it != memo_.end()) {
        return it->second;
    }
    ModelRow row;
    for (std::size_t i = 0; i < kModelCount; ++i) {
        if (!fitted_[i]) {
            row[i].error = fit_error_[i];
            continue;
        }
        try {
            row[i] = score_forecast(predict(*fitted_[i], task_, split), task_, split);
        } catch (const Error& e) {
            row[i] = ModelOutcome{};
            row[i].error = e.what();
        }
        row[i].fit_time = fitted_[i]->fit_time;
    }
    return memo_.emplace(split.test.begin, row).first->second;
}

std::optional<std::size_t> split_winner(const ModelRow& row) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < kModelCount; ++i) {
        if (row[i].ok && (!best || row[i].rmse < row[*best].rmse)) {
            best = i;
        }
    }
    return best;
}

namespace {

struct Iteration {
    std::array<double, kModelCount> omega{};
    std::array<double, kModelCount> rmse{};
    std::array<double, kModelCount> mape{};
    std::array<double, kModelCount> fit_time{};
};

Iteration run_iteration(TaskEvaluator& eval, const LFTask& task, std::size_t splits, Rng& rng) {
    Iteration it;
    std::array<std::size_t, kModelCount> wins{};
    std::size_t decided = 0;
    for (std::size_t s = 0; s < splits; ++s) {
        const auto& row = eval.evaluate(random_split(task, rng));
        if (const auto w = split_winner(row)) {
            ++wins[*w];
            ++decided;
        }
        for (std::size_t i = 0; i < kModelCount; ++i) {
            it.rmse[i] += row[i].ok ? row[i].rmse : std::numeric_limits<double>::infinity();
            it.mape[i] += row[i].ok ? row[i].mape : std::numeric_limits<double>::infinity();
            it.fit_time[i] = row[i].fit_time;
        }
    }
    for (std::size_t i = 0; i < kModelCount; ++i) {
        it.omega[i] = decided > 0 ? static_cast<double>(wins[i]) / static_cast<double>(decided) : 0.0;
        it.rmse[i] /= static_cast<double>(splits);
        it.mape[i] /= static_cast<double>(splits);
    }
    return it;
}

}  // namespace

TaskLabel label_task(const LFTask& task, std::uint64_t seed, const LabelingConfig& config) {
    TaskEvaluator eval(task, seed, config.zoo);
    if (!eval.any_feasible()) {
        fail(ErrorCode::AllInfeasible, "no candidate model can be fitted on task " + task.id);
    }
    Rng rng(derive_seed(seed, 0x5EED));
    std::size_t L = 1;
    Iteration prev = run_iteration(eval, task, L, rng);
    Iteration cur = prev;
    double pcc = 0.0;
    bool stable = false;
    while (true) {
        L += config.step;
        cur = run_iteration(eval, task, L, rng);
        pcc = pearson(cur.omega, prev.omega);
        if (pcc >= config.threshold) {
            stable = true;
            break;
        }
        if (L >= config.max_iterations) {
            break;
        }
        prev = cur;
    }
    if (std::all_of(cur.omega.begin(), cur.omega.end(), [](double w) { return w == 0.0; })) {
        fail(ErrorCode::AllInfeasible, "every candidate failed on every split of task " + task.id);
    }
    TaskLabel label;
    std::size_t best = 0;
    for (std::size_t i = 1; i < kModelCount; ++i) {
        if (cur.omega[i] > cur.omega[best]) {
            best = i;
        }
    }
    label.phi = model_at(best);
    label.distribution = {cur.omega, L, pcc};
    label.stabilized = stable;
    label.rmse = cur.rmse;
    label.mape = cur.mape;
    label.fit_time = cur.fit_time;
    return label;
}

bool ErrorMatrix::failed(std::size_t model, std::size_t task) const {
    return !std::isfinite(rmse(static_cast<Eigen::Index>(model), static_cast<Eigen::Index>(task)));
}

std::uint64_t task_seed(std::uint64_t master, const std::string& task_id) {
    return derive_seed(master, fnv1a(task_id));
}

CorpusLabels label_corpus(const std::vector<LFTask>& tasks, std::uint64_t seed, const LabelingConfig& config,
                          unsigned threads, bool verbose) {
    if (tasks.empty()) {
        fail(ErrorCode::InvalidArgument, "cannot label an empty corpus");
    }
    const std::size_t J = tasks.size();
    CorpusLabels out;
    out.labels.resize(J);
    out.errors.resize(J);
    for (const auto& t : tasks) {
        out.ids.push_back(t.id);
    }
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;
    const auto worker = [&] {
        for (std::size_t j = next++; j < J; j = next++) {
            try {
                out.labels[j] = label_task(tasks[j], task_seed(seed, tasks[j].id), config);
            } catch (const Error& e) {
                out.errors[j] = e.what();
            }
            const std::size_t finished = ++done;
            if (verbose) {
                std::lock_guard lock(log_mutex);
                std::fprintf(stderr, "[label] %zu/%zu %s -> %s\n", finished, J, tasks[j].id.c_str(),
                             out.labels[j] ? std::string(model_name(out.labels[j]->phi)).c_str()
                                           : out.errors[j].c_str());
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(J)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    out.z.rmse = Eigen::MatrixXd::Constant(kModelCount, static_cast<Eigen::Index>(J), inf);
    out.z.mape = Eigen::MatrixXd::Constant(kModelCount, static_cast<Eigen::Index>(J), inf);
    for (std::size_t j = 0; j < J; ++j) {
        if (!out.labels[j]) continue;
        for (std::size_t i = 0; i < kModelCount; ++i) {
            out.z.rmse(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = out.labels[j]->rmse[i];
            out.z.mape(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = out.labels[j]->mape[i];
        }
    }
    return out;
}

}  // namespace lfsel
