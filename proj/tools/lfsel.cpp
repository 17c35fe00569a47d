// Command-line front end: generate, label, train, recommend, benchmark.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "lfsel/config.hpp"
#include "lfsel/csv_io.hpp"
#include "lfsel/error.hpp"
#include "lfsel/evaluation.hpp"
#include "lfsel/pipeline.hpp"
#include "lfsel/store.hpp"
#include "lfsel/taskgen.hpp"

namespace fs = std::filesystem;
using namespace lfsel;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Globals {
    std::uint64_t seed = 20240611;
    std::string config;
    unsigned threads = 1;
    bool verbose = false;
};

RunConfig load_config(const Globals& g) {
    RunConfig c;
    if (!g.config.empty()) apply_config_file(g.config, c);
    c.corpus.seed = g.seed;
    c.pipeline.threads = std::max(1u, g.threads);
    c.pipeline.verbose = g.verbose;
    return c;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) fail(ErrorCode::Io, "cannot write " + path.string());
}

int cmd_generate(const Globals& g, const std::string& out) {
    const RunConfig c = load_config(g);
    const auto combos = enumerate_corpus(c.corpus);
    if (combos.empty()) fail(ErrorCode::EmptySpec, "the corpus grid admits no task");
    std::vector<LFTask> tasks;
    tasks.reserve(combos.size());
    for (const auto& combo : combos) tasks.push_back(generate_task(combo));
    write_corpus(out, combos, tasks);
    std::cout << "wrote " << tasks.size() << " tasks to " << out << "\n";
    return kOk;
}

int cmd_label(const Globals& g, const std::string& corpus, const std::string& out) {
    const RunConfig c = load_config(g);
    const auto tasks = read_corpus(corpus);
    const auto labels = label_corpus(tasks, g.seed, c.pipeline.labeling, c.pipeline.threads, g.verbose);
    save_labels(out, labels, g.seed);
    std::size_t ok = 0;
    for (const auto& l : labels.labels) ok += l ? 1 : 0;
    std::cout << "labelled " << ok << " of " << tasks.size() << " tasks into " << out << "\n";
    return kOk;
}

int cmd_train(const Globals& g, const std::string& corpus, const std::string& out, const std::string& labels_path) {
    const RunConfig c = load_config(g);
    const auto tasks = read_corpus(corpus);
    MetaKnowledgeStore store;
    if (labels_path.empty()) {
        store = train_pipeline(tasks, g.seed, c.pipeline);
    } else {
        store = train_store(tasks, load_labels(labels_path), g.seed, c.pipeline);
    }
    save_store(out, store);
    std::cout << "trained on " << store.ids.size() << " tasks (" << store.split.train.size() << " train, "
              << store.split.validation.size() << " validation, " << store.split.test.size()
              << " test); digest " << store_digest(store) << "\n";
    return kOk;
}

int cmd_recommend(const Globals& g, const std::string& store_path, const std::string& csv, const std::string& req_path,
                  std::size_t k, bool no_mask) {
    const RunConfig c = load_config(g);
    const auto store = load_store(store_path);
    auto data = ingest_csv(csv);
    const LFTask task(fs::path(csv).stem().string(), std::move(data.load), std::move(data.weather),
                      read_requirements(req_path));
    const auto t0 = std::chrono::steady_clock::now();
    const auto rec = recommend(store, task, k, !no_mask, c.pipeline.labeling.zoo);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "rank,model_id,model,estimated_accuracy,learner\n";
    for (std::size_t i = 0; i < rec.models.size(); ++i) {
        std::cout << fmt::format("{},{},\"{}\",{:.4f},{}\n", i + 1, model_number(rec.models[i]),
                                 model_name(rec.models[i]), rec.accuracy[i], classifier_name(rec.learner[i]));
    }
    if (g.verbose) std::cerr << fmt::format("recommendation computed in {:.3f} s\n", elapsed);
    return kOk;
}

int cmd_benchmark(const Globals&, const std::string& store_path, const std::string& corpus, const std::string& out) {
    const auto store = load_store(store_path);
    if (!corpus.empty()) {
        const auto ids = read_corpus_index(corpus);
        for (const auto j : store.split.test) {
            if (std::find(ids.begin(), ids.end(), store.ids[j]) == ids.end()) {
                fail(ErrorCode::InvalidArgument, "store task " + store.ids[j] + " is missing from " + corpus);
            }
        }
    }
    const auto report = benchmark_store(store);
    const std::string table = report_table(report);
    std::cout << table;
    if (!out.empty()) {
        fs::create_directories(out);
        write_text(fs::path(out) / "report.txt", table);
        write_text(fs::path(out) / "report.csv", report_csv(report));
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-learning model selection for load forecasting"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--config", g.config, "JSON configuration overlay")->check(CLI::ExistingFile);
    app.add_option("--threads", g.threads, "Worker threads for labeling")->capture_default_str();
    app.add_flag("--verbose,-v", g.verbose, "Progress on stderr");

    std::string out, corpus, labels, store, csv, req, report_dir;
    std::size_t k = 3;
    bool no_mask = false;

    auto* gen = app.add_subcommand("generate", "Write a synthetic task corpus");
    gen->add_option("--out,-o", out, "Corpus directory")->required();

    auto* lab = app.add_subcommand("label", "Label every task of a corpus");
    lab->add_option("--corpus,-c", corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    lab->add_option("--out,-o", out, "Labels JSON file")->required();

    auto* tr = app.add_subcommand("train", "Build the meta-knowledge store");
    tr->add_option("--corpus,-c", corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    tr->add_option("--out,-o", out, "Store JSON file")->required();
    tr->add_option("--labels,-l", labels, "Reuse labels written by 'label'")->check(CLI::ExistingFile);

    auto* rec = app.add_subcommand("recommend", "Rank candidate models for a new task");
    rec->add_option("--store,-s", store, "Store JSON file")->required();
    rec->add_option("--task,-t", csv, "Task CSV (timestamp, load, weather...)")->required()->check(CLI::ExistingFile);
    rec->add_option("--requirements,-r", req, "Requirements file")->required()->check(CLI::ExistingFile);
    rec->add_option("-k", k, "Number of models to list")->capture_default_str()->check(CLI::Range(1, 10));
    rec->add_flag("--no-mask", no_mask, "Keep candidates that cannot run on the task");

    auto* bench = app.add_subcommand("benchmark", "Evaluate the store on its testing partition");
    bench->add_option("--store,-s", store, "Store JSON file")->required();
    bench->add_option("--corpus,-c", corpus, "Corpus directory to cross-check task ids")->check(CLI::ExistingDirectory);
    bench->add_option("--out,-o", report_dir, "Directory for report.txt and report.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) return cmd_generate(g, out);
        if (*lab) return cmd_label(g, corpus, out);
        if (*tr) return cmd_train(g, corpus, out, labels);
        if (*rec) return cmd_recommend(g, store, csv, req, k, no_mask);
        if (*bench) return cmd_benchmark(g, store, corpus, report_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::Config ? kUsage : kData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
