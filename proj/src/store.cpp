#include "lfsel/store.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lfsel/error.hpp"
#include "lfsel/random.hpp"

namespace lfsel {

namespace {

using json = nlohmann::json;
using Eigen::Index;

constexpr std::string_view kStoreFormat = "lfsel-meta-knowledge";
constexpr std::string_view kLabelsFormat = "lfsel-labels";

// Non-finite values (failed models) are written as null and read back as +inf.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json numbers(std::span<const double> v) {
    json a = json::array();
    for (const double x : v) a.push_back(number(x));
    return a;
}

std::vector<double> read_numbers(const json& j) {
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j) v.push_back(read_number(x));
    return v;
}

template <std::size_t N>
std::array<double, N> read_fixed(const json& j) {
    if (j.size() != N) fail(ErrorCode::MalformedRow, "expected an array of " + std::to_string(N) + " numbers");
    std::array<double, N> a{};
    for (std::size_t i = 0; i < N; ++i) a[i] = read_number(j[i]);
    return a;
}

json matrix(const Eigen::MatrixXd& m) {
    json data = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) data.push_back(number(m(r, c)));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd read_matrix(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
        fail(ErrorCode::MalformedRow, "matrix payload does not match its shape");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = read_number(data[k++]);
    }
    return m;
}

ModelId read_model(const json& j) {
    const auto id = model_from_number(j.get<int>());
    if (!id) fail(ErrorCode::MalformedRow, "unknown model number " + j.dump());
    return *id;
}

json classifier_json(const TrainedClassifier& c) {
    json trees = json::array();
    for (const auto& t : c.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.leaf_class}));
        trees.push_back(std::move(nodes));
    }
    return {
        {"kind", classifier_name(c.kind)},
        {"norm", {{"input_dim", c.norm.input_dim}, {"kept", c.norm.kept}, {"mean", c.norm.mean}, {"scale", c.norm.scale}}},
        {"class_counts", c.class_counts},
        {"trees", std::move(trees)},
        {"exemplars", matrix(c.exemplars)},
        {"exemplar_class", c.exemplar_class},
        {"classes", c.classes},
        {"means", matrix(c.means)},
        {"variances", matrix(c.variances)},
        {"precision", matrix(c.precision)},
        {"log_prior", c.log_prior},
    };
}

TrainedClassifier read_classifier(const json& j, const MetaHyper& hyper) {
    TrainedClassifier c;
    c.kind = classifier_from_name(j.at("kind").get<std::string>());
    c.hyper = hyper;
    const auto& n = j.at("norm");
    c.norm.input_dim = n.at("input_dim").get<std::size_t>();
    c.norm.kept = n.at("kept").get<std::vector<std::size_t>>();
    c.norm.mean = n.at("mean").get<std::vector<double>>();
    c.norm.scale = n.at("scale").get<std::vector<double>>();
    if (c.norm.mean.size() != c.norm.kept.size() || c.norm.scale.size() != c.norm.kept.size()) {
        fail(ErrorCode::MalformedRow, "standardiser arrays differ in length");
    }
    c.class_counts = j.at("class_counts").get<std::array<std::size_t, kModelCount>>();
    for (const auto& t : j.at("trees")) {
        DecisionTree tree;
        for (const auto& nd : t) {
            tree.nodes.push_back({nd.at(0).get<int>(), nd.at(1).get<double>(), nd.at(2).get<int>(), nd.at(3).get<int>(),
                                  nd.at(4).get<int>()});
        }
        c.trees.push_back(std::move(tree));
    }
    c.exemplars = read_matrix(j.at("exemplars"));
    c.exemplar_class = j.at("exemplar_class").get<std::vector<int>>();
    c.classes = j.at("classes").get<std::vector<int>>();
    c.means = read_matrix(j.at("means"));
    c.variances = read_matrix(j.at("variances"));
    c.precision = read_matrix(j.at("precision"));
    c.log_prior = j.at("log_prior").get<std::vector<double>>();
    return c;
}

json curve_json(const CalibrationCurve& c) {
    return {
        {"kind", classifier_name(c.kind)},         {"centers", c.centers},     {"accuracy", c.accuracy},
        {"raw_accuracy", c.raw_accuracy},          {"bin_low", c.bin_low},     {"bin_high", c.bin_high},
        {"bin_count", c.bin_count},                {"validation_accuracy", c.validation_accuracy},
    };
}

CalibrationCurve read_curve(const json& j) {
    CalibrationCurve c;
    c.kind = classifier_from_name(j.at("kind").get<std::string>());
    c.centers = j.at("centers").get<std::vector<double>>();
    c.accuracy = j.at("accuracy").get<std::vector<double>>();
    c.raw_accuracy = j.at("raw_accuracy").get<std::vector<double>>();
    c.bin_low = j.at("bin_low").get<std::vector<double>>();
    c.bin_high = j.at("bin_high").get<std::vector<double>>();
    c.bin_count = j.at("bin_count").get<std::vector<std::size_t>>();
    c.validation_accuracy = j.at("validation_accuracy").get<double>();
    if (c.accuracy.size() != c.centers.size() || c.centers.empty()) {
        fail(ErrorCode::MalformedRow, "calibration curve arrays are inconsistent");
    }
    return c;
}

json check_header(const std::string& text, std::string_view format, int version) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedRow, std::string("not a JSON document: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", std::string()) != format) {
        fail(ErrorCode::StoreVersion, "document is not a " + std::string(format) + " file");
    }
    const int v = doc.value("version", -1);
    if (v != version) {
        fail(ErrorCode::StoreVersion, "unsupported " + std::string(format) + " version " + std::to_string(v) +
                                          " (expected " + std::to_string(version) + ")");
    }
    return doc;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

template <typename F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedRow, std::string("malformed document: ") + e.what());
    }
}

}  // namespace

void MetaKnowledgeStore::validate() const {
    const std::size_t j = ids.size();
    if (static_cast<std::size_t>(features.rows()) != j || labels.size() != j || masks.size() != j ||
        static_cast<std::size_t>(z.rmse.cols()) != j || static_cast<std::size_t>(z.mape.cols()) != j) {
        fail(ErrorCode::InvalidArgument, "store row counts are inconsistent");
    }
    if (split.train.size() + split.validation.size() + split.test.size() != j) {
        fail(ErrorCode::InvalidArgument, "store split does not cover the task list");
    }
}

std::string store_to_json(const MetaKnowledgeStore& s) {
    s.validate();
    json splits = {{"train", s.split.train}, {"validation", s.split.validation}, {"test", s.split.test}};
    json labels = json::array();
    for (const auto l : s.labels) labels.push_back(model_number(l));
    json masks = json::array();
    for (const auto& m : s.masks) {
        json row = json::array();
        for (const bool b : m) row.push_back(b ? 1 : 0);
        masks.push_back(std::move(row));
    }
    json classifiers = json::array();
    json curves = json::array();
    for (std::size_t i = 0; i < kLearnerCount; ++i) {
        classifiers.push_back(classifier_json(s.classifiers[i]));
        curves.push_back(curve_json(s.curves[i]));
    }
    const json doc = {
        {"format", kStoreFormat},
        {"version", s.version},
        {"seed", s.seed},
        {"n_bins", s.n_bins},
        {"hyper",
         {{"rf_trees", s.hyper.rf_trees},
          {"rf_max_depth", s.hyper.rf_max_depth},
          {"knn_k", s.hyper.knn_k},
          {"nb_variance_floor", s.hyper.nb_variance_floor},
          {"ld_lambda", s.hyper.ld_lambda}}},
        {"ids", s.ids},
        {"features", matrix(s.features)},
        {"labels", std::move(labels)},
        {"z_rmse", matrix(s.z.rmse)},
        {"z_mape", matrix(s.z.mape)},
        {"masks", std::move(masks)},
        {"split", std::move(splits)},
        {"classifiers", std::move(classifiers)},
        {"curves", std::move(curves)},
    };
    return doc.dump(1) + "\n";
}

MetaKnowledgeStore store_from_json(const std::string& text) {
    const json doc = check_header(text, kStoreFormat, kStoreVersion);
    return guarded([&] {
        MetaKnowledgeStore s;
        s.version = doc.at("version").get<int>();
        s.seed = doc.at("seed").get<std::uint64_t>();
        s.n_bins = doc.at("n_bins").get<std::size_t>();
        const auto& h = doc.at("hyper");
        s.hyper.rf_trees = h.at("rf_trees").get<int>();
        s.hyper.rf_max_depth = h.at("rf_max_depth").get<int>();
        s.hyper.knn_k = h.at("knn_k").get<int>();
        s.hyper.nb_variance_floor = h.at("nb_variance_floor").get<double>();
        s.hyper.ld_lambda = h.at("ld_lambda").get<double>();
        s.ids = doc.at("ids").get<std::vector<std::string>>();
        s.features = read_matrix(doc.at("features"));
        for (const auto& l : doc.at("labels")) s.labels.push_back(read_model(l));
        s.z.rmse = read_matrix(doc.at("z_rmse"));
        s.z.mape = read_matrix(doc.at("z_mape"));
        for (const auto& row : doc.at("masks")) {
            if (row.size() != kModelCount) fail(ErrorCode::MalformedRow, "feasibility mask must have 10 entries");
            FeasibilityMask m{};
            for (std::size_t i = 0; i < kModelCount; ++i) m[i] = row[i].get<int>() != 0;
            s.masks.push_back(m);
        }
        const auto& sp = doc.at("split");
        s.split.train = sp.at("train").get<std::vector<std::size_t>>();
        s.split.validation = sp.at("validation").get<std::vector<std::size_t>>();
        s.split.test = sp.at("test").get<std::vector<std::size_t>>();
        const auto& cl = doc.at("classifiers");
        const auto& cu = doc.at("curves");
        if (cl.size() != kLearnerCount || cu.size() != kLearnerCount) {
            fail(ErrorCode::MalformedRow, "store must hold four classifiers and four curves");
        }
        for (std::size_t i = 0; i < kLearnerCount; ++i) {
            s.classifiers[i] = read_classifier(cl[i], s.hyper);
            s.curves[i] = read_curve(cu[i]);
        }
        try {
            s.validate();
        } catch (const Error& e) {
            fail(ErrorCode::MalformedRow, e.what());
        }
        return s;
    });
}

void save_store(const std::filesystem::path& path, const MetaKnowledgeStore& store) {
    write_file(path, store_to_json(store));
}

MetaKnowledgeStore load_store(const std::filesystem::path& path) { return store_from_json(read_file(path)); }

std::string store_digest(const MetaKnowledgeStore& store) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(store_to_json(store))));
    return buf;
}

std::string labels_to_json(const CorpusLabels& labels, std::uint64_t seed) {
    json tasks = json::array();
    for (std::size_t j = 0; j < labels.ids.size(); ++j) {
        json t = {{"id", labels.ids[j]}};
        if (labels.labels[j]) {
            const auto& l = *labels.labels[j];
            t["phi"] = model_number(l.phi);
            t["iterations"] = l.distribution.iterations;
            t["pcc"] = number(l.distribution.pcc);
            t["stabilized"] = l.stabilized;
            t["omega"] = numbers(l.distribution.omega);
            t["rmse"] = numbers(l.rmse);
            t["mape"] = numbers(l.mape);
            t["fit_time"] = numbers(l.fit_time);
        } else {
            t["phi"] = nullptr;
            t["error"] = labels.errors[j];
        }
        tasks.push_back(std::move(t));
    }
    const json doc = {{"format", kLabelsFormat}, {"version", kLabelsVersion}, {"seed", seed}, {"tasks", std::move(tasks)}};
    return doc.dump(1) + "\n";
}

CorpusLabels labels_from_json(const std::string& text) {
    const json doc = check_header(text, kLabelsFormat, kLabelsVersion);
    return guarded([&] {
        CorpusLabels out;
        const auto& tasks = doc.at("tasks");
        const auto j = static_cast<Index>(tasks.size());
        out.z.rmse = Eigen::MatrixXd::Constant(kModelCount, j, std::numeric_limits<double>::infinity());
        out.z.mape = out.z.rmse;
        Index col = 0;
        for (const auto& t : tasks) {
            out.ids.push_back(t.at("id").get<std::string>());
            if (t.at("phi").is_null()) {
                out.labels.emplace_back();
                out.errors.push_back(t.value("error", std::string("unlabelled")));
            } else {
                TaskLabel l;
                l.phi = read_model(t.at("phi"));
                l.distribution.iterations = t.at("iterations").get<std::size_t>();
                l.distribution.pcc = read_number(t.at("pcc"));
                l.stabilized = t.at("stabilized").get<bool>();
                l.distribution.omega = read_fixed<kModelCount>(t.at("omega"));
                l.rmse = read_fixed<kModelCount>(t.at("rmse"));
                l.mape = read_fixed<kModelCount>(t.at("mape"));
                l.fit_time = read_fixed<kModelCount>(t.at("fit_time"));
                for (std::size_t m = 0; m < kModelCount; ++m) {
                    out.z.rmse(static_cast<Index>(m), col) = l.rmse[m];
                    out.z.mape(static_cast<Index>(m), col) = l.mape[m];
                }
                out.labels.emplace_back(std::move(l));
                out.errors.emplace_back();
            }
            ++col;
        }
        return out;
    });
}

void save_labels(const std::filesystem::path& path, const CorpusLabels& labels, std::uint64_t seed) {
    write_file(path, labels_to_json(labels, seed));
}

CorpusLabels load_labels(const std::filesystem::path& path) { return labels_from_json(read_file(path)); }

}  // namespace lfsel
