#include "kmc/cascade.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kmc/error.hpp"
#include "kmc/learners.hpp"

namespace kmc {
namespace {

constexpr std::string_view kMagic = "kmc-pipeline";

// Reorders clusters by (majority class, original index).
KMeansModel canonical_order(KMeansModel km) {
    std::vector<std::size_t> order(km.k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return km.cluster_class[a] < km.cluster_class[b]; });
    std::vector<std::size_t> new_id(km.k);
    for (std::size_t pos = 0; pos < km.k; ++pos) new_id[order[pos]] = pos;
    KMeansModel out = km;
    for (std::size_t pos = 0; pos < km.k; ++pos) {
        out.centroids[pos] = km.centroids[order[pos]];
        out.cluster_class[pos] = km.cluster_class[order[pos]];
        out.empty_cluster[pos] = km.empty_cluster[order[pos]];
    }
    for (auto& a : out.assignment) a = new_id[a];
    return out;
}

void save_schema(io::Writer& w, const Schema& s) {
    w.tag("schema").u64(s.attributes.size()).u64(s.class_index).newline();
    for (const auto& a : s.attributes) {
        w.str(a.name).tag(a.kind == AttributeKind::Numeric ? "N" : "C").u64(a.categories.size());
        for (const auto& c : a.categories) w.str(c);
        w.newline();
    }
}

Schema load_schema(io::Reader& r) {
    r.expect("schema");
    Schema s;
    s.attributes.resize(r.size());
    s.class_index = r.size();
    for (auto& a : s.attributes) {
        a.name = r.str();
        a.kind = r.token() == "N" ? AttributeKind::Numeric : AttributeKind::Categorical;
        a.categories.resize(r.size());
        for (auto& c : a.categories) c = r.str();
    }
    s.validate();
    return s;
}

void save_spec(io::Writer& w, const CascadeSpec& spec) {
    w.tag("spec").tag(cascade_mode_id(spec.mode)).u64(spec.k).u64(spec.seed).u64(spec.max_iter);
    w.tag(algorithm_id(spec.classifier.algorithm)).u64(spec.classifier.seed);
    w.u64(spec.classifier.hyperparameters.size());
    for (const auto& [k, v] : spec.classifier.hyperparameters) w.str(k).str(v);
    w.newline();
}

CascadeSpec load_spec(io::Reader& r) {
    r.expect("spec");
    CascadeSpec spec;
    spec.mode = parse_cascade_mode(r.token());
    spec.k = r.size();
    spec.seed = r.u64();
    spec.max_iter = r.size();
    spec.classifier.algorithm = parse_algorithm(r.token());
    spec.classifier.seed = r.u64();
    const std::size_t hp = r.size();
    for (std::size_t i = 0; i < hp; ++i) {
        std::string key = r.str();
        spec.classifier.hyperparameters[key] = r.str();
    }
    return spec;
}

void write_section(std::ostream& out, std::string_view name, const std::string& payload) {
    out << "section " << name << ' ' << payload.size() << '\n' << payload << '\n';
}

std::string read_section(std::istream& in, std::string_view name) {
    std::string word, got;
    std::size_t len = 0;
    if (!(in >> word >> got >> len) || word != "section") throw Error("pipeline file corrupt: section header expected");
    if (got != name) throw Error("pipeline file corrupt: expected section '" + std::string(name) + "', found '" + got + "'");
    if (in.get() != '\n') throw Error("pipeline file corrupt: bad section header");
    std::string payload(len, '\0');
    if (!in.read(payload.data(), static_cast<std::streamsize>(len))) throw Error("pipeline file truncated");
    if (in.get() != '\n') throw Error("pipeline file corrupt: section terminator");
    return payload;
}

}  // namespace

std::string_view cascade_mode_id(CascadeMode m) {
    switch (m) {
        case CascadeMode::PerCluster: return "per-cluster";
        case CascadeMode::Relabel: return "relabel";
        case CascadeMode::Flat: return "flat";
    }
    return "?";
}

CascadeMode parse_cascade_mode(std::string_view s) {
    if (s == "per-cluster" || s == "percluster" || s == "per_cluster") return CascadeMode::PerCluster;
    if (s == "relabel") return CascadeMode::Relabel;
    if (s == "flat") return CascadeMode::Flat;
    throw Error("unknown cascade mode '" + std::string(s) + "' (expected per-cluster, relabel or flat)");
}

CascadeModel cascade_fit(const CascadeSpec& spec, const Dataset& ds) {
    if (spec.k < 1) throw Error("cascade: k must be at least 1");
    if (ds.class_count() != 2) throw Error("cascade: a two-class dataset is required");
    if (spec.mode != CascadeMode::Flat && ds.n() < spec.k) throw Error("cascade: fewer instances than clusters");

    CascadeModel model;
    model.spec_ = spec;
    model.schema_ = ds.schema();
    model.preprocess_ = fit_preprocess(ds);
    const std::vector<Vector> X = model.preprocess_.transform(ds);
    const std::vector<std::size_t> y = ds.labels();
    const std::size_t classes = ds.class_count();
    const FeatureLayout& layout = model.preprocess_.layout();

    if (spec.mode == CascadeMode::Flat) {
        model.classifiers_.push_back(fit(spec.classifier, TrainingSet{X, y, classes, layout}));
        model.training_targets_ = y;
        return model;
    }

    KMeansModel km = kmeans_fit(X, KMeansOptions{spec.k, spec.seed, spec.max_iter});
    km = canonical_order(assign_cluster_labels(std::move(km), y, classes));

    if (spec.mode == CascadeMode::PerCluster) {
        model.training_targets_ = y;
        for (std::size_t j = 0; j < km.k; ++j) {
            std::vector<Vector> Xj;
            std::vector<std::size_t> yj;
            for (std::size_t i = 0; i < X.size(); ++i) {
                if (km.assignment[i] == j) {
                    Xj.push_back(X[i]);
                    yj.push_back(y[i]);
                }
            }
            if (Xj.empty()) {
                model.classifiers_.push_back(std::make_unique<ConstantClassifier>(spec.classifier, classes,
                                                                                  layout.dimension, km.cluster_class[j]));
            } else {
                model.classifiers_.push_back(fit(spec.classifier, TrainingSet{Xj, yj, classes, layout}));
            }
        }
    } else {
        std::vector<std::size_t> relabeled(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) relabeled[i] = km.cluster_class[km.assignment[i]];
        model.classifiers_.push_back(fit(spec.classifier, TrainingSet{X, relabeled, classes, layout}));
        model.training_targets_ = std::move(relabeled);
    }
    model.router_ = std::move(km);
    return model;
}

const Classifier& CascadeModel::classifier_for(std::span<const double> encoded) const {
    if (spec_.mode == CascadeMode::PerCluster) return *classifiers_.at(kmeans_assign(*router_, encoded));
    return *classifiers_.front();
}

std::vector<double> CascadeModel::predict_proba(const Instance& inst) const {
    const Vector v = preprocess_.transform(inst);
    return classifier_for(v).predict_proba(v);
}

std::optional<std::size_t> CascadeModel::route(const Instance& inst) const {
    if (!router_) return std::nullopt;
    return kmeans_assign(*router_, preprocess_.transform(inst));
}

void CascadeModel::save(std::ostream& out) const {
    out << kMagic << ' ' << kPipelineFormatVersion << '\n';
    const auto section = [&](std::string_view name, auto&& body) {
        io::Writer w;
        body(w);
        write_section(out, name, w.take());
    };
    section("schema", [&](io::Writer& w) { save_schema(w, schema_); });
    section("spec", [&](io::Writer& w) { save_spec(w, spec_); });
    section("preprocess", [&](io::Writer& w) { preprocess_.save(w); });
    if (router_) section("kmeans", [&](io::Writer& w) { router_->save(w); });
    section("classifiers", [&](io::Writer& w) {
        w.tag("classifiers").u64(classifiers_.size()).newline();
        for (const auto& c : classifiers_) save_classifier(w, *c);
    });
    out << "end\n";
}

void CascadeModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    save(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

CascadeModel CascadeModel::load(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic) || magic != kMagic) throw Error("not a pipeline file");
    if (!(in >> version)) throw Error("pipeline file corrupt: missing version");
    if (version != kPipelineFormatVersion) {
        throw VersionError("pipeline file format version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kPipelineFormatVersion) + ")");
    }
    if (in.get() != '\n') throw Error("pipeline file corrupt: header");

    CascadeModel m;
    {
        io::Reader r(read_section(in, "schema"));
        m.schema_ = load_schema(r);
    }
    {
        io::Reader r(read_section(in, "spec"));
        m.spec_ = load_spec(r);
    }
    {
        io::Reader r(read_section(in, "preprocess"));
        m.preprocess_ = PreprocessModel::load(r);
    }
    if (m.spec_.mode != CascadeMode::Flat) {
        io::Reader r(read_section(in, "kmeans"));
        m.router_ = KMeansModel::load(r);
    }
    {
        io::Reader r(read_section(in, "classifiers"));
        r.expect("classifiers");
        const std::size_t count = r.size();
        for (std::size_t i = 0; i < count; ++i) m.classifiers_.push_back(load_classifier(r));
    }
    std::string end;
    if (!(in >> end) || end != "end") throw Error("pipeline file corrupt: missing end marker");
    const std::size_t expected = m.spec_.mode == CascadeMode::PerCluster ? m.router_->k : 1;
    if (m.classifiers_.size() != expected) throw Error("pipeline file corrupt: classifier count");
    return m;
}

CascadeModel CascadeModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file '" + path.string() + "'");
    return load(in);
}

}  // namespace kmc
