#include "kmc/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "kmc/error.hpp"
#include "kmc/learners.hpp"
#include "learner_io.hpp"

namespace kmc {
namespace {

struct AlgorithmInfo {
    Algorithm algorithm;
    std::string_view id;
    std::string_view label;
};

constexpr AlgorithmInfo kAlgorithms[] = {
    {Algorithm::SVM, "svm", "SVM"},
    {Algorithm::C45Tree, "c45", "C4.5DecisionTree"},
    {Algorithm::NaiveBayes, "naive_bayes", "NaiveBayes"},
    {Algorithm::KNN, "knn", "K-NN"},
    {Algorithm::Bagging, "bagging", "Bagging"},
    {Algorithm::AdaBoost, "adaboost", "AdaBoost"},
    {Algorithm::RandomForest, "random_forest", "RandomForest"},
};

const AlgorithmInfo& info(Algorithm a) {
    for (const auto& i : kAlgorithms) {
        if (i.algorithm == a) return i;
    }
    throw Error("unknown algorithm");
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

bool parses_real(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

bool parses_count(const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

void validate_value(Algorithm a, const std::string& key, const std::string& value) {
    const std::string where = std::string(algorithm_id(a)) + " hyperparameter '" + key + "'";
    if (key == "base") {
        const Algorithm base = parse_algorithm(value);
        if (base == Algorithm::Bagging || base == Algorithm::AdaBoost || base == Algorithm::RandomForest) {
            throw Error(where + ": base learner must not be an ensemble");
        }
        return;
    }
    const bool is_count = key == "k" || key == "min_leaf" || key == "iterations" || key == "trees" ||
                          key == "features" || key == "max_iter";
    if (is_count) {
        if (!parses_count(value)) throw Error(where + ": expected a non-negative integer, got '" + value + "'");
        if ((key == "k" || key == "iterations" || key == "trees" || key == "min_leaf" || key == "max_iter") &&
            std::stoull(value) == 0) {
            throw Error(where + ": must be positive");
        }
        return;
    }
    if (!parses_real(value)) throw Error(where + ": expected a number, got '" + value + "'");
    if (std::stod(value) <= 0.0) throw Error(where + ": must be positive");
}

}  // namespace

std::string_view algorithm_id(Algorithm a) { return info(a).id; }
std::string_view algorithm_label(Algorithm a) { return info(a).label; }

Algorithm parse_algorithm(std::string_view name) {
    const std::string n = lower(name);
    for (const auto& i : kAlgorithms) {
        if (n == i.id || n == lower(i.label)) return i.algorithm;
    }
    if (n == "nb" || n == "naivebayes") return Algorithm::NaiveBayes;
    if (n == "c4.5" || n == "j48" || n == "tree") return Algorithm::C45Tree;
    if (n == "k-nn" || n == "ibk") return Algorithm::KNN;
    if (n == "randomforest" || n == "rf") return Algorithm::RandomForest;
    throw Error("unknown classifier '" + std::string(name) + "'");
}

const std::vector<Algorithm>& all_algorithms() {
    static const std::vector<Algorithm> all = [] {
        std::vector<Algorithm> v;
        for (const auto& i : kAlgorithms) v.push_back(i.algorithm);
        return v;
    }();
    return all;
}

Hyperparameters default_hyperparameters(Algorithm a) {
    switch (a) {
        case Algorithm::NaiveBayes: return {{"var_floor", "1e-09"}};
        case Algorithm::C45Tree: return {{"min_leaf", "2"}};
        case Algorithm::KNN: return {{"k", "3"}};
        case Algorithm::SVM: return {{"C", "1"}, {"tol", "0.001"}, {"max_iter", "1000000"}};
        case Algorithm::Bagging: return {{"iterations", "10"}, {"base", "c45"}};
        case Algorithm::AdaBoost: return {{"iterations", "10"}};
        case Algorithm::RandomForest: return {{"trees", "10"}, {"features", "0"}, {"min_leaf", "2"}};
    }
    throw Error("unknown algorithm");
}

Hyperparameters resolved_hyperparameters(const ClassifierSpec& spec) {
    Hyperparameters out = default_hyperparameters(spec.algorithm);
    for (const auto& [key, value] : spec.hyperparameters) {
        const auto it = out.find(key);
        if (it == out.end()) {
            throw Error("unknown hyperparameter '" + key + "' for " + std::string(algorithm_id(spec.algorithm)));
        }
        validate_value(spec.algorithm, key, value);
        it->second = value;
    }
    return out;
}

namespace detail {

double Params::real(const std::string& key) const { return std::stod(values_.at(key)); }
std::size_t Params::count(const std::string& key) const { return static_cast<std::size_t>(std::stoull(values_.at(key))); }
const std::string& Params::text(const std::string& key) const { return values_.at(key); }

}  // namespace detail

FeatureLayout TrainingSet::effective_layout() const {
    if (layout.dimension == 0 && layout.blocks.empty()) return FeatureLayout::all_numeric(dimension());
    return layout;
}

std::size_t argmax(std::span<const double> p) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.size(); ++c) {
        if (p[c] > p[best]) best = c;
    }
    return best;
}

std::vector<double> Classifier::predict_proba(std::span<const double> x) const {
    if (x.size() != dimension_) {
        throw Error("predict: vector has length " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(dimension_));
    }
    return compute_proba(x);
}

std::size_t Classifier::predict(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return argmax(p);
}

std::unique_ptr<Classifier> fit(const ClassifierSpec& spec, const TrainingSet& data) {
    if (data.X.empty()) throw Error("fit: empty training set");
    if (data.X.size() != data.y.size()) throw Error("fit: X and y differ in length");
    if (data.class_count < 1) throw Error("fit: class_count must be positive");
    const std::size_t dim = data.dimension();
    for (const auto& x : data.X) {
        if (x.size() != dim) throw Error("fit: vectors differ in length");
        for (double v : x) {
            if (!std::isfinite(v)) throw Error("fit: non-finite value in training data");
        }
    }
    for (std::size_t label : data.y) {
        if (label >= data.class_count) throw Error("fit: label out of range");
    }
    const auto layout = data.effective_layout();
    if (layout.dimension != dim) throw Error("fit: feature layout does not match vector length");
    resolved_hyperparameters(spec);

    const bool single_class =
        std::all_of(data.y.begin(), data.y.end(), [&](std::size_t l) { return l == data.y.front(); });
    if (single_class) return std::make_unique<ConstantClassifier>(spec, data.class_count, dim, data.y.front());

    switch (spec.algorithm) {
        case Algorithm::NaiveBayes: return std::make_unique<NaiveBayesClassifier>(fit_naive_bayes(spec, data));
        case Algorithm::C45Tree: return std::make_unique<DecisionTreeClassifier>(fit_c45_tree(spec, data));
        case Algorithm::KNN: return std::make_unique<KnnClassifier>(fit_knn(spec, data));
        case Algorithm::SVM: return std::make_unique<LinearSvmClassifier>(fit_svm(spec, data));
        case Algorithm::Bagging: return std::make_unique<VotingEnsemble>(fit_bagging(spec, data));
        case Algorithm::AdaBoost: return std::make_unique<AdaBoostClassifier>(fit_adaboost(spec, data));
        case Algorithm::RandomForest: return std::make_unique<VotingEnsemble>(fit_random_forest(spec, data));
    }
    throw Error("fit: unknown algorithm");
}

// ---------------------------------------------------------------------------

ConstantClassifier::ConstantClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension,
                                       std::size_t target)
    : Classifier(std::move(spec), class_count, dimension), target_(target) {}

std::vector<double> ConstantClassifier::compute_proba(std::span<const double>) const {
    if (class_count() == 1) return {1.0};
    std::vector<double> p(class_count(), (1.0 - kConstantConfidence) / static_cast<double>(class_count() - 1));
    p[target_] = kConstantConfidence;
    return p;
}

void ConstantClassifier::save_state(io::Writer& w) const { w.u64(target_).newline(); }

namespace detail {
std::unique_ptr<Classifier> load_constant(io::Reader& r, const ModelHeader& h) {
    return std::make_unique<ConstantClassifier>(h.spec, h.class_count, h.dimension, r.size());
}
}  // namespace detail

// ---------------------------------------------------------------------------

void save_classifier(io::Writer& w, const Classifier& model) {
    const ClassifierSpec& spec = model.spec();
    w.tag("classifier").tag(model.kind()).tag(algorithm_id(spec.algorithm)).u64(spec.seed);
    w.u64(spec.hyperparameters.size());
    for (const auto& [k, v] : spec.hyperparameters) w.str(k).str(v);
    w.u64(model.class_count()).u64(model.dimension()).newline();
    model.save_state(w);
}

std::unique_ptr<Classifier> load_classifier(io::Reader& r) {
    r.expect("classifier");
    const std::string kind = r.token();
    detail::ModelHeader h;
    h.spec.algorithm = parse_algorithm(r.token());
    h.spec.seed = r.u64();
    const std::size_t hp = r.size();
    for (std::size_t i = 0; i < hp; ++i) {
        std::string key = r.str();
        h.spec.hyperparameters[key] = r.str();
    }
    h.class_count = r.size();
    h.dimension = r.size();
    if (kind == "constant") return detail::load_constant(r, h);
    if (kind == "naive_bayes") return detail::load_naive_bayes(r, h);
    if (kind == "tree") return detail::load_tree(r, h);
    if (kind == "knn") return detail::load_knn(r, h);
    if (kind == "svm") return detail::load_svm(r, h);
    if (kind == "vote") return detail::load_vote(r, h);
    if (kind == "adaboost") return detail::load_adaboost(r, h);
    throw Error("model file corrupt: unknown classifier kind '" + kind + "'");
}

}  // namespace kmc
