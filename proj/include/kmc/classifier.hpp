#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kmc/preprocess.hpp"
#include "kmc/serialize.hpp"

namespace kmc {

enum class Algorithm { NaiveBayes, C45Tree, KNN, SVM, Bagging, AdaBoost, RandomForest };

/// Short identifier used on the command line and in files ("svm", "c45", ...).
std::string_view algorithm_id(Algorithm a);
/// Label used in comparison tables ("SVM", "C4.5DecisionTree", ...).
std::string_view algorithm_label(Algorithm a);
/// Accepts ids and labels, case-insensitively.
Algorithm parse_algorithm(std::string_view name);
/// Table order: SVM, C4.5, NaiveBayes, K-NN, Bagging, AdaBoost, RandomForest.
const std::vector<Algorithm>& all_algorithms();

using Hyperparameters = std::map<std::string, std::string>;

struct ClassifierSpec {
    Algorithm algorithm = Algorithm::NaiveBayes;
    Hyperparameters hyperparameters;
    std::uint64_t seed = 0;

    bool operator==(const ClassifierSpec&) const = default;
};

/// Default hyperparameters of an algorithm.
Hyperparameters default_hyperparameters(Algorithm a);
/// The spec's hyperparameters merged over the defaults. Unknown keys and
/// unparsable values are rejected.
Hyperparameters resolved_hyperparameters(const ClassifierSpec& spec);

/// Labeled encoded training data. `layout` tells learners which coordinates
/// form one-hot blocks; defaults to all-numeric when left empty.
struct TrainingSet {
    std::span<const Vector> X;
    std::span<const std::size_t> y;
    std::size_t class_count = 2;
    FeatureLayout layout;

    std::size_t dimension() const { return X.empty() ? 0 : X.front().size(); }
    FeatureLayout effective_layout() const;
};

/// Probability of the target class in a constant predictor.
inline constexpr double kConstantConfidence = 1.0 - 1e-9;

/// Fitted classifier. Immutable after fit; prediction is const and thread-safe.
class Classifier {
public:
    virtual ~Classifier() = default;

    /// Non-negative, sums to 1. Throws on dimension mismatch.
    std::vector<double> predict_proba(std::span<const double> x) const;
    /// argmax of predict_proba, ties -> lowest class index.
    std::size_t predict(std::span<const double> x) const;

    std::size_t class_count() const { return class_count_; }
    std::size_t dimension() const { return dimension_; }
    const ClassifierSpec& spec() const { return spec_; }

    /// Identifies the concrete model type in saved files.
    virtual std::string_view kind() const = 0;
    virtual void save_state(io::Writer& w) const = 0;

protected:
    Classifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension)
        : spec_(std::move(spec)), class_count_(class_count), dimension_(dimension) {}

    virtual std::vector<double> compute_proba(std::span<const double> x) const = 0;

private:
    ClassifierSpec spec_;
    std::size_t class_count_;
    std::size_t dimension_;
};

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> p);

/// Fit the algorithm named by `spec`. Single-class data yields a constant
/// predictor. Throws on empty input, size mismatch or non-finite values.
std::unique_ptr<Classifier> fit(const ClassifierSpec& spec, const TrainingSet& data);

void save_classifier(io::Writer& w, const Classifier& model);
std::unique_ptr<Classifier> load_classifier(io::Reader& r);

}  // namespace kmc
