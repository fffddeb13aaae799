#pragma once

// Loading hooks for concrete learners (internal).

#include <memory>

#include "kmc/classifier.hpp"

namespace kmc::detail {

struct ModelHeader {
    ClassifierSpec spec;
    std::size_t class_count = 0;
    std::size_t dimension = 0;
};

std::unique_ptr<Classifier> load_constant(io::Reader& r, const ModelHeader& h);
std::unique_ptr<Classifier> load_naive_bayes(io::Reader& r, const ModelHeader& h);
std::unique_ptr<Classifier> load_tree(io::Reader& r, const ModelHeader& h);
std::unique_ptr<Classifier> load_knn(io::Reader& r, const ModelHeader& h);
std::unique_ptr<Classifier> load_svm(io::Reader& r, const ModelHeader& h);
std::unique_ptr<Classifier> load_vote(io::Reader& r, const ModelHeader& h);
std::unique_ptr<Classifier> load_adaboost(io::Reader& r, const ModelHeader& h);

/// Typed access to resolved hyperparameters.
class Params {
public:
    explicit Params(const ClassifierSpec& spec) : values_(resolved_hyperparameters(spec)) {}
    double real(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    const std::string& text(const std::string& key) const;

private:
    Hyperparameters values_;
};

}  // namespace kmc::detail
