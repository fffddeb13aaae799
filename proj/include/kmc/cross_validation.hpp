#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kmc/cascade.hpp"
#include "kmc/dataset.hpp"
#include "kmc/metrics.hpp"

namespace kmc {

/// Fits a model on a training fold. The seed is derived per fold.
using Trainer = std::function<std::unique_ptr<Predictor>(const Dataset& train, std::uint64_t seed)>;

struct CrossValidationOptions {
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::size_t positive = 0;
};

/// Test indices per fold, each ascending. Per class, indices are shuffled,
/// classes are concatenated in index order and position p goes to fold p mod k.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const std::size_t> labels, std::size_t class_count,
                                                       std::size_t folds, std::uint64_t seed);

/// Seed handed to the trainer for fold `fold`.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

struct Prediction {
    std::size_t index = 0;
    std::size_t fold = 0;
    std::size_t truth = 0;
    std::size_t predicted = 0;
    std::vector<double> proba;
    /// Training-fold class priors.
    std::vector<double> prior;
    std::optional<std::size_t> cluster;
};

struct FoldReport {
    std::size_t fold = 0;
    std::size_t train_n = 0;
    std::size_t test_n = 0;
    MetricsReport metrics;
};

struct ClusterReport {
    std::size_t cluster = 0;
    MetricsReport metrics;
};

struct CrossValidationReport {
    std::size_t folds_requested = 0;
    std::size_t folds_used = 0;
    bool leave_one_out = false;
    std::uint64_t seed = 0;
    /// Metrics of the pooled predictions (headline numbers).
    MetricsReport pooled;
    /// Mean of per-fold metrics.
    MetricsReport macro;
    std::vector<FoldReport> folds;
    /// Pooled test predictions grouped by the cluster that handled them.
    std::vector<ClusterReport> per_cluster;
    /// Ordered by instance index.
    std::vector<Prediction> predictions;
    std::vector<std::string> flags;
};

/// Stratified k-fold CV. folds == n runs leave-one-out; otherwise folds larger
/// than the smallest class are reduced to it and flagged.
CrossValidationReport cross_validate(const Trainer& trainer, const Dataset& ds, const CrossValidationOptions& options = {});

/// Trainer that fits a cascade (or flat pipeline) with the fold seed driving
/// both the clustering and the classifier.
Trainer cascade_trainer(CascadeSpec spec);

}  // namespace kmc
