#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "kmc/classifier.hpp"
#include "kmc/dataset.hpp"
#include "kmc/kmeans.hpp"
#include "kmc/preprocess.hpp"

namespace kmc {

/// Anything that maps an instance to class probabilities.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::vector<double> predict_proba(const Instance& inst) const = 0;
    std::size_t predict(const Instance& inst) const { return argmax(predict_proba(inst)); }
    /// Cluster that handles the instance, for routed models.
    virtual std::optional<std::size_t> route(const Instance&) const { return std::nullopt; }
};

enum class CascadeMode {
    /// One classifier per K-means cluster, trained on that cluster's members.
    PerCluster,
    /// One classifier trained on all instances relabeled with their cluster's majority class.
    Relabel,
    /// No clustering stage: preprocess then a single classifier.
    Flat,
};

std::string_view cascade_mode_id(CascadeMode m);
CascadeMode parse_cascade_mode(std::string_view s);

struct CascadeSpec {
    std::size_t k = 2;
    CascadeMode mode = CascadeMode::PerCluster;
    ClassifierSpec classifier;
    /// Seeds K-means initialization.
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;

    bool operator==(const CascadeSpec&) const = default;
};

/// Preprocess -> K-means router -> classifier(s).
///
/// Clusters are stored in canonical order: ascending majority class, then
/// ascending original K-means index, so cluster ids line up with class ids
/// across independently fitted folds when clusters follow the classes.
class CascadeModel final : public Predictor {
public:
    const CascadeSpec& spec() const { return spec_; }
    const Schema& schema() const { return schema_; }
    const PreprocessModel& preprocess() const { return preprocess_; }
    /// Absent in Flat mode.
    const std::optional<KMeansModel>& router() const { return router_; }
    const std::vector<std::unique_ptr<Classifier>>& classifiers() const { return classifiers_; }
    /// Labels each classifier was trained with, aligned with the training set.
    /// Not persisted; empty after load.
    const std::vector<std::size_t>& training_targets() const { return training_targets_; }

    std::vector<double> predict_proba(const Instance& inst) const override;
    std::optional<std::size_t> route(const Instance& inst) const override;
    /// Classifier that handles an encoded vector.
    const Classifier& classifier_for(std::span<const double> encoded) const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static CascadeModel load(std::istream& in);
    static CascadeModel load(const std::filesystem::path& path);

private:
    friend CascadeModel cascade_fit(const CascadeSpec& spec, const Dataset& ds);

    CascadeSpec spec_;
    Schema schema_;
    PreprocessModel preprocess_;
    std::optional<KMeansModel> router_;
    std::vector<std::unique_ptr<Classifier>> classifiers_;
    std::vector<std::size_t> training_targets_;
};

CascadeModel cascade_fit(const CascadeSpec& spec, const Dataset& ds);

/// Pipeline file format version written by CascadeModel::save.
inline constexpr int kPipelineFormatVersion = 1;

}  // namespace kmc
