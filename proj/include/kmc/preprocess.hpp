#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kmc/dataset.hpp"
#include "kmc/serialize.hpp"

namespace kmc {

using Vector = std::vector<double>;

/// A contiguous run of encoded coordinates produced by one attribute.
struct FeatureBlock {
    AttributeKind kind = AttributeKind::Numeric;
    std::size_t offset = 0;
    std::size_t width = 1;

    bool operator==(const FeatureBlock&) const = default;
};

/// Encoded-vector layout; lets learners treat one-hot blocks as one variable.
struct FeatureLayout {
    std::vector<FeatureBlock> blocks;
    std::size_t dimension = 0;

    /// Every coordinate its own numeric block.
    static FeatureLayout all_numeric(std::size_t dimension);

    bool operator==(const FeatureLayout&) const = default;
};

/// Imputation, min-max scaling and one-hot encoding fitted on one dataset.
class PreprocessModel {
public:
    struct NumericStats {
        double mean = 0.0;
        double min = 0.0;
        double max = 0.0;
        bool operator==(const NumericStats&) const = default;
    };
    struct CategoricalStats {
        std::size_t mode = 0;
        /// slot[category] = position inside the one-hot block, or -1 if unseen in fit.
        std::vector<long> slot;
        bool operator==(const CategoricalStats&) const = default;
    };
    struct Feature {
        std::string name;
        AttributeKind kind = AttributeKind::Numeric;
        NumericStats numeric;
        CategoricalStats categorical;
        FeatureBlock block;
        bool operator==(const Feature&) const = default;
    };

    const std::vector<Feature>& features() const { return features_; }
    const FeatureLayout& layout() const { return layout_; }
    std::size_t dimension() const { return layout_.dimension; }

    /// Encoded vector of length dimension(); throws on schema mismatch.
    Vector transform(const Instance& inst) const;
    std::vector<Vector> transform(const Dataset& ds) const;

    void save(io::Writer& w) const;
    static PreprocessModel load(io::Reader& r);

    bool operator==(const PreprocessModel&) const = default;

private:
    friend PreprocessModel fit_preprocess(const Dataset& ds);

    std::vector<Feature> features_;
    FeatureLayout layout_;
};

/// Fit statistics on `ds` only. Throws if a column has no observed value.
PreprocessModel fit_preprocess(const Dataset& ds);

/// Deviation tag recorded in reports.
inline constexpr const char* kPreprocessTag = "preprocess: minmax+onehot";

}  // namespace kmc
