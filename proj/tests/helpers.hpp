#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kmc/classifier.hpp"
#include "kmc/dataset.hpp"
#include "kmc/preprocess.hpp"
#include "kmc/synth.hpp"

namespace th {

inline kmc::Schema numeric_schema(std::size_t d) {
    kmc::Schema s;
    for (std::size_t f = 0; f < d; ++f) s.attributes.push_back({"x" + std::to_string(f), kmc::AttributeKind::Numeric, {}});
    s.attributes.push_back({"class", kmc::AttributeKind::Categorical, {"A", "B"}});
    s.class_index = d;
    return s;
}

inline kmc::Dataset numeric_dataset(const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& y) {
    std::vector<kmc::Instance> rows;
    for (std::size_t i = 0; i < X.size(); ++i) {
        kmc::Instance inst;
        for (double v : X[i]) inst.values.emplace_back(v);
        inst.label = y[i];
        rows.push_back(std::move(inst));
    }
    return kmc::Dataset(numeric_schema(X.front().size()), std::move(rows));
}

inline kmc::TrainingSet training(const std::vector<kmc::Vector>& X, const std::vector<std::size_t>& y) {
    return kmc::TrainingSet{X, y, 2, {}};
}

inline kmc::Dataset tb(std::size_t n, std::uint64_t seed, double separation = 3.0, double skew = 0.9,
                       double missing = 0.0) {
    kmc::SynthSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.separation = separation;
    spec.categorical_skew = skew;
    spec.missing_rate = missing;
    return kmc::generate(spec);
}

/// Dataset of categorical features; rows[i][f] indexes "v0", "v1", ...
inline kmc::Dataset categorical_dataset(const std::vector<std::vector<std::size_t>>& rows,
                                        const std::vector<std::size_t>& labels, const std::vector<std::size_t>& arity) {
    kmc::Schema s;
    for (std::size_t f = 0; f < arity.size(); ++f) {
        kmc::AttributeSpec a{"f" + std::to_string(f), kmc::AttributeKind::Categorical, {}};
        for (std::size_t v = 0; v < arity[f]; ++v) a.categories.push_back("v" + std::to_string(v));
        s.attributes.push_back(a);
    }
    s.attributes.push_back({"class", kmc::AttributeKind::Categorical, {"A", "B"}});
    s.class_index = arity.size();
    std::vector<kmc::Instance> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        kmc::Instance inst;
        for (std::size_t v : rows[i]) inst.values.emplace_back(kmc::Category{v});
        inst.label = labels[i];
        out.push_back(inst);
    }
    return kmc::Dataset(s, out);
}

/// A dataset run through a preprocess model fitted on itself.
struct Encoded {
    kmc::PreprocessModel pm;
    std::vector<kmc::Vector> X;
    std::vector<std::size_t> y;
    kmc::TrainingSet set() const { return kmc::TrainingSet{X, y, 2, pm.layout()}; }
};

inline Encoded encode(const kmc::Dataset& ds) {
    Encoded e;
    e.pm = kmc::fit_preprocess(ds);
    e.X = e.pm.transform(ds);
    e.y = ds.labels();
    return e;
}

/// Fresh directory under the build tree's temp area.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("kmc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace th
