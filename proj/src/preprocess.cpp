#include "kmc/preprocess.hpp"

#include <algorithm>

#include "kmc/error.hpp"

namespace kmc {

FeatureLayout FeatureLayout::all_numeric(std::size_t dimension) {
    FeatureLayout layout;
    layout.dimension = dimension;
    for (std::size_t i = 0; i < dimension; ++i) layout.blocks.push_back({AttributeKind::Numeric, i, 1});
    return layout;
}

PreprocessModel fit_preprocess(const Dataset& ds) {
    if (ds.n() == 0) throw Error("fit_preprocess: empty dataset");
    PreprocessModel model;
    std::size_t offset = 0;
    for (std::size_t f = 0; f < ds.d(); ++f) {
        const AttributeSpec& attr = ds.schema().feature(f);
        PreprocessModel::Feature feat;
        feat.name = attr.name;
        feat.kind = attr.kind;
        if (attr.kind == AttributeKind::Numeric) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& inst : ds.instances()) {
                if (const double* v = std::get_if<double>(&inst.values[f])) {
                    if (count == 0) {
                        feat.numeric.min = feat.numeric.max = *v;
                    } else {
                        feat.numeric.min = std::min(feat.numeric.min, *v);
                        feat.numeric.max = std::max(feat.numeric.max, *v);
                    }
                    sum += *v;
                    ++count;
                }
            }
            if (count == 0) throw Error("fit_preprocess: column '" + attr.name + "' is entirely missing");
            feat.numeric.mean = sum / static_cast<double>(count);
            feat.block = {AttributeKind::Numeric, offset, 1};
        } else {
            std::vector<std::size_t> counts(attr.categories.size(), 0);
            for (const auto& inst : ds.instances()) {
                if (const Category* c = std::get_if<Category>(&inst.values[f])) ++counts[c->index];
            }
            // max_element returns the first maximum, i.e. the lowest category index on ties.
            const auto best = std::max_element(counts.begin(), counts.end());
            if (best == counts.end() || *best == 0) {
                throw Error("fit_preprocess: column '" + attr.name + "' is entirely missing");
            }
            feat.categorical.mode = static_cast<std::size_t>(best - counts.begin());
            feat.categorical.slot.assign(counts.size(), -1);
            long width = 0;
            for (std::size_t c = 0; c < counts.size(); ++c) {
                if (counts[c] > 0) feat.categorical.slot[c] = width++;
            }
            feat.block = {AttributeKind::Categorical, offset, static_cast<std::size_t>(width)};
        }
        offset += feat.block.width;
        model.layout_.blocks.push_back(feat.block);
        model.features_.push_back(std::move(feat));
    }
    model.layout_.dimension = offset;
    return model;
}

Vector PreprocessModel::transform(const Instance& inst) const {
    if (inst.values.size() != features_.size()) {
        throw Error("transform: instance has " + std::to_string(inst.values.size()) + " values, model expects " +
                    std::to_string(features_.size()));
    }
    Vector out(layout_.dimension, 0.0);
    for (std::size_t f = 0; f < features_.size(); ++f) {
        const Feature& feat = features_[f];
        const Cell& cell = inst.values[f];
        if (feat.kind == AttributeKind::Numeric) {
            double x = feat.numeric.mean;
            if (const double* v = std::get_if<double>(&cell)) {
                x = *v;
            } else if (!is_missing(cell)) {
                throw Error("transform: categorical value in numeric attribute '" + feat.name + "'");
            }
            const double range = feat.numeric.max - feat.numeric.min;
            double scaled = range > 0.0 ? (x - feat.numeric.min) / range : 0.0;
            out[feat.block.offset] = std::clamp(scaled, 0.0, 1.0);
        } else {
            std::size_t category = feat.categorical.mode;
            if (const Category* c = std::get_if<Category>(&cell)) {
                category = c->index;
            } else if (!is_missing(cell)) {
                throw Error("transform: numeric value in categorical attribute '" + feat.name + "'");
            }
            if (category < feat.categorical.slot.size() && feat.categorical.slot[category] >= 0) {
                out[feat.block.offset + static_cast<std::size_t>(feat.categorical.slot[category])] = 1.0;
            }
        }
    }
    return out;
}

std::vector<Vector> PreprocessModel::transform(const Dataset& ds) const {
    std::vector<Vector> out;
    out.reserve(ds.n());
    for (const auto& inst : ds.instances()) out.push_back(transform(inst));
    return out;
}

void PreprocessModel::save(io::Writer& w) const {
    w.tag("preprocess").u64(features_.size()).newline();
    for (const auto& f : features_) {
        w.str(f.name);
        if (f.kind == AttributeKind::Numeric) {
            w.tag("N").real(f.numeric.mean).real(f.numeric.min).real(f.numeric.max);
        } else {
            w.tag("C").u64(f.categorical.mode).u64(f.categorical.slot.size());
            for (long s : f.categorical.slot) w.tag(std::to_string(s));
        }
        w.u64(f.block.offset).u64(f.block.width).newline();
    }
    w.u64(layout_.dimension).newline();
}

PreprocessModel PreprocessModel::load(io::Reader& r) {
    PreprocessModel m;
    r.expect("preprocess");
    const std::size_t count = r.size();
    for (std::size_t i = 0; i < count; ++i) {
        Feature f;
        f.name = r.str();
        const std::string kind = r.token();
        if (kind == "N") {
            f.kind = AttributeKind::Numeric;
            f.numeric.mean = r.real();
            f.numeric.min = r.real();
            f.numeric.max = r.real();
        } else if (kind == "C") {
            f.kind = AttributeKind::Categorical;
            f.categorical.mode = r.size();
            f.categorical.slot.resize(r.size());
            for (auto& s : f.categorical.slot) s = std::stol(r.token());
        } else {
            throw Error("model file corrupt: bad feature kind '" + kind + "'");
        }
        f.block = {f.kind, r.size(), r.size()};
        m.layout_.blocks.push_back(f.block);
        m.features_.push_back(std::move(f));
    }
    m.layout_.dimension = r.size();
    return m;
}

}  // namespace kmc
