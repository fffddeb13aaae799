#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include "kmc/error.hpp"
#include "kmc/learners.hpp"
#include "learner_io.hpp"

namespace kmc {
namespace {

// Position of the hot slot inside a one-hot block, or -1 for an all-zero block.
long hot_slot(std::span<const double> x, const FeatureBlock& block) {
    for (std::size_t s = 0; s < block.width; ++s) {
        if (x[block.offset + s] > 0.5) return static_cast<long>(s);
    }
    return -1;
}

}  // namespace

NaiveBayesClassifier::NaiveBayesClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension,
                                           std::vector<double> log_prior, std::vector<BlockModel> blocks)
    : Classifier(std::move(spec), class_count, dimension), log_prior_(std::move(log_prior)), blocks_(std::move(blocks)) {}

NaiveBayesClassifier fit_naive_bayes(const ClassifierSpec& spec, const TrainingSet& data) {
    const detail::Params params(spec);
    const double var_floor = params.real("var_floor");
    const std::size_t classes = data.class_count;
    const FeatureLayout layout = data.effective_layout();

    std::vector<double> class_n(classes, 0.0);
    for (std::size_t label : data.y) class_n[label] += 1.0;
    std::vector<double> log_prior(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        log_prior[c] = class_n[c] > 0 ? std::log(class_n[c] / static_cast<double>(data.y.size()))
                                      : -std::numeric_limits<double>::infinity();
    }

    std::vector<NaiveBayesClassifier::BlockModel> blocks;
    for (const FeatureBlock& block : layout.blocks) {
        NaiveBayesClassifier::BlockModel model;
        model.block = block;
        if (block.kind == AttributeKind::Numeric) {
            model.mean.assign(classes, 0.0);
            model.variance.assign(classes, 0.0);
            for (std::size_t i = 0; i < data.X.size(); ++i) model.mean[data.y[i]] += data.X[i][block.offset];
            for (std::size_t c = 0; c < classes; ++c) {
                if (class_n[c] > 0) model.mean[c] /= class_n[c];
            }
            for (std::size_t i = 0; i < data.X.size(); ++i) {
                const double diff = data.X[i][block.offset] - model.mean[data.y[i]];
                model.variance[data.y[i]] += diff * diff;
            }
            for (std::size_t c = 0; c < classes; ++c) {
                if (class_n[c] > 0) model.variance[c] /= class_n[c];
                model.variance[c] = std::max(model.variance[c], var_floor);
            }
        } else {
            std::vector<std::vector<double>> counts(classes, std::vector<double>(block.width, 0.0));
            for (std::size_t i = 0; i < data.X.size(); ++i) {
                const long s = hot_slot(data.X[i], block);
                if (s >= 0) counts[data.y[i]][static_cast<std::size_t>(s)] += 1.0;
            }
            model.log_prob.assign(classes, std::vector<double>(block.width, 0.0));
            for (std::size_t c = 0; c < classes; ++c) {
                double total = 0.0;
                for (double v : counts[c]) total += v;
                for (std::size_t s = 0; s < block.width; ++s) {
                    model.log_prob[c][s] = std::log((counts[c][s] + 1.0) / (total + static_cast<double>(block.width)));
                }
            }
        }
        blocks.push_back(std::move(model));
    }
    return NaiveBayesClassifier(spec, classes, data.dimension(), std::move(log_prior), std::move(blocks));
}

std::vector<double> NaiveBayesClassifier::log_joint(std::span<const double> x) const {
    std::vector<double> lj = log_prior_;
    for (const auto& m : blocks_) {
        if (m.block.kind == AttributeKind::Numeric) {
            const double v = x[m.block.offset];
            for (std::size_t c = 0; c < lj.size(); ++c) {
                const double diff = v - m.mean[c];
                lj[c] += -0.5 * std::log(2.0 * std::numbers::pi * m.variance[c]) - diff * diff / (2.0 * m.variance[c]);
            }
        } else {
            const long s = hot_slot(x, m.block);
            if (s < 0) continue;  // unseen category carries no evidence
            for (std::size_t c = 0; c < lj.size(); ++c) lj[c] += m.log_prob[c][static_cast<std::size_t>(s)];
        }
    }
    return lj;
}

std::vector<double> NaiveBayesClassifier::compute_proba(std::span<const double> x) const {
    std::vector<double> lj = log_joint(x);
    const double top = *std::max_element(lj.begin(), lj.end());
    double total = 0.0;
    for (double& v : lj) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : lj) v /= total;
    return lj;
}

void NaiveBayesClassifier::save_state(io::Writer& w) const {
    w.reals(log_prior_).u64(blocks_.size()).newline();
    for (const auto& m : blocks_) {
        const bool numeric = m.block.kind == AttributeKind::Numeric;
        w.tag(numeric ? "N" : "C").u64(m.block.offset).u64(m.block.width);
        if (numeric) {
            w.reals(m.mean).reals(m.variance);
        } else {
            w.u64(m.log_prob.size());
            for (const auto& row : m.log_prob) w.reals(row);
        }
        w.newline();
    }
}

namespace detail {
std::unique_ptr<Classifier> load_naive_bayes(io::Reader& r, const ModelHeader& h) {
    std::vector<double> log_prior = r.reals();
    std::vector<NaiveBayesClassifier::BlockModel> blocks(r.size());
    for (auto& m : blocks) {
        const std::string kind = r.token();
        m.block.kind = kind == "N" ? AttributeKind::Numeric : AttributeKind::Categorical;
        m.block.offset = r.size();
        m.block.width = r.size();
        if (kind == "N") {
            m.mean = r.reals();
            m.variance = r.reals();
        } else {
            m.log_prob.resize(r.size());
            for (auto& row : m.log_prob) row = r.reals();
        }
    }
    return std::make_unique<NaiveBayesClassifier>(h.spec, h.class_count, h.dimension, std::move(log_prior),
                                                  std::move(blocks));
}
}  // namespace detail

}  // namespace kmc
