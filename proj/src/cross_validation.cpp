#include "kmc/cross_validation.hpp"

#include <algorithm>
#include <map>

#include "kmc/error.hpp"
#include "kmc/random.hpp"

namespace kmc {

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const std::size_t> labels, std::size_t class_count,
                                                       std::size_t folds, std::uint64_t seed) {
    if (folds < 1) throw Error("stratified_folds: folds must be positive");
    std::vector<std::vector<std::size_t>> by_class(class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= class_count) throw Error("stratified_folds: label out of range");
        by_class[labels[i]].push_back(i);
    }
    Rng rng(derive_seed(seed, streams::kFolds));
    std::vector<std::vector<std::size_t>> out(folds);
    std::size_t position = 0;
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t idx : members) out[position++ % folds].push_back(idx);
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return derive_seed(seed, fold); }

CrossValidationReport cross_validate(const Trainer& trainer, const Dataset& ds, const CrossValidationOptions& options) {
    const std::size_t n = ds.n();
    if (options.folds < 2) throw Error("cross_validate: folds must be at least 2");
    if (options.folds > n) {
        throw Error("cross_validate: " + std::to_string(options.folds) + " folds requested for " + std::to_string(n) +
                    " instances");
    }
    if (ds.class_count() != 2) throw Error("cross_validate: a two-class dataset is required");

    const std::vector<std::size_t> labels = ds.labels();
    const std::vector<std::size_t> counts = ds.class_counts();
    CrossValidationReport report;
    report.folds_requested = options.folds;
    report.seed = options.seed;

    std::vector<std::vector<std::size_t>> folds;
    if (options.folds == n) {
        report.leave_one_out = true;
        for (std::size_t i = 0; i < n; ++i) folds.push_back({i});
    } else {
        std::size_t k = options.folds;
        const std::size_t smallest = *std::min_element(counts.begin(), counts.end());
        if (smallest < k) {
            if (smallest < 2) throw Error("cross_validate: a class has fewer than 2 instances");
            report.flags.push_back("folds_reduced_from_" + std::to_string(k) + "_to_" + std::to_string(smallest));
            k = smallest;
        }
        folds = stratified_folds(labels, ds.class_count(), k, options.seed);
    }
    report.folds_used = folds.size();

    std::vector<Prediction> predictions(n);
    std::vector<bool> seen(n, false);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& test = folds[f];
        std::vector<bool> in_test(n, false);
        for (std::size_t i : test) in_test[i] = true;
        std::vector<std::size_t> train;
        train.reserve(n - test.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_test[i]) train.push_back(i);
        }
        const Dataset train_ds = ds.subset(train);
        std::vector<double> prior(ds.class_count(), 0.0);
        for (std::size_t i : train) prior[labels[i]] += 1.0;
        for (auto& p : prior) p /= static_cast<double>(train.size());

        const std::unique_ptr<Predictor> model = trainer(train_ds, fold_seed(options.seed, f));
        if (!model) throw Error("cross_validate: trainer returned no model");

        std::vector<std::size_t> y_true, y_pred;
        std::vector<std::vector<double>> probas, priors;
        for (std::size_t i : test) {
            if (seen[i]) throw Error("cross_validate: folds overlap");
            seen[i] = true;
            Prediction& p = predictions[i];
            p.index = i;
            p.fold = f;
            p.truth = labels[i];
            p.proba = model->predict_proba(ds[i]);
            p.predicted = argmax(p.proba);
            p.prior = prior;
            p.cluster = model->route(ds[i]);
            y_true.push_back(p.truth);
            y_pred.push_back(p.predicted);
            probas.push_back(p.proba);
            priors.push_back(prior);
        }
        FoldReport fr;
        fr.fold = f;
        fr.train_n = train.size();
        fr.test_n = test.size();
        fr.metrics = summarize(y_true, y_pred, probas, priors, options.positive);
        report.folds.push_back(std::move(fr));
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw Error("cross_validate: folds do not cover data");

    const auto summarize_subset = [&](const std::vector<const Prediction*>& subset) {
        std::vector<std::size_t> y_true, y_pred;
        std::vector<std::vector<double>> probas, priors;
        for (const Prediction* p : subset) {
            y_true.push_back(p->truth);
            y_pred.push_back(p->predicted);
            probas.push_back(p->proba);
            priors.push_back(p->prior);
        }
        return summarize(y_true, y_pred, probas, priors, options.positive);
    };

    std::vector<const Prediction*> all;
    std::map<std::size_t, std::vector<const Prediction*>> clusters;
    for (const auto& p : predictions) {
        all.push_back(&p);
        if (p.cluster) clusters[*p.cluster].push_back(&p);
    }
    report.pooled = summarize_subset(all);
    std::vector<MetricsReport> fold_metrics;
    for (const auto& f : report.folds) fold_metrics.push_back(f.metrics);
    report.macro = macro_average(fold_metrics);
    for (const auto& [cluster, subset] : clusters) report.per_cluster.push_back({cluster, summarize_subset(subset)});
    report.predictions = std::move(predictions);
    return report;
}

Trainer cascade_trainer(CascadeSpec spec) {
    return [spec](const Dataset& train, std::uint64_t seed) -> std::unique_ptr<Predictor> {
        CascadeSpec s = spec;
        s.seed = seed;
        s.classifier.seed = seed;
        return std::make_unique<CascadeModel>(cascade_fit(s, train));
    };
}

}  // namespace kmc
