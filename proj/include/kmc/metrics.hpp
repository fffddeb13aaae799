#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kmc {

/// 2x2 counts relative to a positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fn + fp + tn; }
    /// Same counts seen from the other class.
    ConfusionMatrix swapped() const { return {tn, fp, fn, tp}; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fn += o.fn;
        fp += o.fp;
        tn += o.tn;
        return *this;
    }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t positive = 0);

struct BinaryMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    /// Set when the denominator was zero; the value is then 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f_undefined = false;
};

BinaryMetrics metrics(const ConfusionMatrix& cm);

struct KappaResult {
    double kappa = 0.0;
    double p_a = 0.0;
    double p_e = 0.0;
    /// P(E) == 1; kappa reported as 0.
    bool undefined = false;
};

KappaResult kappa(const ConfusionMatrix& cm);

struct ErrorScores {
    double mae = 0.0;
    double rae_pct = 0.0;
    /// Baseline error was zero.
    bool rae_undefined = false;
    /// Raw sums, so that scores can be pooled exactly.
    double model_abs_error = 0.0;
    double prior_abs_error = 0.0;
    std::size_t cells = 0;
};

/// MAE = sum |1[c == y_i] - p_ic| / (n * C); RAE% = 100 * MAE / MAE(priors).
ErrorScores mae_rae(std::span<const std::size_t> y_true, std::span<const std::vector<double>> probas,
                    std::span<const double> priors);
/// Variant with one prior vector per instance (the training-fold priors of its fold).
ErrorScores mae_rae(std::span<const std::size_t> y_true, std::span<const std::vector<double>> probas,
                    std::span<const std::vector<double>> priors);

/// Every reported measure for one set of predictions.
struct MetricsReport {
    std::size_t positive = 0;
    std::size_t n = 0;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double incorrect_pct = 0.0;
    std::vector<double> precision_per_class;
    std::vector<double> recall_per_class;
    std::vector<double> f_measure_per_class;
    /// F-measure weighted by true-class support.
    double f_measure = 0.0;
    /// Recall weighted by true-class support.
    double tpr_weighted = 0.0;
    double kappa = 0.0;
    double p_a = 0.0;
    double p_e = 0.0;
    double mae = 0.0;
    double rae_pct = 0.0;
    bool rae_undefined = false;
    std::vector<std::string> flags;
};

/// Two-class summary of aligned prediction streams.
MetricsReport summarize(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                        std::span<const std::vector<double>> probas, std::span<const std::vector<double>> priors,
                        std::size_t positive = 0);

/// Fold-mean of the scalar and per-class entries. RAE averages the defined folds only.
MetricsReport macro_average(std::span<const MetricsReport> folds);

}  // namespace kmc
