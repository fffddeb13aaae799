#include "kmc/metrics.hpp"

#include <cmath>

#include "kmc/error.hpp"

namespace kmc {
namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void add_flag(std::vector<std::string>& flags, std::string flag) {
    for (const auto& f : flags) {
        if (f == flag) return;
    }
    flags.push_back(std::move(flag));
}

}  // namespace

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t positive) {
    if (y_true.size() != y_pred.size()) throw Error("confusion: label sequences differ in length");
    if (y_true.empty()) throw Error("confusion: no labels");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool actual = y_true[i] == positive;
        const bool predicted = y_pred[i] == positive;
        if (actual && predicted) ++cm.tp;
        else if (actual) ++cm.fn;
        else if (predicted) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

BinaryMetrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error("metrics: empty confusion matrix");
    BinaryMetrics m;
    bool unused = false;
    m.accuracy = ratio(cm.tp + cm.tn, cm.total(), unused);
    m.precision = ratio(cm.tp, cm.tp + cm.fp, m.precision_undefined);
    m.recall = ratio(cm.tp, cm.tp + cm.fn, m.recall_undefined);
    const double pr = m.precision + m.recall;
    m.f_undefined = pr == 0.0;
    m.f_measure = m.f_undefined ? 0.0 : 2.0 * m.precision * m.recall / pr;
    return m;
}

KappaResult kappa(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error("kappa: empty confusion matrix");
    const double n = static_cast<double>(cm.total());
    KappaResult k;
    k.p_a = static_cast<double>(cm.tp + cm.tn) / n;
    // actual-positive x predicted-positive + actual-negative x predicted-negative
    const double pos = static_cast<double>(cm.tp + cm.fn) * static_cast<double>(cm.tp + cm.fp);
    const double neg = static_cast<double>(cm.fp + cm.tn) * static_cast<double>(cm.fn + cm.tn);
    k.p_e = (pos + neg) / (n * n);
    if (k.p_e == 1.0) {
        k.undefined = true;
        k.kappa = 0.0;
    } else {
        k.kappa = (k.p_a - k.p_e) / (1.0 - k.p_e);
    }
    return k;
}

ErrorScores mae_rae(std::span<const std::size_t> y_true, std::span<const std::vector<double>> probas,
                    std::span<const std::vector<double>> priors) {
    if (y_true.size() != probas.size() || y_true.size() != priors.size()) {
        throw Error("mae_rae: inputs differ in length");
    }
    if (y_true.empty()) throw Error("mae_rae: no instances");
    ErrorScores s;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto& p = probas[i];
        const auto& q = priors[i];
        if (p.size() != q.size() || y_true[i] >= p.size()) throw Error("mae_rae: class count mismatch");
        for (std::size_t c = 0; c < p.size(); ++c) {
            const double target = c == y_true[i] ? 1.0 : 0.0;
            s.model_abs_error += std::abs(target - p[c]);
            s.prior_abs_error += std::abs(target - q[c]);
        }
        s.cells += p.size();
    }
    s.mae = s.model_abs_error / static_cast<double>(s.cells);
    if (s.prior_abs_error == 0.0) {
        s.rae_undefined = true;
    } else {
        s.rae_pct = 100.0 * s.model_abs_error / s.prior_abs_error;
    }
    return s;
}

ErrorScores mae_rae(std::span<const std::size_t> y_true, std::span<const std::vector<double>> probas,
                    std::span<const double> priors) {
    double total = 0.0;
    for (double p : priors) total += p;
    if (std::abs(total - 1.0) > 1e-9) throw Error("mae_rae: priors must sum to 1");
    const std::vector<std::vector<double>> repeated(y_true.size(), std::vector<double>(priors.begin(), priors.end()));
    return mae_rae(y_true, probas, repeated);
}

MetricsReport summarize(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                        std::span<const std::vector<double>> probas, std::span<const std::vector<double>> priors,
                        std::size_t positive) {
    constexpr std::size_t kClasses = 2;
    if (positive >= kClasses) throw Error("summarize: positive class out of range");
    MetricsReport r;
    r.positive = positive;
    r.n = y_true.size();
    r.confusion = confusion(y_true, y_pred, positive);

    const ConfusionMatrix by_class[kClasses] = {positive == 0 ? r.confusion : r.confusion.swapped(),
                                                positive == 0 ? r.confusion.swapped() : r.confusion};
    const BinaryMetrics overall = metrics(r.confusion);
    r.accuracy = overall.accuracy;
    const std::size_t wrong = r.confusion.fn + r.confusion.fp;
    r.incorrect_pct = 100.0 * static_cast<double>(wrong) / static_cast<double>(r.n);

    for (std::size_t c = 0; c < kClasses; ++c) {
        const BinaryMetrics m = metrics(by_class[c]);
        const std::string cls = std::to_string(c);
        if (m.precision_undefined) add_flag(r.flags, "precision_undefined_class_" + cls);
        if (m.recall_undefined) add_flag(r.flags, "recall_undefined_class_" + cls);
        if (m.f_undefined) add_flag(r.flags, "f_measure_undefined_class_" + cls);
        r.precision_per_class.push_back(m.precision);
        r.recall_per_class.push_back(m.recall);
        r.f_measure_per_class.push_back(m.f_measure);
        const double support = static_cast<double>(by_class[c].tp + by_class[c].fn) / static_cast<double>(r.n);
        r.f_measure += support * m.f_measure;
        r.tpr_weighted += support * m.recall;
    }

    const KappaResult k = kappa(r.confusion);
    r.kappa = k.kappa;
    r.p_a = k.p_a;
    r.p_e = k.p_e;
    if (k.undefined) add_flag(r.flags, "kappa_undefined");

    const ErrorScores e = mae_rae(y_true, probas, priors);
    r.mae = e.mae;
    r.rae_pct = e.rae_pct;
    r.rae_undefined = e.rae_undefined;
    if (e.rae_undefined) add_flag(r.flags, "rae_undefined");
    return r;
}

MetricsReport macro_average(std::span<const MetricsReport> folds) {
    if (folds.empty()) throw Error("macro_average: no folds");
    MetricsReport r;
    r.positive = folds.front().positive;
    const std::size_t classes = folds.front().precision_per_class.size();
    r.precision_per_class.assign(classes, 0.0);
    r.recall_per_class.assign(classes, 0.0);
    r.f_measure_per_class.assign(classes, 0.0);
    std::size_t rae_folds = 0;
    for (const auto& f : folds) {
        r.n += f.n;
        r.confusion += f.confusion;
        r.accuracy += f.accuracy;
        r.incorrect_pct += f.incorrect_pct;
        for (std::size_t c = 0; c < classes; ++c) {
            r.precision_per_class[c] += f.precision_per_class[c];
            r.recall_per_class[c] += f.recall_per_class[c];
            r.f_measure_per_class[c] += f.f_measure_per_class[c];
        }
        r.f_measure += f.f_measure;
        r.tpr_weighted += f.tpr_weighted;
        r.kappa += f.kappa;
        r.p_a += f.p_a;
        r.p_e += f.p_e;
        r.mae += f.mae;
        if (!f.rae_undefined) {
            r.rae_pct += f.rae_pct;
            ++rae_folds;
        }
        for (const auto& flag : f.flags) add_flag(r.flags, flag);
    }
    const double k = static_cast<double>(folds.size());
    r.accuracy /= k;
    r.incorrect_pct /= k;
    for (std::size_t c = 0; c < classes; ++c) {
        r.precision_per_class[c] /= k;
        r.recall_per_class[c] /= k;
        r.f_measure_per_class[c] /= k;
    }
    r.f_measure /= k;
    r.tpr_weighted /= k;
    r.kappa /= k;
    r.p_a /= k;
    r.p_e /= k;
    r.mae /= k;
    if (rae_folds == 0) {
        r.rae_undefined = true;
    } else {
        r.rae_pct /= static_cast<double>(rae_folds);
    }
    return r;
}

}  // namespace kmc
