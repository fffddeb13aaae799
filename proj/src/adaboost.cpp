#include <algorithm>
#include <cmath>
#include <numeric>

#include "kmc/error.hpp"
#include "kmc/learners.hpp"
#include "learner_io.hpp"

namespace kmc {

double adaboost_capped_alpha() { return 0.5 * std::log(1e10); }

Stump fit_stump(const TrainingSet& data, std::span<const double> weights) {
    const std::size_t classes = data.class_count;
    const std::size_t n = data.X.size();
    std::vector<double> total(classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) total[data.y[i]] += weights[i];

    Stump best;
    best.left = best.right = argmax(total);
    double best_error = std::accumulate(total.begin(), total.end(), 0.0) - total[best.left];

    std::vector<std::size_t> order(n);
    std::vector<double> left(classes);
    for (std::size_t f = 0; f < data.dimension(); ++f) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return data.X[a][f] < data.X[b][f]; });
        std::fill(left.begin(), left.end(), 0.0);
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
            left[data.y[order[pos]]] += weights[order[pos]];
            const double here = data.X[order[pos]][f];
            const double next = data.X[order[pos + 1]][f];
            if (!(here < next)) continue;
            std::vector<double> right(classes);
            for (std::size_t c = 0; c < classes; ++c) right[c] = total[c] - left[c];
            const std::size_t lc = argmax(left);
            const std::size_t rc = argmax(right);
            double error = 0.0;
            for (std::size_t c = 0; c < classes; ++c) {
                if (c != lc) error += left[c];
                if (c != rc) error += right[c];
            }
            if (error < best_error - 1e-15) {
                best_error = error;
                best = Stump{f, here + (next - here) / 2.0, lc, rc};
            }
        }
    }
    return best;
}

AdaBoostClassifier::AdaBoostClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension,
                                       std::vector<Round> rounds, std::vector<double> prior,
                                       std::optional<double> rejected_epsilon)
    : Classifier(std::move(spec), class_count, dimension),
      rounds_(std::move(rounds)),
      prior_(std::move(prior)),
      rejected_epsilon_(rejected_epsilon) {}

AdaBoostClassifier fit_adaboost(const ClassifierSpec& spec, const TrainingSet& data) {
    const detail::Params params(spec);
    const std::size_t max_rounds = params.count("iterations");
    const std::size_t n = data.X.size();
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));

    std::vector<double> prior(data.class_count, 0.0);
    for (std::size_t label : data.y) prior[label] += 1.0 / static_cast<double>(n);

    std::vector<AdaBoostClassifier::Round> rounds;
    std::optional<double> rejected;
    for (std::size_t t = 0; t < max_rounds; ++t) {
        const Stump stump = fit_stump(data, weights);
        std::vector<bool> wrong(n);
        double epsilon = 0.0;
        std::size_t wrong_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            wrong[i] = stump.predict(data.X[i]) != data.y[i];
            if (wrong[i]) {
                epsilon += weights[i];
                ++wrong_count;
            }
        }
        if (epsilon >= 0.5) {
            rejected = epsilon;
            break;
        }
        if (wrong_count == 0) {
            rounds.push_back({stump, 0.0, adaboost_capped_alpha(), weights});
            break;
        }
        const double alpha = 0.5 * std::log((1.0 - epsilon) / epsilon);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] *= std::exp(wrong[i] ? alpha : -alpha);
            sum += weights[i];
        }
        for (double& w : weights) w /= sum;
        rounds.push_back({stump, epsilon, alpha, weights});
    }
    return AdaBoostClassifier(spec, data.class_count, data.dimension(), std::move(rounds), std::move(prior), rejected);
}

std::vector<double> AdaBoostClassifier::compute_proba(std::span<const double> x) const {
    if (rounds_.empty()) return prior_;
    std::vector<double> p(class_count(), 0.0);
    double total = 0.0;
    for (const auto& r : rounds_) {
        p[r.stump.predict(x)] += r.alpha;
        total += r.alpha;
    }
    for (double& v : p) v /= total;
    return p;
}

void AdaBoostClassifier::save_state(io::Writer& w) const {
    w.reals(prior_).u64(rounds_.size()).newline();
    for (const auto& r : rounds_) {
        const bool constant = r.stump.feature == Stump::kNone;
        w.u64(constant ? 0 : 1).u64(constant ? 0 : r.stump.feature).real(r.stump.threshold);
        w.u64(r.stump.left).u64(r.stump.right).real(r.epsilon).real(r.alpha).newline();
    }
}

namespace detail {
std::unique_ptr<Classifier> load_adaboost(io::Reader& r, const ModelHeader& h) {
    std::vector<double> prior = r.reals();
    std::vector<AdaBoostClassifier::Round> rounds(r.size());
    for (auto& round : rounds) {
        const bool has_feature = r.u64() != 0;
        const std::size_t feature = r.size();
        round.stump.feature = has_feature ? feature : Stump::kNone;
        round.stump.threshold = r.real();
        round.stump.left = r.size();
        round.stump.right = r.size();
        round.epsilon = r.real();
        round.alpha = r.real();
        if (has_feature && feature >= h.dimension) throw Error("model file corrupt: stump feature out of range");
    }
    return std::make_unique<AdaBoostClassifier>(h.spec, h.class_count, h.dimension, std::move(rounds),
                                                std::move(prior));
}
}  // namespace detail

}  // namespace kmc
