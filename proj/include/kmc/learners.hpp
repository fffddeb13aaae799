#pragma once

// Concrete learners behind the Classifier contract. Exposed so tests can
// inspect fitted state; applications normally go through kmc::fit.

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "kmc/classifier.hpp"

namespace kmc {

class ConstantClassifier final : public Classifier {
public:
    ConstantClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension, std::size_t target);

    std::size_t target() const { return target_; }
    std::string_view kind() const override { return "constant"; }
    void save_state(io::Writer& w) const override;

protected:
    std::vector<double> compute_proba(std::span<const double> x) const override;

private:
    std::size_t target_;
};

// ---------------------------------------------------------------------------
// Naive Bayes: Laplace-smoothed frequencies per one-hot block, Gaussian per
// numeric coordinate, combined in log space.

class NaiveBayesClassifier final : public Classifier {
public:
    struct BlockModel {
        FeatureBlock block;
        /// numeric: mean[c], variance[c]; categorical: log_prob[c][slot]
        std::vector<double> mean;
        std::vector<double> variance;
        std::vector<std::vector<double>> log_prob;
    };

    NaiveBayesClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension,
                         std::vector<double> log_prior, std::vector<BlockModel> blocks);

    /// Unnormalized log posterior per class.
    std::vector<double> log_joint(std::span<const double> x) const;
    const std::vector<double>& log_prior() const { return log_prior_; }
    const std::vector<BlockModel>& blocks() const { return blocks_; }

    std::string_view kind() const override { return "naive_bayes"; }
    void save_state(io::Writer& w) const override;

protected:
    std::vector<double> compute_proba(std::span<const double> x) const override;

private:
    std::vector<double> log_prior_;
    std::vector<BlockModel> blocks_;
};

NaiveBayesClassifier fit_naive_bayes(const ClassifierSpec& spec, const TrainingSet& data);

// ---------------------------------------------------------------------------
// Decision tree with gain-ratio binary splits (x[feature] <= threshold goes left).

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    double gain_ratio = 0.0;
};

/// Best gain-ratio split over `features` for the instances `rows`. Positive
/// gain splits are preferred; an impure node without one falls back to the best
/// zero-gain split. Empty when no feature separates the rows.
std::optional<SplitCandidate> best_split(const TrainingSet& data, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features);

class DecisionTreeClassifier final : public Classifier {
public:
    static constexpr std::size_t kLeaf = std::numeric_limits<std::size_t>::max();

    struct Node {
        std::size_t feature = kLeaf;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        std::vector<double> proba;  // leaves only
        bool is_leaf() const { return feature == kLeaf; }
    };

    DecisionTreeClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension, std::vector<Node> nodes);

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t depth() const;

    std::string_view kind() const override { return "tree"; }
    void save_state(io::Writer& w) const override;

protected:
    std::vector<double> compute_proba(std::span<const double> x) const override;

private:
    std::vector<Node> nodes_;
};

struct TreeOptions {
    std::size_t min_leaf = 2;
    /// Features examined per split; 0 or >= dimension means all of them.
    std::size_t features_per_split = 0;
    std::uint64_t seed = 0;
};

DecisionTreeClassifier fit_decision_tree(const ClassifierSpec& spec, const TrainingSet& data, const TreeOptions& options);
DecisionTreeClassifier fit_c45_tree(const ClassifierSpec& spec, const TrainingSet& data);

// ---------------------------------------------------------------------------

class KnnClassifier final : public Classifier {
public:
    KnnClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension, std::size_t k,
                  std::vector<Vector> points, std::vector<std::size_t> labels);

    /// Effective k (clamped to the training size).
    std::size_t k() const { return k_; }
    /// Indices of the k nearest training points (distance ties -> lower index).
    std::vector<std::size_t> neighbors(std::span<const double> x) const;

    std::string_view kind() const override { return "knn"; }
    void save_state(io::Writer& w) const override;

protected:
    std::vector<double> compute_proba(std::span<const double> x) const override;

private:
    std::size_t k_;
    std::vector<Vector> points_;
    std::vector<std::size_t> labels_;
};

KnnClassifier fit_knn(const ClassifierSpec& spec, const TrainingSet& data);

// ---------------------------------------------------------------------------
// Linear soft-margin SVM. Class 1 is the positive side of w.x + b.

class LinearSvmClassifier final : public Classifier {
public:
    struct TrainingStats {
        std::vector<double> alpha;
        /// 0.5 a'Qa - sum(a), at the returned solution.
        double dual_objective = 0.0;
        /// Maximal KKT violation m(a) - M(a) at termination.
        double kkt_violation = 0.0;
        std::size_t iterations = 0;
        std::size_t support_vectors = 0;
    };

    LinearSvmClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension, Vector w, double b,
                        TrainingStats stats);

    const Vector& weights() const { return w_; }
    double bias() const { return b_; }
    double margin(std::span<const double> x) const;
    const TrainingStats& stats() const { return stats_; }

    std::string_view kind() const override { return "svm"; }
    void save_state(io::Writer& w) const override;

protected:
    std::vector<double> compute_proba(std::span<const double> x) const override;

private:
    Vector w_;
    double b_;
    TrainingStats stats_;
};

LinearSvmClassifier fit_svm(const ClassifierSpec& spec, const TrainingSet& data);

// ---------------------------------------------------------------------------
// Ensembles.

/// Majority vote of members; probabilities are vote fractions.
class VotingEnsemble final : public Classifier {
public:
    VotingEnsemble(ClassifierSpec spec, std::size_t class_count, std::size_t dimension,
                   std::vector<std::unique_ptr<Classifier>> members);

    const std::vector<std::unique_ptr<Classifier>>& members() const { return members_; }

    std::string_view kind() const override { return "vote"; }
    void save_state(io::Writer& w) const override;

protected:
    std::vector<double> compute_proba(std::span<const double> x) const override;

private:
    std::vector<std::unique_ptr<Classifier>> members_;
};

/// Bootstrap sample indices of ensemble member `member` for a spec seed.
std::vector<std::size_t> member_bootstrap(std::size_t n, std::uint64_t seed, std::size_t member);
/// Seed handed to ensemble member `member`.
std::uint64_t member_seed(std::uint64_t seed, std::size_t member);

VotingEnsemble fit_bagging(const ClassifierSpec& spec, const TrainingSet& data);
VotingEnsemble fit_random_forest(const ClassifierSpec& spec, const TrainingSet& data);

/// Feature-subset size used by random forests for a given encoded dimension.
std::size_t default_forest_features(std::size_t dimension);

struct Stump {
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t feature = kNone;  // kNone: constant stump predicting `left`
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;

    std::size_t predict(std::span<const double> x) const {
        return feature == kNone || x[feature] <= threshold ? left : right;
    }
};

/// Stump with the lowest weighted training error.
Stump fit_stump(const TrainingSet& data, std::span<const double> weights);

class AdaBoostClassifier final : public Classifier {
public:
    struct Round {
        Stump stump;
        double epsilon = 0.0;
        double alpha = 0.0;
        /// Sample weights after this round's update (sum to 1).
        std::vector<double> weights;
    };

    AdaBoostClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension, std::vector<Round> rounds,
                       std::vector<double> prior, std::optional<double> rejected_epsilon = std::nullopt);

    const std::vector<Round>& rounds() const { return rounds_; }
    /// Epsilon of the round that ended boosting without being kept (>= 0.5), if any.
    std::optional<double> rejected_epsilon() const { return rejected_epsilon_; }
    /// Fallback distribution used when no round was kept.
    const std::vector<double>& prior() const { return prior_; }

    std::string_view kind() const override { return "adaboost"; }
    void save_state(io::Writer& w) const override;

protected:
    std::vector<double> compute_proba(std::span<const double> x) const override;

private:
    std::vector<Round> rounds_;
    std::vector<double> prior_;
    std::optional<double> rejected_epsilon_;
};

/// alpha used when a round has zero weighted error.
double adaboost_capped_alpha();

AdaBoostClassifier fit_adaboost(const ClassifierSpec& spec, const TrainingSet& data);

}  // namespace kmc
