#include <algorithm>
#include <cmath>
#include <numeric>

#include "kmc/error.hpp"
#include "kmc/learners.hpp"
#include "kmc/random.hpp"
#include "learner_io.hpp"

namespace kmc {
namespace {

constexpr double kGainEpsilon = 1e-12;

double entropy(std::span<const double> counts, double total) {
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

std::vector<double> class_counts(const TrainingSet& data, std::span<const std::size_t> rows) {
    std::vector<double> counts(data.class_count, 0.0);
    for (std::size_t r : rows) counts[data.y[r]] += 1.0;
    return counts;
}

std::vector<double> laplace_leaf(const std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> p(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
        p[c] = (counts[c] + 1.0) / (total + static_cast<double>(counts.size()));
    }
    return p;
}

class TreeBuilder {
public:
    TreeBuilder(const TrainingSet& data, const TreeOptions& options)
        : data_(data), options_(options), rng_(options.seed) {
        const std::size_t dim = data.dimension();
        subset_ = options.features_per_split == 0 || options.features_per_split >= dim ? dim
                                                                                        : options.features_per_split;
        all_features_.resize(dim);
        std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    }

    std::vector<DecisionTreeClassifier::Node> build() {
        std::vector<std::size_t> rows(data_.X.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        grow(rows);
        return std::move(nodes_);
    }

private:
    std::vector<std::size_t> candidate_features() {
        if (subset_ == all_features_.size()) return all_features_;
        std::vector<std::size_t> pool = all_features_;
        for (std::size_t i = 0; i < subset_; ++i) {
            std::swap(pool[i], pool[i + rng_.uniform_index(pool.size() - i)]);
        }
        pool.resize(subset_);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    std::size_t grow(const std::vector<std::size_t>& rows) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        const auto counts = class_counts(data_, rows);
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        std::optional<SplitCandidate> split;
        if (!pure && rows.size() >= options_.min_leaf) {
            const auto features = candidate_features();
            split = best_split(data_, rows, features);
        }
        if (!split) {
            nodes_[id].proba = laplace_leaf(counts);
            return id;
        }
        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) {
            (data_.X[r][split->feature] <= split->threshold ? left : right).push_back(r);
        }
        nodes_[id].feature = split->feature;
        nodes_[id].threshold = split->threshold;
        const std::size_t l = grow(left);
        const std::size_t r = grow(right);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    const TrainingSet& data_;
    TreeOptions options_;
    Rng rng_;
    std::size_t subset_ = 0;
    std::vector<std::size_t> all_features_;
    std::vector<DecisionTreeClassifier::Node> nodes_;
};

}  // namespace

std::optional<SplitCandidate> best_split(const TrainingSet& data, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features) {
    const std::size_t classes = data.class_count;
    const auto parent_counts = class_counts(data, rows);
    const double n = static_cast<double>(rows.size());
    const double parent_entropy = entropy(parent_counts, n);

    std::optional<SplitCandidate> best_positive;
    std::optional<SplitCandidate> best_any;
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::vector<double> left(classes), right(classes);

    for (std::size_t f : features) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return data.X[a][f] < data.X[b][f]; });
        std::fill(left.begin(), left.end(), 0.0);
        right = parent_counts;
        for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
            const std::size_t r = order[pos];
            left[data.y[r]] += 1.0;
            right[data.y[r]] -= 1.0;
            const double here = data.X[r][f];
            const double next = data.X[order[pos + 1]][f];
            if (!(here < next)) continue;
            const double nl = static_cast<double>(pos + 1);
            const double nr = n - nl;
            const double children = (nl / n) * entropy(left, nl) + (nr / n) * entropy(right, nr);
            const double gain = parent_entropy - children;
            const double split_info = -(nl / n) * std::log2(nl / n) - (nr / n) * std::log2(nr / n);
            SplitCandidate cand{f, here + (next - here) / 2.0, gain, split_info > 0.0 ? gain / split_info : 0.0};
            if (gain > kGainEpsilon) {
                if (!best_positive || cand.gain_ratio > best_positive->gain_ratio + kGainEpsilon) best_positive = cand;
            }
            if (!best_any || cand.gain_ratio > best_any->gain_ratio + kGainEpsilon) best_any = cand;
        }
    }
    return best_positive ? best_positive : best_any;
}

DecisionTreeClassifier::DecisionTreeClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension,
                                               std::vector<Node> nodes)
    : Classifier(std::move(spec), class_count, dimension), nodes_(std::move(nodes)) {}

DecisionTreeClassifier fit_decision_tree(const ClassifierSpec& spec, const TrainingSet& data,
                                         const TreeOptions& options) {
    if (data.X.empty()) throw Error("fit_decision_tree: empty training set");
    TreeBuilder builder(data, options);
    return DecisionTreeClassifier(spec, data.class_count, data.dimension(), builder.build());
}

DecisionTreeClassifier fit_c45_tree(const ClassifierSpec& spec, const TrainingSet& data) {
    const detail::Params params(spec);
    TreeOptions options;
    options.min_leaf = params.count("min_leaf");
    options.seed = spec.seed;
    return fit_decision_tree(spec, data, options);
}

std::size_t DecisionTreeClassifier::depth() const {
    // iterative walk over (node, depth)
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[id].is_leaf()) {
            stack.emplace_back(nodes_[id].left, d + 1);
            stack.emplace_back(nodes_[id].right, d + 1);
        }
    }
    return deepest;
}

std::vector<double> DecisionTreeClassifier::compute_proba(std::span<const double> x) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        id = x[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
    }
    return nodes_[id].proba;
}

void DecisionTreeClassifier::save_state(io::Writer& w) const {
    w.u64(nodes_.size()).newline();
    for (const auto& node : nodes_) {
        if (node.is_leaf()) {
            w.tag("L").reals(node.proba);
        } else {
            w.tag("S").u64(node.feature).real(node.threshold).u64(node.left).u64(node.right);
        }
        w.newline();
    }
}

namespace detail {
std::unique_ptr<Classifier> load_tree(io::Reader& r, const ModelHeader& h) {
    std::vector<DecisionTreeClassifier::Node> nodes(r.size());
    for (auto& node : nodes) {
        const std::string t = r.token();
        if (t == "L") {
            node.proba = r.reals();
        } else if (t == "S") {
            node.feature = r.size();
            node.threshold = r.real();
            node.left = r.size();
            node.right = r.size();
            if (node.feature >= h.dimension || node.left >= nodes.size() || node.right >= nodes.size()) {
                throw Error("model file corrupt: tree node out of range");
            }
        } else {
            throw Error("model file corrupt: bad tree node");
        }
    }
    if (nodes.empty()) throw Error("model file corrupt: empty tree");
    return std::make_unique<DecisionTreeClassifier>(h.spec, h.class_count, h.dimension, std::move(nodes));
}
}  // namespace detail

}  // namespace kmc
