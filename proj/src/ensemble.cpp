#include <cmath>

#include "kmc/error.hpp"
#include "kmc/learners.hpp"
#include "kmc/random.hpp"
#include "learner_io.hpp"

namespace kmc {
namespace {

struct Sample {
    std::vector<Vector> X;
    std::vector<std::size_t> y;
};

Sample draw(const TrainingSet& data, const std::vector<std::size_t>& indices) {
    Sample s;
    s.X.reserve(indices.size());
    s.y.reserve(indices.size());
    for (std::size_t i : indices) {
        s.X.push_back(data.X[i]);
        s.y.push_back(data.y[i]);
    }
    return s;
}

}  // namespace

std::vector<std::size_t> member_bootstrap(std::size_t n, std::uint64_t seed, std::size_t member) {
    return bootstrap_indices(n, derive_seed(derive_seed(seed, streams::kBootstrap), member));
}

std::uint64_t member_seed(std::uint64_t seed, std::size_t member) {
    return derive_seed(derive_seed(seed, streams::kMember), member);
}

std::size_t default_forest_features(std::size_t dimension) {
    const auto m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dimension))));
    return std::max<std::size_t>(m, 1);
}

VotingEnsemble::VotingEnsemble(ClassifierSpec spec, std::size_t class_count, std::size_t dimension,
                               std::vector<std::unique_ptr<Classifier>> members)
    : Classifier(std::move(spec), class_count, dimension), members_(std::move(members)) {
    if (members_.empty()) throw Error("ensemble needs at least one member");
}

std::vector<double> VotingEnsemble::compute_proba(std::span<const double> x) const {
    std::vector<double> p(class_count(), 0.0);
    for (const auto& m : members_) p[m->predict(x)] += 1.0;
    for (double& v : p) v /= static_cast<double>(members_.size());
    return p;
}

void VotingEnsemble::save_state(io::Writer& w) const {
    w.u64(members_.size()).newline();
    for (const auto& m : members_) save_classifier(w, *m);
}

VotingEnsemble fit_bagging(const ClassifierSpec& spec, const TrainingSet& data) {
    const detail::Params params(spec);
    const std::size_t rounds = params.count("iterations");
    ClassifierSpec base{parse_algorithm(params.text("base")), {}, 0};
    const FeatureLayout layout = data.effective_layout();

    std::vector<std::unique_ptr<Classifier>> members;
    for (std::size_t t = 0; t < rounds; ++t) {
        const Sample s = draw(data, member_bootstrap(data.X.size(), spec.seed, t));
        base.seed = member_seed(spec.seed, t);
        members.push_back(fit(base, TrainingSet{s.X, s.y, data.class_count, layout}));
    }
    return VotingEnsemble(spec, data.class_count, data.dimension(), std::move(members));
}

VotingEnsemble fit_random_forest(const ClassifierSpec& spec, const TrainingSet& data) {
    const detail::Params params(spec);
    const std::size_t trees = params.count("trees");
    TreeOptions options;
    options.min_leaf = params.count("min_leaf");
    options.features_per_split = params.count("features");
    if (options.features_per_split == 0) options.features_per_split = default_forest_features(data.dimension());
    const ClassifierSpec tree_spec{Algorithm::C45Tree, {{"min_leaf", params.text("min_leaf")}}, 0};

    std::vector<std::unique_ptr<Classifier>> members;
    for (std::size_t t = 0; t < trees; ++t) {
        const Sample s = draw(data, member_bootstrap(data.X.size(), spec.seed, t));
        ClassifierSpec member = tree_spec;
        member.seed = options.seed = member_seed(spec.seed, t);
        members.push_back(std::make_unique<DecisionTreeClassifier>(
            fit_decision_tree(member, TrainingSet{s.X, s.y, data.class_count, data.layout}, options)));
    }
    return VotingEnsemble(spec, data.class_count, data.dimension(), std::move(members));
}

namespace detail {
std::unique_ptr<Classifier> load_vote(io::Reader& r, const ModelHeader& h) {
    std::vector<std::unique_ptr<Classifier>> members(r.size());
    for (auto& m : members) m = load_classifier(r);
    return std::make_unique<VotingEnsemble>(h.spec, h.class_count, h.dimension, std::move(members));
}
}  // namespace detail

}  // namespace kmc
