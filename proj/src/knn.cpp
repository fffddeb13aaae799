#include <algorithm>
#include <numeric>

#include "kmc/kmeans.hpp"
#include "kmc/learners.hpp"
#include "learner_io.hpp"

namespace kmc {

KnnClassifier::KnnClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension, std::size_t k,
                             std::vector<Vector> points, std::vector<std::size_t> labels)
    : Classifier(std::move(spec), class_count, dimension),
      k_(std::min(k, points.size())),
      points_(std::move(points)),
      labels_(std::move(labels)) {}

KnnClassifier fit_knn(const ClassifierSpec& spec, const TrainingSet& data) {
    const detail::Params params(spec);
    return KnnClassifier(spec, data.class_count, data.dimension(), params.count("k"),
                         std::vector<Vector>(data.X.begin(), data.X.end()),
                         std::vector<std::size_t>(data.y.begin(), data.y.end()));
}

std::vector<std::size_t> KnnClassifier::neighbors(std::span<const double> x) const {
    std::vector<std::pair<double, std::size_t>> dist(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) dist[i] = {squared_distance(points_[i], x), i};
    // pair ordering breaks distance ties by training index
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    std::vector<std::size_t> out(k_);
    for (std::size_t i = 0; i < k_; ++i) out[i] = dist[i].second;
    return out;
}

std::vector<double> KnnClassifier::compute_proba(std::span<const double> x) const {
    std::vector<double> p(class_count(), 0.0);
    for (std::size_t i : neighbors(x)) p[labels_[i]] += 1.0;
    for (double& v : p) v /= static_cast<double>(k_);
    return p;
}

void KnnClassifier::save_state(io::Writer& w) const {
    w.u64(k_).u64(points_.size()).newline();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        w.u64(labels_[i]);
        for (double v : points_[i]) w.real(v);
        w.newline();
    }
}

namespace detail {
std::unique_ptr<Classifier> load_knn(io::Reader& r, const ModelHeader& h) {
    const std::size_t k = r.size();
    const std::size_t n = r.size();
    std::vector<Vector> points(n, Vector(h.dimension));
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = r.size();
        for (auto& v : points[i]) v = r.real();
    }
    return std::make_unique<KnnClassifier>(h.spec, h.class_count, h.dimension, k, std::move(points), std::move(labels));
}
}  // namespace detail

}  // namespace kmc
