#include "kmc/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "kmc/error.hpp"
#include "kmc/random.hpp"

namespace kmc {
namespace {

void check_vectors(std::span<const Vector> vectors) {
    if (vectors.empty()) throw Error("kmeans: empty input");
    const std::size_t dim = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != dim) throw Error("kmeans: vectors differ in length");
    }
}

std::size_t nearest(const std::vector<Vector>& centroids, std::span<const double> v) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.size(); ++j) {
        const double d = squared_distance(centroids[j], v);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

// Moves one point into every empty cluster: the point farthest from its own
// centroid among clusters that still have two or more members.
void repair_empty_clusters(std::span<const Vector> vectors, std::vector<Vector>& centroids,
                           std::vector<std::size_t>& assignment) {
    const std::size_t k = centroids.size();
    while (true) {
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t c : assignment) ++sizes[c];
        const auto empty = std::find(sizes.begin(), sizes.end(), std::size_t{0});
        if (empty == sizes.end()) return;
        std::size_t donor = vectors.size();
        double donor_d = -1.0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            if (sizes[assignment[i]] < 2) continue;
            const double d = squared_distance(vectors[i], centroids[assignment[i]]);
            if (d > donor_d) {
                donor_d = d;
                donor = i;
            }
        }
        if (donor == vectors.size()) throw Error("kmeans: cannot repair empty cluster");
        const auto j = static_cast<std::size_t>(empty - sizes.begin());
        assignment[donor] = j;
        centroids[j] = vectors[donor];
    }
}

void recompute_centroids(std::span<const Vector> vectors, std::vector<Vector>& centroids,
                         const std::vector<std::size_t>& assignment) {
    const std::size_t dim = vectors.front().size();
    std::vector<Vector> sums(centroids.size(), Vector(dim, 0.0));
    std::vector<std::size_t> counts(centroids.size(), 0);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        auto& s = sums[assignment[i]];
        for (std::size_t t = 0; t < dim; ++t) s[t] += vectors[i][t];
        ++counts[assignment[i]];
    }
    for (std::size_t j = 0; j < centroids.size(); ++j) {
        if (counts[j] == 0) continue;
        for (std::size_t t = 0; t < dim; ++t) centroids[j][t] = sums[j][t] / static_cast<double>(counts[j]);
    }
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
    return s;
}

std::vector<std::size_t> KMeansModel::members(std::size_t j) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == j) out.push_back(i);
    }
    return out;
}

std::vector<Vector> kmeans_initial_centroids(std::span<const Vector> vectors, std::size_t k, std::uint64_t seed) {
    check_vectors(vectors);
    if (k == 0) throw Error("kmeans: k must be positive");
    std::vector<std::size_t> order(vectors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<Vector> chosen;
    for (std::size_t i : order) {
        if (std::find(chosen.begin(), chosen.end(), vectors[i]) == chosen.end()) {
            chosen.push_back(vectors[i]);
            if (chosen.size() == k) return chosen;
        }
    }
    throw Error("kmeans: k=" + std::to_string(k) + " exceeds the number of distinct vectors (" +
                std::to_string(chosen.size()) + ")");
}

KMeansModel kmeans_fit(std::span<const Vector> vectors, const KMeansOptions& options) {
    return kmeans_fit_from(vectors, kmeans_initial_centroids(vectors, options.k, options.seed), options.max_iter);
}

KMeansModel kmeans_fit_from(std::span<const Vector> vectors, std::vector<Vector> centroids, std::size_t max_iter) {
    check_vectors(vectors);
    if (centroids.empty()) throw Error("kmeans: k must be positive");
    if (max_iter == 0) throw Error("kmeans: max_iter must be positive");
    for (const auto& c : centroids) {
        if (c.size() != vectors.front().size()) throw Error("kmeans: centroid dimension mismatch");
    }
    KMeansModel model;
    model.k = centroids.size();
    std::vector<std::size_t> assignment(vectors.size(), 0);
    bool first = true;
    while (true) {
        bool changed = first;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const std::size_t c = nearest(centroids, vectors[i]);
            if (c != assignment[i]) changed = true;
            assignment[i] = c;
        }
        first = false;
        if (!changed) {
            model.converged = true;
            break;
        }
        if (model.iterations_run == max_iter) break;
        repair_empty_clusters(vectors, centroids, assignment);
        recompute_centroids(vectors, centroids, assignment);
        ++model.iterations_run;
        model.error_history.push_back(kmeans_error(vectors, centroids, assignment));
    }
    model.centroids = std::move(centroids);
    model.assignment = std::move(assignment);
    model.error = kmeans_error(vectors, model.centroids, model.assignment);
    return model;
}

std::size_t kmeans_assign(const KMeansModel& model, std::span<const double> vector) {
    if (vector.size() != model.dimension()) {
        throw Error("kmeans_assign: vector has length " + std::to_string(vector.size()) + ", model expects " +
                    std::to_string(model.dimension()));
    }
    return nearest(model.centroids, vector);
}

double kmeans_error(std::span<const Vector> vectors, const std::vector<Vector>& centroids,
                    const std::vector<std::size_t>& assignment) {
    double e = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) e += squared_distance(vectors[i], centroids[assignment[i]]);
    return e;
}

KMeansModel assign_cluster_labels(KMeansModel model, std::span<const std::size_t> labels, std::size_t class_count) {
    if (labels.size() != model.assignment.size()) throw Error("assign_cluster_labels: label count mismatch");
    std::vector<std::vector<std::size_t>> counts(model.k, std::vector<std::size_t>(class_count, 0));
    std::vector<std::size_t> global(class_count, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= class_count) throw Error("assign_cluster_labels: label out of range");
        ++counts[model.assignment[i]][labels[i]];
        ++global[labels[i]];
    }
    const auto argmax = [](const std::vector<std::size_t>& v) {
        return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    };
    const std::size_t global_majority = argmax(global);
    model.cluster_class.assign(model.k, 0);
    model.empty_cluster.assign(model.k, false);
    for (std::size_t j = 0; j < model.k; ++j) {
        const bool empty = std::all_of(counts[j].begin(), counts[j].end(), [](std::size_t c) { return c == 0; });
        model.empty_cluster[j] = empty;
        model.cluster_class[j] = empty ? global_majority : argmax(counts[j]);
    }
    return model;
}

void KMeansModel::save(io::Writer& w) const {
    w.tag("kmeans").u64(k).u64(dimension()).newline();
    for (const auto& c : centroids) {
        for (double x : c) w.real(x);
        w.newline();
    }
    w.sizes(assignment).newline();
    w.real(error).u64(iterations_run).u64(converged ? 1 : 0).newline();
    w.reals(error_history).newline();
    w.sizes(cluster_class).newline();
    w.u64(empty_cluster.size());
    for (bool e : empty_cluster) w.u64(e ? 1 : 0);
    w.newline();
}

KMeansModel KMeansModel::load(io::Reader& r) {
    KMeansModel m;
    r.expect("kmeans");
    m.k = r.size();
    const std::size_t dim = r.size();
    m.centroids.assign(m.k, Vector(dim));
    for (auto& c : m.centroids) {
        for (auto& x : c) x = r.real();
    }
    m.assignment = r.sizes();
    m.error = r.real();
    m.iterations_run = r.size();
    m.converged = r.u64() != 0;
    m.error_history = r.reals();
    m.cluster_class = r.sizes();
    m.empty_cluster.resize(r.size());
    for (std::size_t j = 0; j < m.empty_cluster.size(); ++j) m.empty_cluster[j] = r.u64() != 0;
    return m;
}

}  // namespace kmc
