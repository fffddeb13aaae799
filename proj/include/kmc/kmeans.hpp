#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kmc/preprocess.hpp"
#include "kmc/serialize.hpp"

namespace kmc {

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Lloyd's K-means state after fitting.
struct KMeansModel {
    std::size_t k = 0;
    std::vector<Vector> centroids;
    /// assignment[i] = cluster of training vector i.
    std::vector<std::size_t> assignment;
    /// Sum over clusters of squared distances from members to their centroid.
    double error = 0.0;
    /// Error after each centroid update, in order.
    std::vector<double> error_history;
    std::size_t iterations_run = 0;
    bool converged = false;
    /// Majority class per cluster; empty until assign_cluster_labels.
    std::vector<std::size_t> cluster_class;
    /// Clusters that had no members at labeling time (labeled with the global majority).
    std::vector<bool> empty_cluster;

    std::size_t dimension() const { return centroids.empty() ? 0 : centroids.front().size(); }
    /// Members of cluster j, ascending.
    std::vector<std::size_t> members(std::size_t j) const;

    void save(io::Writer& w) const;
    static KMeansModel load(io::Reader& r);

    bool operator==(const KMeansModel&) const = default;
};

struct KMeansOptions {
    std::size_t k = 2;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
};

/// Random-sample initialization: k distinct vectors chosen by a seeded shuffle.
std::vector<Vector> kmeans_initial_centroids(std::span<const Vector> vectors, std::size_t k, std::uint64_t seed);

KMeansModel kmeans_fit(std::span<const Vector> vectors, const KMeansOptions& options);

/// Lloyd iteration from explicit starting centroids.
KMeansModel kmeans_fit_from(std::span<const Vector> vectors, std::vector<Vector> centroids, std::size_t max_iter = 100);

/// Nearest centroid; ties go to the lowest index.
std::size_t kmeans_assign(const KMeansModel& model, std::span<const double> vector);

/// Sum of squared distances for a given assignment and centroids.
double kmeans_error(std::span<const Vector> vectors, const std::vector<Vector>& centroids,
                    const std::vector<std::size_t>& assignment);

/// Majority label per cluster (ties -> lowest class index).
KMeansModel assign_cluster_labels(KMeansModel model, std::span<const std::size_t> labels, std::size_t class_count);

}  // namespace kmc
