#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ssldcm/rng.hpp"

namespace ssldcm {

struct Partition {
  std::vector<int> assignments;  // point index -> cluster id
  std::vector<std::vector<double>> centroids;
  std::vector<double> wcss_trace;  // within-cluster sum of squares per iteration
  int iterations = 0;
  bool converged = false;

  int n_clusters() const { return int(centroids.size()); }
  std::vector<std::vector<int>> members() const;
};

namespace kernels {

// Nearest-centroid assignment (squared Euclidean, ties to the lower id).
void assign_nearest_serial(const std::vector<std::vector<double>>& points,
                           const std::vector<std::vector<double>>& centroids,
                           std::vector<int>& out);
void assign_nearest(const std::vector<std::vector<double>>& points,
                    const std::vector<std::vector<double>>& centroids,
                    std::vector<int>& out);

}  // namespace kernels

// Lloyd iterations from the given starting centroids until assignments are
// stable or max_iter is hit. An empty cluster is re-seeded at the point
// farthest from its stale centroid, keeping the cluster count constant. The
// seed parameter is part of the interface for reproducibility; the re-seeding
// rule used here is itself deterministic.
Partition kmeans_lloyd(const std::vector<std::vector<double>>& points,
                       const std::vector<std::vector<double>>& init_centroids,
                       int max_iter = 100, uint64_t seed = 0);

// Mean Euclidean distance of cluster k's members to its centroid (u_bar_k).
double avg_within_distance(const std::vector<std::vector<double>>& points,
                           const Partition& p, int k);

// Seed pair {c + u_bar*g_hat, c - u_bar*g_hat} with g drawn componentwise
// uniform on [-1, 1] and normalized; near-zero draws are redrawn.
std::pair<std::vector<double>, std::vector<double>> split_seeds(
    const std::vector<double>& centroid, double u_bar, Rng& rng);

// Deterministic core of split_seeds for a fixed direction (normalized here).
std::pair<std::vector<double>, std::vector<double>> split_seeds_along(
    const std::vector<double>& centroid, double u_bar,
    const std::vector<double>& direction);

// Componentwise midpoint (c_k3 of the pair-split construction).
std::vector<double> midpoint_seed(const std::vector<double>& a,
                                  const std::vector<double>& b);

double wcss(const std::vector<std::vector<double>>& points, const Partition& p);

double euclidean(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ssldcm
