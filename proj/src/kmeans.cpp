#include "ssldcm/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssldcm/error.hpp"

namespace ssldcm {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> out(static_cast<size_t>(n_clusters()));
  for (int i = 0; i < int(assignments.size()); ++i) {
    out[size_t(assignments[size_t(i)])].push_back(i);
  }
  return out;
}

namespace kernels {

namespace {
inline int nearest(const std::vector<double>& x,
                   const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < int(centroids.size()); ++k) {
    const auto& c = centroids[size_t(k)];
    double d = 0;
    for (size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - c[j];
      d += diff * diff;
    }
    if (d < best_d) {  // strict: ties stay with the lower id
      best_d = d;
      best = k;
    }
  }
  return best;
}
}  // namespace

void assign_nearest_serial(const std::vector<std::vector<double>>& points,
                           const std::vector<std::vector<double>>& centroids,
                           std::vector<int>& out) {
  out.resize(points.size());
  for (size_t i = 0; i < points.size(); ++i) out[i] = nearest(points[i], centroids);
}

void assign_nearest(const std::vector<std::vector<double>>& points,
                    const std::vector<std::vector<double>>& centroids,
                    std::vector<int>& out) {
  out.resize(points.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < long(points.size()); ++i) {
    out[size_t(i)] = nearest(points[size_t(i)], centroids);
  }
}

}  // namespace kernels

double wcss(const std::vector<std::vector<double>>& points, const Partition& p) {
  double s = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& c = p.centroids[size_t(p.assignments[i])];
    for (size_t j = 0; j < points[i].size(); ++j) {
      const double d = points[i][j] - c[j];
      s += d * d;
    }
  }
  return s;
}

Partition kmeans_lloyd(const std::vector<std::vector<double>>& points,
                       const std::vector<std::vector<double>>& init_centroids,
                       int max_iter, uint64_t seed) {
  (void)seed;
  if (points.empty()) throw DataError("kmeans_lloyd: no points");
  if (init_centroids.empty()) throw DataError("kmeans_lloyd: no initial centroids");
  if (init_centroids.size() > points.size()) {
    throw DataError("kmeans_lloyd: more centroids than points");
  }
  const size_t K = init_centroids.size();
  const size_t dim = points.front().size();
  for (const auto& c : init_centroids) {
    if (c.size() != dim) throw DataError("kmeans_lloyd: centroid dimension mismatch");
  }

  Partition p;
  p.centroids = init_centroids;
  p.assignments.assign(points.size(), -1);
  std::vector<int> assign;
  std::vector<long> counts(K, 0);

  for (int iter = 1; iter <= max_iter; ++iter) {
    kernels::assign_nearest(points, p.centroids, assign);

    // Re-seed empty clusters at the point farthest from their stale centroid,
    // skipping points whose source cluster would become empty.
    std::fill(counts.begin(), counts.end(), 0);
    for (int a : assign) ++counts[size_t(a)];
    for (size_t k = 0; k < K; ++k) {
      if (counts[k] > 0) continue;
      int far = -1;
      double far_d = -1;
      for (size_t i = 0; i < points.size(); ++i) {
        if (counts[size_t(assign[i])] < 2) continue;
        const double d = euclidean(points[i], p.centroids[k]);
        if (d > far_d) {
          far_d = d;
          far = int(i);
        }
      }
      if (far < 0) continue;  // cannot fill without emptying another cluster
      --counts[size_t(assign[size_t(far)])];
      assign[size_t(far)] = int(k);
      ++counts[k];
    }

    const bool changed = assign != p.assignments;
    p.assignments = assign;

    for (size_t k = 0; k < K; ++k) {
      if (counts[k] > 0) std::fill(p.centroids[k].begin(), p.centroids[k].end(), 0.0);
    }
    for (size_t i = 0; i < points.size(); ++i) {
      auto& c = p.centroids[size_t(assign[i])];
      for (size_t j = 0; j < dim; ++j) c[j] += points[i][j];
    }
    for (size_t k = 0; k < K; ++k) {
      if (counts[k] > 0) {
        for (double& v : p.centroids[k]) v /= double(counts[k]);
      }
    }

    p.wcss_trace.push_back(wcss(points, p));
    p.iterations = iter;
    if (!changed) {
      p.converged = true;
      break;
    }
  }
  return p;
}

double avg_within_distance(const std::vector<std::vector<double>>& points,
                           const Partition& p, int k) {
  if (k < 0 || k >= p.n_clusters()) {
    throw DataError("avg_within_distance: unknown cluster " + std::to_string(k));
  }
  double sum = 0;
  long count = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (p.assignments[i] == k) {
      sum += euclidean(points[i], p.centroids[size_t(k)]);
      ++count;
    }
  }
  if (count == 0) throw DataError("avg_within_distance: empty cluster " + std::to_string(k));
  return sum / double(count);
}

std::pair<std::vector<double>, std::vector<double>> split_seeds_along(
    const std::vector<double>& centroid, double u_bar,
    const std::vector<double>& direction) {
  if (direction.size() != centroid.size()) {
    throw DataError("split_seeds: direction dimension mismatch");
  }
  double norm = 0;
  for (double g : direction) norm += g * g;
  norm = std::sqrt(norm);
  if (norm < 1e-12) throw DataError("split_seeds: degenerate direction");
  std::vector<double> plus = centroid, minus = centroid;
  for (size_t j = 0; j < centroid.size(); ++j) {
    const double step = u_bar * direction[j] / norm;
    plus[j] += step;
    minus[j] -= step;
  }
  return {plus, minus};
}

std::pair<std::vector<double>, std::vector<double>> split_seeds(
    const std::vector<double>& centroid, double u_bar, Rng& rng) {
  if (u_bar < 0) throw DataError("split_seeds: negative average distance");
  std::vector<double> g(centroid.size());
  for (;;) {
    double norm = 0;
    for (double& v : g) {
      v = rng.uniform(-1.0, 1.0);
      norm += v * v;
    }
    if (std::sqrt(norm) >= 1e-12) break;  // redraw the degenerate case
  }
  return split_seeds_along(centroid, u_bar, g);
}

std::vector<double> midpoint_seed(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("midpoint_seed: dimension mismatch");
  std::vector<double> mid(a.size());
  for (size_t j = 0; j < a.size(); ++j) mid[j] = 0.5 * (a[j] + b[j]);
  return mid;
}

}  // namespace ssldcm
