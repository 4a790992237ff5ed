#pragma once

#include <span>
#include <vector>

#include "ssldcm/mnl.hpp"

namespace ssldcm {

// Rank-ordered log-likelihood of the request's stored rank under theta:
// sum over rank positions 1..|X|-1 of the log-softmax of the position-j item
// among the items ranked j and below.
double rolik(const Coefficients& c, const Request& x);

// Kendall tau-b between two rankings given as best-first permutations of the
// same index set (reduces to tau-a on tie-free permutations). O(n^2) pair
// enumeration.
double kendall_tau(std::span<const int> r1, std::span<const int> r2);

// (1 - tau) / 2, in [0, 1]; lower means more similar.
double rank_difference(std::span<const int> r_true, std::span<const int> r_est);

// (p - 1) / (|X| - 1) where p is the 1-based position of the chosen
// alternative in the estimated rank.
double position_difference(std::span<const int> r_est, int chosen);

// Mean of 1/p_i over the 1-based positions of the correct responses.
double mean_reciprocal_rank(std::span<const int> positions);

struct MfMhResult {
  double mf = 0.0;  // percent; lower is better
  double mh = 0.0;
  long skipped = 0;
};

// Airline prediction accuracies against the lowest-p% reference sets
// Z_i = A_i union B_i with |A_i| = |B_i| = ceil(p_pct * |X_i|).
MfMhResult mf_mh(const std::vector<std::vector<double>>& fares,
                 const std::vector<std::vector<double>>& quality,
                 const std::vector<int>& predictions, double p_pct);

// Mean test-set metrics for ranked, originally-labeled requests.
struct RankMetrics {
  double rolik = 0.0;
  double rd = 0.0;
  double pd = 0.0;
  double rr = 0.0;
};

namespace kernels {
RankMetrics rank_metrics_serial(const Coefficients& c, std::span<const Request> test);
RankMetrics rank_metrics(const Coefficients& c, std::span<const Request> test);
}  // namespace kernels

}  // namespace ssldcm
