#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssldcm/data.hpp"
#include "ssldcm/kmeans.hpp"
#include "ssldcm/sgd.hpp"

namespace ssldcm {

// Adapted BIC: soft-labeled log-likelihood sum minus (K*R/2) * ln(N) where N
// is the total request count over the compared clusters.
struct BicValue {
  double value = 0.0;
  double loglik_sum = 0.0;
  double penalty = 0.0;
  int K = 0;
  long N = 0;
};

BicValue bic_value(const std::vector<double>& cluster_logliks, int R,
                   const std::vector<long>& cluster_sizes);

int default_m_floor(int R);  // max(R + 1, 20)

struct XclConfig {
  int k_max = 6;
  int iter_num_max = 10;
  int m = -1;              // labeled-count floor per cluster; -1 -> default_m_floor(R)
  uint64_t seed = 0;
  // Default accepts a split when the children's BIC is greater (the prose and
  // figure reading); true flips to the pseudocode's less-than comparator.
  bool accept_if_lower = false;
};

enum class EmMode { kSoft, kHard };

struct ClusterNode {
  int id = 0;
  int parent = -1;
  std::vector<int> children;
  std::vector<int> members;  // request indices into the fitted dataset
  std::vector<double> centroid;
  long labeled_count = 0;
  long total_count = 0;
  BicValue bic;        // one-cluster BIC over this node's data
  Coefficients theta;  // refit coefficients (labeled + imputed members)
  bool discarded = false;      // failed the labeled-count floor
  bool accepted_split = false; // children came from an accepted split
};

struct SplitEvent {
  std::string kind;  // "initial" | "split2" | "pair3"
  std::vector<int> parents;
  std::vector<int> children;
  double bic_before = 0.0;
  double bic_after = 0.0;
  bool accepted = false;
  std::string reject_reason;  // "" | "bic" | "m_floor"
};

struct ClusterTree {
  std::vector<ClusterNode> nodes;
  std::vector<SplitEvent> events;

  const ClusterNode* find(int id) const;
};

struct FitReport {
  std::string algorithm;
  Coefficients theta;
  std::vector<std::string> feature_names;
  double loglik = 0.0;  // final-model log-likelihood over its fit data
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = true;
  long n_labeled = 0;
  long n_imputed = 0;
  long n_discarded = 0;
  std::optional<ClusterTree> tree;
  std::map<std::string, double> extras;
};

// Plain MNL fit on the labeled requests only.
FitReport fit_baseline(const Dataset& d, const SgdConfig& cfg);

// EM adaptation: theta_0 from the labeled-only fit; each iteration draws a
// seeded beta-sample of the unlabeled set, assigns posterior soft labels
// under the current theta (hard argmax in kHard mode) and refits on the
// labeled data plus the sample, warm-started at the current theta. An ascent
// guard keeps the M-step from ever lowering the expected complete-data
// log-likelihood, which makes the observed-data log-likelihood monotone at
// beta = 1. Stops when ||mean(theta_1..t+1) - mean(theta_1..t)|| <
// em_tolerance or at max_em_iter; non-convergence is reported, not thrown.
FitReport fit_em(const Dataset& d, double beta, const SgdConfig& cfg,
                 double em_tolerance = 0.01, int max_em_iter = 50,
                 EmMode mode = EmMode::kSoft);

// Cluster-and-label with a fixed K: k-means on V, per-cluster fits on the
// labeled members, argmax imputation of the unlabeled members (clusters at or
// below the m-floor contribute none), then one global fit on the original
// labeled plus imputed requests.
FitReport fit_cl(const Dataset& d, int K, const SgdConfig& cfg, uint64_t seed,
                 int m = -1);

// X-cluster-and-label: grows clusters from an initial 2-way partition through
// BIC-gated random-direction 2-means splits (XCL1); XCL2 adds midpoint-seeded
// 3-means splits of cluster pairs once no 2-way split fires.
FitReport fit_xcl1(const Dataset& d, const XclConfig& xcl, const SgdConfig& sgd);
FitReport fit_xcl2(const Dataset& d, const XclConfig& xcl, const SgdConfig& sgd);

// Per-cluster estimation protocol behind every BIC comparison: fit on the
// labeled members, impute argmax labels for the unlabeled members, refit on
// both. Throws UnderdeterminedModel when the labeled count is not > m.
struct ClusterModel {
  Coefficients theta_labeled;
  std::map<int, int> imputed;  // request index -> argmax label
  Coefficients theta_refit;
  double refit_loglik = 0.0;
};

ClusterModel evaluate_cluster(const Dataset& d, const std::vector<int>& members,
                              const SgdConfig& sgd, uint64_t seed, int m);

// BIC of a grouping of requests, one refit log-likelihood summand per group.
BicValue bic(const Dataset& d, const std::vector<std::vector<int>>& groups,
             const SgdConfig& sgd, const std::vector<uint64_t>& group_seeds,
             int m, std::vector<ClusterModel>* models = nullptr);

// Seed used to evaluate the cluster behind a given XCL tree node. Exposed so
// accepted splits can be recomputed offline from a report.
uint64_t xcl_node_seed(uint64_t xcl_seed, int node_id);

}  // namespace ssldcm
