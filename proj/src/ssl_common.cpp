#include "ssldcm/ssl.hpp"

#include <algorithm>
#include <cmath>

#include "ssldcm/rng.hpp"

namespace ssldcm {

int default_m_floor(int R) { return std::max(R + 1, 20); }

BicValue bic_value(const std::vector<double>& cluster_logliks, int R,
                   const std::vector<long>& cluster_sizes) {
  if (cluster_logliks.empty() || cluster_logliks.size() != cluster_sizes.size()) {
    throw DataError("bic_value: one log-likelihood per cluster required");
  }
  BicValue b;
  b.K = int(cluster_logliks.size());
  for (double ll : cluster_logliks) b.loglik_sum += ll;
  for (long n : cluster_sizes) b.N += n;
  if (b.N <= 0) throw DataError("bic_value: empty clusters");
  b.penalty = (double(b.K) * double(R) / 2.0) * std::log(double(b.N));
  b.value = b.loglik_sum - b.penalty;
  return b;
}

const ClusterNode* ClusterTree::find(int id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

ClusterModel evaluate_cluster(const Dataset& d, const std::vector<int>& members,
                              const SgdConfig& sgd, uint64_t seed, int m) {
  std::vector<Observation> labeled;
  std::vector<int> unlabeled;
  for (int i : members) {
    const Request& r = d.requests[size_t(i)];
    if (r.label) {
      labeled.push_back(Observation{&r, *r.label, {}});
    } else {
      unlabeled.push_back(i);
    }
  }
  if (long(labeled.size()) <= long(m)) {
    throw UnderdeterminedModel("cluster has " + std::to_string(labeled.size()) +
                               " labeled requests, floor is " + std::to_string(m));
  }

  ClusterModel out;
  SgdConfig c1 = sgd;
  c1.seed = seed;
  out.theta_labeled = fit_mnl(labeled, c1).theta;

  for (int i : unlabeled) {
    const auto p = choice_probabilities(out.theta_labeled, d.requests[size_t(i)]);
    const int argmax = int(std::max_element(p.begin(), p.end()) - p.begin());
    out.imputed[i] = argmax;
  }

  // Refit on the labeled plus imputed members, in member order.
  std::vector<Observation> all;
  all.reserve(members.size());
  for (int i : members) {
    const Request& r = d.requests[size_t(i)];
    const int lab = r.label ? *r.label : out.imputed.at(i);
    all.push_back(Observation{&r, lab, {}});
  }
  SgdConfig c2 = sgd;
  c2.seed = Rng::derive_seed(seed, 1);
  const auto refit = fit_mnl(all, c2);
  out.theta_refit = refit.theta;
  out.refit_loglik = refit.loglik_trace.back();
  return out;
}

BicValue bic(const Dataset& d, const std::vector<std::vector<int>>& groups,
             const SgdConfig& sgd, const std::vector<uint64_t>& group_seeds,
             int m, std::vector<ClusterModel>* models) {
  if (groups.empty() || groups.size() != group_seeds.size()) {
    throw DataError("bic: one seed per group required");
  }
  std::vector<double> lls;
  std::vector<long> sizes;
  for (size_t g = 0; g < groups.size(); ++g) {
    auto model = evaluate_cluster(d, groups[g], sgd, group_seeds[g], m);
    lls.push_back(model.refit_loglik);
    sizes.push_back(long(groups[g].size()));
    if (models != nullptr) models->push_back(std::move(model));
  }
  return bic_value(lls, d.n_features(), sizes);
}

FitReport fit_baseline(const Dataset& d, const SgdConfig& cfg) {
  const auto obs = labeled_observations(d);
  const auto fit = fit_mnl(obs, cfg);

  FitReport r;
  r.algorithm = "baseline";
  r.theta = fit.theta;
  r.feature_names = d.msf_names;
  r.loglik = fit.loglik_trace.back();
  r.loglik_trace = fit.loglik_trace;
  r.iterations = fit.iterations;
  r.converged = fit.converged;
  r.n_labeled = long(obs.size());
  r.n_imputed = 0;
  r.n_discarded = d.n_unlabeled();
  return r;
}

}  // namespace ssldcm
