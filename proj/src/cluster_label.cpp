#include <algorithm>
#include <map>

#include "ssldcm/rng.hpp"
#include "ssldcm/ssl.hpp"

namespace ssldcm {

FitReport fit_cl(const Dataset& d, int K, const SgdConfig& cfg, uint64_t seed,
                 int m) {
  if (K < 1) throw DataError("fit_cl: K must be >= 1, got " + std::to_string(K));
  const long n = long(d.requests.size());
  if (K > n) throw DataError("fit_cl: K exceeds the number of requests");
  const int R = d.n_features();
  const int floor = m < 0 ? default_m_floor(R) : m;

  // Plain K-means on V, seeded with K distinct random requests.
  const auto V = d.isf_matrix();
  Rng rng(seed);
  std::vector<std::vector<double>> init;
  for (int i : rng.sample_indices(int(n), K)) init.push_back(V[size_t(i)]);
  const auto part = kmeans_lloyd(V, init, 100, seed);
  const auto groups = part.members();

  ClusterTree tree;
  {
    ClusterNode root;
    root.id = 0;
    root.members.resize(size_t(n));
    for (int i = 0; i < int(n); ++i) root.members[size_t(i)] = i;
    root.labeled_count = d.n_labeled();
    root.total_count = n;
    tree.nodes.push_back(std::move(root));
  }

  std::map<int, int> imputed;  // request index -> label
  bool any_pass = false;
  for (int k = 0; k < K; ++k) {
    const auto& members = groups[size_t(k)];
    ClusterNode node;
    node.id = k + 1;
    node.parent = 0;
    node.members = members;
    node.centroid = part.centroids[size_t(k)];
    node.total_count = long(members.size());
    for (int i : members) node.labeled_count += d.requests[size_t(i)].label ? 1 : 0;
    tree.nodes[0].children.push_back(node.id);

    if (node.labeled_count > floor) {
      any_pass = true;
      std::vector<Observation> obs;
      std::vector<int> unlabeled;
      for (int i : members) {
        const Request& r = d.requests[size_t(i)];
        if (r.label) {
          obs.push_back(Observation{&r, *r.label, {}});
        } else {
          unlabeled.push_back(i);
        }
      }
      SgdConfig ck = cfg;
      ck.seed = Rng::derive_seed(seed, uint64_t(k) + 1);
      node.theta = fit_mnl(obs, ck).theta;
      for (int i : unlabeled) {
        const auto p = choice_probabilities(node.theta, d.requests[size_t(i)]);
        imputed[i] = int(std::max_element(p.begin(), p.end()) - p.begin());
      }
    } else {
      node.discarded = true;  // its unlabeled requests stay out of the final fit
    }
    tree.nodes.push_back(std::move(node));
  }
  if (!any_pass) {
    throw UnderdeterminedModel("fit_cl: no cluster satisfies the m-floor " +
                               std::to_string(floor));
  }

  // One global model over the original labels plus the imputations.
  std::vector<Observation> final_obs;
  for (int i = 0; i < int(n); ++i) {
    const Request& r = d.requests[size_t(i)];
    if (r.label) {
      final_obs.push_back(Observation{&r, *r.label, {}});
    } else if (auto it = imputed.find(i); it != imputed.end()) {
      final_obs.push_back(Observation{&r, it->second, {}});
    }
  }
  const auto fit = fit_mnl(final_obs, cfg);

  FitReport rep;
  rep.algorithm = "cl";
  rep.theta = fit.theta;
  rep.feature_names = d.msf_names;
  rep.loglik = fit.loglik_trace.back();
  rep.loglik_trace = fit.loglik_trace;
  rep.iterations = fit.iterations;
  rep.converged = fit.converged;
  rep.n_labeled = d.n_labeled();
  rep.n_imputed = long(imputed.size());
  rep.n_discarded = d.n_unlabeled() - long(imputed.size());
  rep.tree = std::move(tree);
  rep.extras["k"] = double(K);
  return rep;
}

}  // namespace ssldcm
