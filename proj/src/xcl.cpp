#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "ssldcm/rng.hpp"
#include "ssldcm/ssl.hpp"

namespace ssldcm {

uint64_t xcl_node_seed(uint64_t xcl_seed, int node_id) {
  return Rng::derive_seed(xcl_seed, 0xB1C00ULL + uint64_t(node_id));
}

namespace {

struct XclState {
  const Dataset& d;
  SgdConfig sgd;
  XclConfig cfg;
  int m = 0;
  std::vector<std::vector<double>> V;
  ClusterTree tree;
  std::map<int, ClusterModel> models;
  std::set<int> live;     // current clusters; splitting candidates unless retired
  std::set<int> retired;  // failed a sweep; stay live as final clusters
  int next_id = 0;
  int K = 0;

  ClusterNode* node(int id) {
    for (auto& n : tree.nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  std::vector<double> centroid_of(const std::vector<int>& members) const {
    std::vector<double> c(V.front().size(), 0.0);
    for (int i : members) {
      for (size_t j = 0; j < c.size(); ++j) c[j] += V[size_t(i)][j];
    }
    for (double& x : c) x /= double(members.size());
    return c;
  }

  void add_node(int id, int parent, std::vector<int> members) {
    ClusterNode n;
    n.id = id;
    n.parent = parent;
    n.centroid = centroid_of(members);
    n.total_count = long(members.size());
    for (int i : members) n.labeled_count += d.requests[size_t(i)].label ? 1 : 0;
    n.members = std::move(members);
    tree.nodes.push_back(std::move(n));
  }

  // Per-cluster protocol for an existing node, cached; fills the node's
  // one-cluster BIC and refit theta.
  const ClusterModel& model(int id) {
    auto it = models.find(id);
    if (it != models.end()) return it->second;
    ClusterNode* n = node(id);
    auto mod = evaluate_cluster(d, n->members, sgd, xcl_node_seed(cfg.seed, id), m);
    n->bic = bic_value({mod.refit_loglik}, d.n_features(), {n->total_count});
    n->theta = mod.theta_refit;
    return models.emplace(id, std::move(mod)).first->second;
  }

  // Candidate evaluation under a reserved node id; the node itself is only
  // created if the split is accepted.
  ClusterModel candidate_model(int id, const std::vector<int>& members) {
    return evaluate_cluster(d, members, sgd, xcl_node_seed(cfg.seed, id), m);
  }

  void adopt(int id, ClusterModel mod) {
    ClusterNode* n = node(id);
    n->bic = bic_value({mod.refit_loglik}, d.n_features(), {n->total_count});
    n->theta = mod.theta_refit;
    models.emplace(id, std::move(mod));
  }

  bool accepts(double bic_children, double bic_parent) const {
    return cfg.accept_if_lower ? bic_children < bic_parent : bic_children > bic_parent;
  }
};

long labeled_count_of(const Dataset& d, const std::vector<int>& members) {
  long n = 0;
  for (int i : members) n += d.requests[size_t(i)].label ? 1 : 0;
  return n;
}

// Unconditional 2-way start: split_seeds around the global centroid, then
// 2-means over every request.
void xcl_init(XclState& st) {
  const long n = long(st.d.requests.size());
  if (n < 2) throw DataError("xcl: need at least 2 requests");
  if (st.cfg.k_max < 2) throw DataError("xcl: k_max must be >= 2");
  if (st.cfg.iter_num_max < 1) throw DataError("xcl: iter_num_max must be >= 1");
  st.V = st.d.isf_matrix();
  st.m = st.cfg.m < 0 ? default_m_floor(st.d.n_features()) : st.cfg.m;

  std::vector<int> all(static_cast<size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  st.add_node(0, -1, std::move(all));
  st.next_id = 1;

  const ClusterNode* root = st.node(0);
  double u_bar = 0;
  for (const auto& v : st.V) u_bar += euclidean(v, root->centroid);
  u_bar /= double(n);

  Rng rng = Rng::derive(st.cfg.seed, 0x2A11);
  const auto seeds = split_seeds(root->centroid, u_bar, rng);
  const auto part = kmeans_lloyd(st.V, {seeds.first, seeds.second}, 100);
  const auto groups = part.members();

  SplitEvent ev;
  ev.kind = "initial";
  ev.parents = {0};
  ev.accepted = true;
  for (const auto& g : groups) {
    const int id = st.next_id++;
    st.add_node(id, 0, g);
    st.node(0)->children.push_back(id);
    ev.children.push_back(id);
  }
  st.node(0)->accepted_split = true;
  st.tree.events.push_back(std::move(ev));

  for (int id : st.tree.nodes[0].children) {
    ClusterNode* c = st.node(id);
    if (c->labeled_count > st.m) {
      st.live.insert(id);
    } else {
      c->discarded = true;
    }
  }
  st.K = int(st.live.size());
  if (st.live.empty()) {
    throw UnderdeterminedModel("xcl: initial partition leaves no viable cluster");
  }
}

// One Algorithm-1 pass over the current non-retired clusters. Returns true if
// any split was accepted. A cluster that fails here never re-enters.
bool xcl_sweep(XclState& st) {
  bool updated = false;
  std::vector<int> snapshot;
  for (int id : st.live) {
    if (!st.retired.count(id)) snapshot.push_back(id);
  }

  for (int id : snapshot) {
    if (st.K >= st.cfg.k_max) break;
    const std::vector<int> members = st.node(id)->members;
    const std::vector<double> centroid = st.node(id)->centroid;
    const long labeled = st.node(id)->labeled_count;

    bool viable = false;
    std::vector<int> left, right;
    // Both children must clear the floor, so fewer than 2(m+1) labeled
    // members cannot split; skip the draws outright.
    if (long(members.size()) >= 2 && labeled >= 2 * long(st.m + 1)) {
      std::vector<std::vector<double>> pts;
      pts.reserve(members.size());
      for (int i : members) pts.push_back(st.V[size_t(i)]);
      double u_bar = 0;
      for (const auto& p : pts) u_bar += euclidean(p, centroid);
      u_bar /= double(pts.size());

      Rng rng = Rng::derive(st.cfg.seed, 0x517000ULL + uint64_t(id));
      for (int attempt = 0; attempt < st.cfg.iter_num_max; ++attempt) {
        const auto seeds = split_seeds(centroid, u_bar, rng);
        const auto part = kmeans_lloyd(pts, {seeds.first, seeds.second}, 100);
        left.clear();
        right.clear();
        for (size_t i = 0; i < members.size(); ++i) {
          (part.assignments[i] == 0 ? left : right).push_back(members[i]);
        }
        if (labeled_count_of(st.d, left) > st.m && labeled_count_of(st.d, right) > st.m) {
          viable = true;
          break;
        }
      }
    }
    if (!viable) {
      st.tree.events.push_back(SplitEvent{"split2", {id}, {}, 0, 0, false, "m_floor"});
      st.retired.insert(id);
      continue;
    }

    st.model(id);  // ensure the parent's own BIC exists
    const BicValue parent_bic = st.node(id)->bic;
    const int id1 = st.next_id++;
    const int id2 = st.next_id++;
    ClusterModel m1 = st.candidate_model(id1, left);
    ClusterModel m2 = st.candidate_model(id2, right);
    const BicValue child_bic =
        bic_value({m1.refit_loglik, m2.refit_loglik}, st.d.n_features(),
                  {long(left.size()), long(right.size())});

    SplitEvent ev{"split2", {id}, {id1, id2}, parent_bic.value, child_bic.value,
                  false, ""};
    if (st.accepts(child_bic.value, parent_bic.value)) {
      ev.accepted = true;
      st.add_node(id1, id, std::move(left));
      st.add_node(id2, id, std::move(right));
      st.adopt(id1, std::move(m1));
      st.adopt(id2, std::move(m2));
      ClusterNode* parent = st.node(id);
      parent->children = {id1, id2};
      parent->accepted_split = true;
      st.live.erase(id);
      st.live.insert(id1);
      st.live.insert(id2);
      st.K += 1;
      updated = true;
    } else {
      ev.reject_reason = "bic";
      st.retired.insert(id);
    }
    st.tree.events.push_back(std::move(ev));
  }
  return updated;
}

// Algorithm-2 extension: midpoint-seeded 3-means over the union of a cluster
// pair, accepted on the same BIC comparison; breaks at the first success.
bool xcl_pair_split(XclState& st) {
  const std::vector<int> leaves(st.live.begin(), st.live.end());
  for (size_t a = 0; a < leaves.size(); ++a) {
    for (size_t b = a + 1; b < leaves.size(); ++b) {
      const int ida = leaves[a];
      const int idb = leaves[b];
      std::vector<int> uni;
      {
        const auto& ma = st.node(ida)->members;
        const auto& mb = st.node(idb)->members;
        uni.reserve(ma.size() + mb.size());
        std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(uni));
      }
      if (uni.size() < 3) continue;

      const auto c3 = midpoint_seed(st.node(ida)->centroid, st.node(idb)->centroid);
      std::vector<std::vector<double>> pts;
      pts.reserve(uni.size());
      for (int i : uni) pts.push_back(st.V[size_t(i)]);
      const auto part =
          kmeans_lloyd(pts, {st.node(ida)->centroid, st.node(idb)->centroid, c3}, 100);

      std::vector<std::vector<int>> kids(3);
      for (size_t i = 0; i < uni.size(); ++i) {
        kids[size_t(part.assignments[i])].push_back(uni[i]);
      }
      bool floor_ok = true;
      for (const auto& k : kids) {
        if (labeled_count_of(st.d, k) <= st.m) floor_ok = false;
      }
      if (!floor_ok) {
        st.tree.events.push_back(
            SplitEvent{"pair3", {ida, idb}, {}, 0, 0, false, "m_floor"});
        continue;
      }

      const double ll_a = st.model(ida).refit_loglik;
      const double ll_b = st.model(idb).refit_loglik;
      const BicValue bic2 =
          bic_value({ll_a, ll_b}, st.d.n_features(),
                    {st.node(ida)->total_count, st.node(idb)->total_count});

      int ids[3];
      ClusterModel mods[3];
      std::vector<double> lls;
      std::vector<long> sizes;
      for (int c = 0; c < 3; ++c) {
        ids[c] = st.next_id++;
        mods[c] = st.candidate_model(ids[c], kids[size_t(c)]);
        lls.push_back(mods[c].refit_loglik);
        sizes.push_back(long(kids[size_t(c)].size()));
      }
      const BicValue bic3 = bic_value(lls, st.d.n_features(), sizes);

      SplitEvent ev{"pair3", {ida, idb}, {ids[0], ids[1], ids[2]},
                    bic2.value, bic3.value, false, ""};
      if (st.accepts(bic3.value, bic2.value)) {
        ev.accepted = true;
        st.tree.events.push_back(std::move(ev));
        for (int c = 0; c < 3; ++c) {
          st.add_node(ids[c], ida, std::move(kids[size_t(c)]));
          st.adopt(ids[c], std::move(mods[c]));
        }
        for (int pid : {ida, idb}) {
          ClusterNode* p = st.node(pid);
          p->children = {ids[0], ids[1], ids[2]};
          p->accepted_split = true;
        }
        st.live.erase(ida);
        st.live.erase(idb);
        for (int c = 0; c < 3; ++c) st.live.insert(ids[c]);
        st.K += 1;
        return true;  // first improvement wins
      }
      ev.reject_reason = "bic";
      st.tree.events.push_back(std::move(ev));
    }
  }
  return false;
}

FitReport xcl_finalize(XclState& st, const std::string& algorithm) {
  // Imputations come from each surviving cluster's own model; labeled
  // requests of discarded clusters stay in, their unlabeled ones stay out.
  std::map<int, int> imputed;
  for (int id : st.live) {
    const ClusterModel& mod = st.model(id);
    for (const auto& [i, lab] : mod.imputed) imputed[i] = lab;
  }

  std::vector<Observation> final_obs;
  const long n = long(st.d.requests.size());
  for (int i = 0; i < int(n); ++i) {
    const Request& r = st.d.requests[size_t(i)];
    if (r.label) {
      final_obs.push_back(Observation{&r, *r.label, {}});
    } else if (auto it = imputed.find(i); it != imputed.end()) {
      final_obs.push_back(Observation{&r, it->second, {}});
    }
  }
  const auto fit = fit_mnl(final_obs, st.sgd);

  FitReport rep;
  rep.algorithm = algorithm;
  rep.theta = fit.theta;
  rep.feature_names = st.d.msf_names;
  rep.loglik = fit.loglik_trace.back();
  rep.loglik_trace = fit.loglik_trace;
  rep.iterations = fit.iterations;
  rep.converged = fit.converged;
  rep.n_labeled = st.d.n_labeled();
  rep.n_imputed = long(imputed.size());
  rep.n_discarded = st.d.n_unlabeled() - long(imputed.size());
  rep.tree = std::move(st.tree);
  rep.extras["k_final"] = double(st.K);
  rep.extras["m_floor"] = double(st.m);
  return rep;
}

}  // namespace

FitReport fit_xcl1(const Dataset& d, const XclConfig& xcl, const SgdConfig& sgd) {
  XclState st{d, sgd, xcl};
  xcl_init(st);
  while (st.K < st.cfg.k_max) {
    if (!xcl_sweep(st)) break;
  }
  return xcl_finalize(st, "xcl1");
}

FitReport fit_xcl2(const Dataset& d, const XclConfig& xcl, const SgdConfig& sgd) {
  XclState st{d, sgd, xcl};
  xcl_init(st);
  for (;;) {
    while (st.K < st.cfg.k_max) {
      if (!xcl_sweep(st)) break;
    }
    if (st.K >= st.cfg.k_max) break;
    if (!xcl_pair_split(st)) break;
  }
  return xcl_finalize(st, "xcl2");
}

}  // namespace ssldcm
