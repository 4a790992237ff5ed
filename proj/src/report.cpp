#include "ssldcm/report.hpp"

#include <fstream>

#include "json.hpp"

namespace ssldcm {

using nlohmann::json;

namespace {

json bic_to_json(const BicValue& b) {
  return json{{"value", b.value},
              {"loglik_sum", b.loglik_sum},
              {"penalty", b.penalty},
              {"K", b.K},
              {"N", b.N}};
}

json tree_to_json(const ClusterTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back(json{{"id", n.id},
                         {"parent", n.parent},
                         {"children", n.children},
                         {"members", n.members},
                         {"centroid", n.centroid},
                         {"labeled_count", n.labeled_count},
                         {"total_count", n.total_count},
                         {"bic", bic_to_json(n.bic)},
                         {"theta", n.theta.theta},
                         {"discarded", n.discarded},
                         {"accepted", n.accepted_split}});
  }
  json events = json::array();
  for (const auto& e : t.events) {
    events.push_back(json{{"kind", e.kind},
                          {"parents", e.parents},
                          {"children", e.children},
                          {"bic_before", e.bic_before},
                          {"bic_after", e.bic_after},
                          {"accepted", e.accepted},
                          {"reject_reason", e.reject_reason}});
  }
  return json{{"nodes", nodes}, {"events", events}};
}

}  // namespace

std::string coefficients_to_json(const Coefficients& c,
                                 const std::vector<std::string>& feature_names,
                                 double loglik) {
  json j{{"theta", c.theta}, {"feature_names", feature_names}, {"loglik", loglik}};
  return j.dump(2);
}

std::string fit_report_to_json(const FitReport& r) {
  json j{{"algorithm", r.algorithm},
         {"theta", r.theta.theta},
         {"feature_names", r.feature_names},
         {"loglik", r.loglik},
         {"loglik_trace", r.loglik_trace},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"counts",
          json{{"labeled", r.n_labeled},
               {"imputed", r.n_imputed},
               {"discarded", r.n_discarded}}}};
  if (!r.extras.empty()) j["extras"] = r.extras;
  if (r.tree) j["cluster_tree"] = tree_to_json(*r.tree);
  return j.dump(2);
}

void write_fit_report(const std::string& path, const FitReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << fit_report_to_json(r) << "\n";
}

std::string cv_summary_to_json(const CvResult& r, const ExperimentPlan& plan) {
  json j{{"q_pcts", plan.q_pcts},
         {"folds", plan.folds},
         {"seed", plan.seed},
         {"roster", plan.roster},
         {"mean_metrics", r.mean_metrics},
         {"mean_relative_pct", r.mean_relative},
         {"failed_folds", r.failed_folds},
         {"total_folds", r.total_folds}};
  return j.dump(2);
}

}  // namespace ssldcm
