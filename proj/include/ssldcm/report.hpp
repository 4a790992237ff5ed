#pragma once

#include <string>

#include "ssldcm/experiment.hpp"
#include "ssldcm/ssl.hpp"

namespace ssldcm {

// {"theta": [...], "feature_names": [...], "loglik": x}
std::string coefficients_to_json(const Coefficients& c,
                                 const std::vector<std::string>& feature_names,
                                 double loglik);

// Full report including the cluster tree (nodes with parent/children ids, BIC
// components, labeled/total counts, members) when present.
std::string fit_report_to_json(const FitReport& r);
void write_fit_report(const std::string& path, const FitReport& r);

std::string cv_summary_to_json(const CvResult& r, const ExperimentPlan& plan);

}  // namespace ssldcm
