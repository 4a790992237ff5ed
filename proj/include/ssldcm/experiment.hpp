#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssldcm/data.hpp"
#include "ssldcm/sgd.hpp"
#include "ssldcm/ssl.hpp"

namespace ssldcm {

// Ranked-data construction: the dataset is split into 10 even batches, 4
// random batches lose their labels permanently, and each remaining batch gets
// ranks from an MNL model fitted on that batch alone.
struct RankedBatches {
  std::vector<std::vector<Request>> ranked;     // rank + original label kept
  std::vector<std::vector<Request>> unlabeled;  // labels removed for good
  std::vector<std::string> isf_names;
  std::vector<std::string> msf_names;
};

RankedBatches make_ranked_batches(const Dataset& d, uint64_t seed,
                                  const SgdConfig& cfg, int n_batches = 10,
                                  int n_unlabeled_batches = 4);

// Label-q%: the first q/10 ranked batches keep ranks and labels, the
// remaining ranked batches are stripped, the permanent unlabeled batches are
// always included. Labeled sets nest across q.
struct LabelExperiment {
  std::vector<std::vector<Request>> labeled_batches;
  std::vector<Request> unlabeled;
  std::vector<std::string> isf_names;
  std::vector<std::string> msf_names;
};

LabelExperiment build_label_experiment(const RankedBatches& b, int q_pct);

struct ExperimentPlan {
  std::vector<int> q_pcts = {10, 20, 30, 40, 50, 60};
  int folds = 10;
  int batches = 10;
  uint64_t seed = 0;
  std::vector<std::string> roster = {"baseline", "em", "cl", "xcl1", "xcl2"};
  SgdConfig sgd;
  XclConfig xcl;
  std::vector<int> cl_ks = {2, 3, 4, 5, 6};
  std::vector<double> em_betas = {0.05, 0.10};
  EmMode em_mode = EmMode::kSoft;
  int max_em_iter = 30;
  double em_tolerance = 0.01;
};

struct CvRow {
  std::string algorithm;
  int q_pct = 0;
  int fold = 0;
  std::string metric;
  double value = 0.0;
};

struct CvResult {
  std::vector<CvRow> rows;    // long-format raw metrics, deterministic
  std::vector<CvRow> timing;  // wall seconds per (algorithm, q, fold)
  // Mean metric over folds and mean relative delta vs baseline in percent,
  // keyed "algorithm/q/metric".
  std::map<std::string, double> mean_metrics;
  std::map<std::string, double> mean_relative;
  int failed_folds = 0;
  int total_folds = 0;
};

// The 10-fold protocol: each labeled batch is cut into `folds` slices; fold f
// trains on the other slices of every labeled batch (exploded to MNL
// requests) plus all unlabeled data and tests on batch 1's slice f. CL sweeps
// its K grid and EM its beta grid, picked by held-out labeled log-likelihood
// on a validation slice of the training data.
CvResult run_cv(const ExperimentPlan& plan, const Dataset& d);

std::string cv_rows_to_csv(const std::vector<CvRow>& rows,
                           const std::string& value_header = "value");

}  // namespace ssldcm
