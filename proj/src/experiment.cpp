#include "ssldcm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

#include "ssldcm/metrics.hpp"
#include "ssldcm/rng.hpp"

namespace ssldcm {

RankedBatches make_ranked_batches(const Dataset& d, uint64_t seed,
                                  const SgdConfig& cfg, int n_batches,
                                  int n_unlabeled_batches) {
  const long n = long(d.requests.size());
  if (n < n_batches) throw DataError("make_ranked_batches: fewer requests than batches");
  if (n_unlabeled_batches >= n_batches) {
    throw DataError("make_ranked_batches: unlabeled batches must leave ranked ones");
  }
  for (const auto& r : d.requests) {
    if (!r.label) throw DataError("make_ranked_batches requires a fully labeled dataset");
  }

  Rng rng(seed);
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);

  // Even split; the first n % n_batches batches carry one extra request.
  std::vector<std::vector<int>> batch_members(static_cast<size_t>(n_batches));
  {
    long pos = 0;
    for (int b = 0; b < n_batches; ++b) {
      long size = n / n_batches + (b < int(n % n_batches) ? 1 : 0);
      for (long i = 0; i < size; ++i) batch_members[size_t(b)].push_back(perm[size_t(pos++)]);
    }
  }

  const auto unlabeled_pick = rng.sample_indices(n_batches, n_unlabeled_batches);
  std::vector<bool> is_unlabeled(size_t(n_batches), false);
  for (int b : unlabeled_pick) is_unlabeled[size_t(b)] = true;

  RankedBatches out;
  out.isf_names = d.isf_names;
  out.msf_names = d.msf_names;
  for (int b = 0; b < n_batches; ++b) {
    std::vector<Request> batch;
    batch.reserve(batch_members[size_t(b)].size());
    for (int i : batch_members[size_t(b)]) batch.push_back(d.requests[size_t(i)]);

    if (is_unlabeled[size_t(b)]) {
      for (auto& r : batch) {
        r.label.reset();
        r.rank.reset();
      }
      out.unlabeled.push_back(std::move(batch));
      continue;
    }

    // Rank each request by the utilities of this batch's own model.
    std::vector<Observation> obs;
    for (const auto& r : batch) obs.push_back(Observation{&r, *r.label, {}});
    SgdConfig bcfg = cfg;
    bcfg.seed = Rng::derive_seed(seed, 100 + uint64_t(b));
    const auto fit = fit_mnl(obs, bcfg);
    for (auto& r : batch) r.rank = predict_rank(fit.theta, r);
    out.ranked.push_back(std::move(batch));
  }
  return out;
}

LabelExperiment build_label_experiment(const RankedBatches& b, int q_pct) {
  if (q_pct % 10 != 0 || q_pct < 10 || q_pct / 10 > int(b.ranked.size())) {
    throw DataError("build_label_experiment: invalid q_pct " + std::to_string(q_pct));
  }
  LabelExperiment out;
  out.isf_names = b.isf_names;
  out.msf_names = b.msf_names;
  const int keep = q_pct / 10;
  for (int i = 0; i < keep; ++i) out.labeled_batches.push_back(b.ranked[size_t(i)]);
  for (int i = keep; i < int(b.ranked.size()); ++i) {
    for (Request r : b.ranked[size_t(i)]) {
      r.label.reset();
      r.rank.reset();
      out.unlabeled.push_back(std::move(r));
    }
  }
  for (const auto& batch : b.unlabeled) {
    out.unlabeled.insert(out.unlabeled.end(), batch.begin(), batch.end());
  }
  return out;
}

namespace {

struct FoldData {
  Dataset train;                    // exploded labeled + all unlabeled
  std::vector<Request> train_ranked;  // fold training requests with ranks
  std::vector<Request> test;        // batch 1's held-out slice
};

Dataset assemble_train(const LabelExperiment& exp, const std::vector<Request>& ranked) {
  Dataset train;
  train.isf_names = exp.isf_names;
  train.msf_names = exp.msf_names;
  auto exploded = explode_rol(std::span<const Request>(ranked));
  train.requests = std::move(exploded);
  for (const auto& r : exp.unlabeled) train.requests.push_back(r);
  return train;
}

// Per-batch fold slices, identical across q levels for a fixed plan seed.
std::vector<std::vector<int>> fold_slices(size_t batch_size, int folds, uint64_t seed) {
  Rng rng(seed);
  std::vector<int> perm(batch_size);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<std::vector<int>> slices(static_cast<size_t>(folds));
  long pos = 0;
  for (int f = 0; f < folds; ++f) {
    long size = long(batch_size) / folds + (f < int(batch_size % size_t(folds)) ? 1 : 0);
    for (long i = 0; i < size; ++i) slices[size_t(f)].push_back(perm[size_t(pos++)]);
  }
  return slices;
}

// Held-out labeled log-likelihood selector for the CL / EM hyperparameter
// sweeps: refits the candidate on a 90% subset and scores the remaining 10%.
struct ValidationSplit {
  Dataset sub_train;
  std::vector<Request> val_ranked;
};

ValidationSplit validation_split(const LabelExperiment& exp,
                                 const std::vector<Request>& train_ranked,
                                 uint64_t seed) {
  Rng rng(seed);
  std::vector<int> perm(train_ranked.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  const size_t val_n = std::max<size_t>(1, train_ranked.size() / 10);

  ValidationSplit out;
  std::vector<Request> sub;
  for (size_t i = 0; i < perm.size(); ++i) {
    if (i < val_n) {
      out.val_ranked.push_back(train_ranked[size_t(perm[i])]);
    } else {
      sub.push_back(train_ranked[size_t(perm[i])]);
    }
  }
  out.sub_train = assemble_train(exp, sub);
  return out;
}

double validation_loglik(const Coefficients& theta, const std::vector<Request>& val_ranked) {
  const auto exploded = explode_rol(std::span<const Request>(val_ranked));
  std::vector<Observation> obs;
  obs.reserve(exploded.size());
  for (const auto& r : exploded) obs.push_back(Observation{&r, *r.label, {}});
  return kernels::log_likelihood(theta, obs);
}

}  // namespace

CvResult run_cv(const ExperimentPlan& plan, const Dataset& d) {
  if (plan.folds < 2) throw DataError("run_cv: folds must be >= 2");
  SgdConfig batch_cfg = plan.sgd;
  const auto batches = make_ranked_batches(d, plan.seed, batch_cfg, plan.batches);

  CvResult result;
  const std::vector<std::string> metric_names = {"rolik", "rd", "pd", "rr"};

  for (int q : plan.q_pcts) {
    const auto exp = build_label_experiment(batches, q);

    std::vector<std::vector<std::vector<int>>> slices;  // per labeled batch
    for (size_t b = 0; b < exp.labeled_batches.size(); ++b) {
      slices.push_back(fold_slices(exp.labeled_batches[b].size(), plan.folds,
                                   Rng::derive_seed(plan.seed, 0xF01D + uint64_t(b))));
    }

    // Rows per (fold, roster slot): filled concurrently, merged in order.
    struct FoldOut {
      std::vector<CvRow> rows;
      std::vector<CvRow> timing;
      int failures = 0;
    };
    std::vector<FoldOut> fold_out(static_cast<size_t>(plan.folds));

#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < plan.folds; ++f) {
      FoldOut& out = fold_out[size_t(f)];
      FoldData fd;
      for (size_t b = 0; b < exp.labeled_batches.size(); ++b) {
        const auto& batch = exp.labeled_batches[b];
        for (int fold_id = 0; fold_id < plan.folds; ++fold_id) {
          for (int i : slices[b][size_t(fold_id)]) {
            if (fold_id == f) {
              if (b == 0) fd.test.push_back(batch[size_t(i)]);
              // held-out slices of batches 2..q/10 are unused
            } else {
              fd.train_ranked.push_back(batch[size_t(i)]);
            }
          }
        }
      }
      fd.train = assemble_train(exp, fd.train_ranked);

      SgdConfig fold_sgd = plan.sgd;
      fold_sgd.seed = Rng::derive_seed(plan.seed, uint64_t(q) * 1000 + uint64_t(f));

      Coefficients baseline_theta;
      RankMetrics baseline_metrics;
      bool baseline_ok = false;

      for (const auto& algo : plan.roster) {
        const auto start = std::chrono::steady_clock::now();
        bool ok = true;
        Coefficients theta;
        try {
          if (algo == "baseline") {
            theta = fit_baseline(fd.train, fold_sgd).theta;
          } else if (algo == "em") {
            const auto split = validation_split(
                exp, fd.train_ranked, Rng::derive_seed(plan.seed, 0x7A11 + uint64_t(f)));
            double best_ll = 0;
            double best_beta = plan.em_betas.front();
            for (size_t bi = 0; bi < plan.em_betas.size(); ++bi) {
              SgdConfig c = fold_sgd;
              c.seed = Rng::derive_seed(fold_sgd.seed, 0xE0 + bi);
              const auto cand = fit_em(split.sub_train, plan.em_betas[bi], c,
                                       plan.em_tolerance, plan.max_em_iter, plan.em_mode);
              const double ll = validation_loglik(cand.theta, split.val_ranked);
              if (bi == 0 || ll > best_ll) {
                best_ll = ll;
                best_beta = plan.em_betas[bi];
              }
            }
            theta = fit_em(fd.train, best_beta, fold_sgd, plan.em_tolerance,
                           plan.max_em_iter, plan.em_mode)
                        .theta;
          } else if (algo == "cl") {
            const auto split = validation_split(
                exp, fd.train_ranked, Rng::derive_seed(plan.seed, 0x7A11 + uint64_t(f)));
            double best_ll = 0;
            int best_k = plan.cl_ks.front();
            for (size_t ki = 0; ki < plan.cl_ks.size(); ++ki) {
              const int K = plan.cl_ks[ki];
              try {
                const auto cand = fit_cl(split.sub_train, K, fold_sgd,
                                         Rng::derive_seed(fold_sgd.seed, 0xC1 + uint64_t(K)));
                const double ll = validation_loglik(cand.theta, split.val_ranked);
                if (ki == 0 || ll > best_ll) {
                  best_ll = ll;
                  best_k = K;
                }
              } catch (const UnderdeterminedModel&) {
                // this K leaves no usable cluster at this data size; skip it
              }
            }
            theta = fit_cl(fd.train, best_k, fold_sgd,
                           Rng::derive_seed(fold_sgd.seed, 0xC1 + uint64_t(best_k)))
                        .theta;
          } else if (algo == "xcl1" || algo == "xcl2") {
            XclConfig xc = plan.xcl;
            xc.seed = Rng::derive_seed(fold_sgd.seed, algo == "xcl1" ? 0x1A : 0x2B);
            theta = (algo == "xcl1" ? fit_xcl1(fd.train, xc, fold_sgd)
                                    : fit_xcl2(fd.train, xc, fold_sgd))
                        .theta;
          } else {
            throw DataError("run_cv: unknown algorithm " + algo);
          }
        } catch (const std::exception&) {
          ok = false;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (!ok) {
          ++out.failures;
          continue;
        }
        const auto metrics = kernels::rank_metrics(theta, fd.test);
        if (algo == "baseline") {
          baseline_theta = theta;
          baseline_metrics = metrics;
          baseline_ok = true;
        }
        const double values[4] = {metrics.rolik, metrics.rd, metrics.pd, metrics.rr};
        for (int mi = 0; mi < 4; ++mi) {
          out.rows.push_back(CvRow{algo, q, f, metric_names[size_t(mi)], values[size_t(mi)]});
        }
        out.timing.push_back(CvRow{algo, q, f, "seconds", secs});
      }
      (void)baseline_ok;
      (void)baseline_theta;
    }

    for (const auto& out : fold_out) {
      result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
      result.timing.insert(result.timing.end(), out.timing.begin(), out.timing.end());
      result.failed_folds += out.failures;
    }
    result.total_folds += plan.folds * int(plan.roster.size());
  }

  // Aggregates: mean per (algorithm, q, metric) and mean relative delta vs
  // the baseline of the same fold, in percent.
  std::map<std::string, std::pair<double, long>> acc;
  std::map<std::string, double> baseline_of;  // "q/fold/metric" -> value
  for (const auto& row : result.rows) {
    if (row.algorithm == "baseline") {
      baseline_of[std::to_string(row.q_pct) + "/" + std::to_string(row.fold) + "/" + row.metric] =
          row.value;
    }
  }
  std::map<std::string, std::pair<double, long>> rel_acc;
  for (const auto& row : result.rows) {
    const std::string key =
        row.algorithm + "/" + std::to_string(row.q_pct) + "/" + row.metric;
    auto& a = acc[key];
    a.first += row.value;
    a.second += 1;
    const auto base = baseline_of.find(std::to_string(row.q_pct) + "/" +
                                       std::to_string(row.fold) + "/" + row.metric);
    if (base != baseline_of.end() && std::abs(base->second) > 1e-12) {
      auto& r = rel_acc[key];
      // Signed baseline, as in (metric - baseline) / baseline * 100%: for
      // rolik (negative, higher better) and rd/pd (lower better) an
      // improvement shows up as a negative delta, for rr as a positive one.
      r.first += (row.value - base->second) / base->second * 100.0;
      r.second += 1;
    }
  }
  for (const auto& [key, a] : acc) result.mean_metrics[key] = a.first / double(a.second);
  for (const auto& [key, a] : rel_acc) result.mean_relative[key] = a.first / double(a.second);
  return result;
}

std::string cv_rows_to_csv(const std::vector<CvRow>& rows, const std::string& value_header) {
  std::ostringstream out;
  out << "algorithm,q_pct,fold,metric," << value_header << "\n";
  char buf[32];
  for (const auto& r : rows) {
    auto res = std::to_chars(buf, buf + sizeof(buf), r.value);
    out << r.algorithm << "," << r.q_pct << "," << r.fold << "," << r.metric << ","
        << std::string_view(buf, size_t(res.ptr - buf)) << "\n";
  }
  return out.str();
}

}  // namespace ssldcm
