#include <algorithm>
#include <cmath>

#include "ssldcm/rng.hpp"
#include "ssldcm/ssl.hpp"

namespace ssldcm {

// The hidden-label space factorizes per request (requests are independent
// under the MNL likelihood), so the E-step posterior for an unlabeled request
// is just its choice-probability vector under the current theta. The M-step
// maximizes the expected complete-data log-likelihood over the labeled data
// plus the sampled unlabeled data; the ascent guard below never accepts a
// theta that lowers it, so at beta = 1 the observed-data log-likelihood is
// monotone across iterations.
FitReport fit_em(const Dataset& d, double beta, const SgdConfig& cfg,
                 double em_tolerance, int max_em_iter, EmMode mode) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DataError("fit_em: beta must be in (0, 1]");
  if (max_em_iter < 1) throw DataError("fit_em: max_em_iter must be >= 1");

  const auto labeled = labeled_observations(d);
  const auto base = fit_mnl(labeled, cfg);

  FitReport r;
  r.algorithm = "em";
  r.feature_names = d.msf_names;
  r.theta = base.theta;
  r.n_labeled = long(labeled.size());
  r.extras["beta"] = beta;
  r.loglik_trace.push_back(kernels::log_likelihood(base.theta, labeled));

  const auto unlabeled = d.unlabeled_indices();
  const long m_count = long(unlabeled.size());
  const long sample_size = long(std::ceil(beta * double(m_count)));
  if (m_count == 0 || sample_size == 0) {
    // Nothing for the E-step; the labeled-only fit is the answer.
    r.loglik = r.loglik_trace.back();
    r.n_discarded = m_count;
    r.converged = true;
    return r;
  }

  const int R = d.n_features();
  Rng sampler = Rng::derive(cfg.seed, 0xE5);
  std::vector<double> theta_sum(size_t(R), 0.0);
  std::vector<double> prev_mean(size_t(R), 0.0);
  r.converged = false;

  for (int t = 1; t <= max_em_iter; ++t) {
    // E-step: posterior soft labels for a fresh beta-sample of D^U.
    const auto pick = sampler.sample_indices(int(m_count), int(sample_size));
    std::vector<Observation> obs = labeled;
    obs.reserve(labeled.size() + size_t(sample_size));
    for (int s : pick) {
      const Request& req = d.requests[size_t(unlabeled[size_t(s)])];
      auto probs = choice_probabilities(r.theta, req);
      if (mode == EmMode::kHard) {
        const int argmax = int(std::max_element(probs.begin(), probs.end()) - probs.begin());
        obs.push_back(Observation{&req, argmax, {}});
      } else {
        obs.push_back(Observation{&req, -1, std::move(probs)});
      }
    }

    // M-step, warm-started at the current theta.
    const double q_old = kernels::log_likelihood(r.theta, obs);
    SgdConfig mcfg = cfg;
    mcfg.seed = Rng::derive_seed(cfg.seed, 0x300 + uint64_t(t));
    const auto refit = fit_mnl(obs, mcfg, &r.theta.theta);
    if (refit.loglik_trace.back() >= q_old) {
      r.theta = refit.theta;
    }

    r.loglik_trace.push_back(kernels::log_likelihood(r.theta, labeled));
    r.iterations = t;

    for (int k = 0; k < R; ++k) theta_sum[size_t(k)] += r.theta.theta[size_t(k)];
    if (t >= 2) {
      double drift = 0;
      for (int k = 0; k < R; ++k) {
        const double dd = theta_sum[size_t(k)] / double(t) - prev_mean[size_t(k)];
        drift += dd * dd;
      }
      if (std::sqrt(drift) < em_tolerance) {
        r.converged = true;
        break;
      }
    }
    for (int k = 0; k < R; ++k) prev_mean[size_t(k)] = theta_sum[size_t(k)] / double(t);
  }

  r.loglik = r.loglik_trace.back();
  r.n_imputed = sample_size;
  r.n_discarded = m_count - sample_size;
  return r;
}

}  // namespace ssldcm
