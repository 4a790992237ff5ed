#include "ssldcm/sgd.hpp"

#include <cmath>

#include "ssldcm/rng.hpp"

namespace ssldcm {

namespace {

double l2_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FitResult fit_mnl(std::span<const Observation> obs, const SgdConfig& cfg,
                  const std::vector<double>* initial_theta, int min_obs) {
  if (!(cfg.step_size > 0)) throw DataError("fit_mnl: step_size must be positive");
  if (!(cfg.sampling_rate > 0 && cfg.sampling_rate <= 1)) {
    throw DataError("fit_mnl: sampling_rate must be in (0, 1]");
  }
  if (cfg.max_iterations < 1) throw DataError("fit_mnl: max_iterations must be >= 1");
  if (obs.empty()) throw UnderdeterminedModel("fit_mnl: no observations");

  const int R = int(obs[0].request->alternatives.front().msf.size());
  const int floor = min_obs < 0 ? R + 1 : min_obs;
  if (int(obs.size()) < floor) {
    throw UnderdeterminedModel("fit_mnl: " + std::to_string(obs.size()) +
                               " observations < floor " + std::to_string(floor));
  }
  check_observation_weights(obs);

  FitResult res;
  if (initial_theta != nullptr) {
    if (int(initial_theta->size()) != R) throw DataError("fit_mnl: initial theta size mismatch");
    res.theta = Coefficients(*initial_theta);
  } else {
    res.theta = Coefficients::zeros(R);
  }

  const long n = long(obs.size());
  const long batch_size = long(std::ceil(cfg.sampling_rate * double(n)));
  Rng rng(cfg.seed);

  std::vector<Observation> batch;
  batch.reserve(size_t(batch_size));
  std::vector<double> theta_sum(size_t(R), 0.0);
  std::vector<double> prev_mean(size_t(R), 0.0);

  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const auto idx = rng.sample_indices(int(n), int(batch_size));
    batch.clear();
    for (int i : idx) batch.push_back(obs[size_t(i)]);

    const auto lg = kernels::log_likelihood_gradient(res.theta, batch);
    const double lr = cfg.step_size / std::sqrt(double(t));
    for (int k = 0; k < R; ++k) {
      res.theta.theta[size_t(k)] += lr * lg.grad[size_t(k)] / double(batch_size);
    }
    if (l2_norm(res.theta.theta) > 1e6) {
      throw DivergenceError("fit_mnl: theta norm exceeded 1e6 at iteration " +
                            std::to_string(t));
    }

    res.step_sizes.push_back(lr);
    res.loglik_trace.push_back(kernels::log_likelihood(res.theta, obs));
    res.iterations = t;

    // Stop when the running average of the iterates settles.
    for (int k = 0; k < R; ++k) theta_sum[size_t(k)] += res.theta.theta[size_t(k)];
    if (t >= 2) {
      double drift = 0;
      for (int k = 0; k < R; ++k) {
        const double mean_k = theta_sum[size_t(k)] / double(t);
        const double dd = mean_k - prev_mean[size_t(k)];
        drift += dd * dd;
      }
      if (std::sqrt(drift) < cfg.tolerance) {
        res.converged = true;
        break;
      }
    }
    for (int k = 0; k < R; ++k) prev_mean[size_t(k)] = theta_sum[size_t(k)] / double(t);
  }
  return res;
}

}  // namespace ssldcm
