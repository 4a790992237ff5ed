#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssldcm/mnl.hpp"

namespace ssldcm {

struct SgdConfig {
  double step_size = 40.0;     // hotel preset; airline preset uses 7
  double sampling_rate = 0.2;  // fraction of observations per iteration
  int max_iterations = 300;
  double tolerance = 1e-6;     // average-coefficient drift threshold
  uint64_t seed = 0;
};

struct FitResult {
  Coefficients theta;
  std::vector<double> loglik_trace;  // full-data log-likelihood per iteration
  std::vector<double> step_sizes;    // step_size / sqrt(t) per iteration
  int iterations = 0;
  bool converged = false;
};

// Weighted MNL fit by minibatch SGD. Iteration t samples
// ceil(sampling_rate * n) observations without replacement and ascends the
// averaged gradient with learning rate step_size / sqrt(t); stops when the
// running-average drift ||mean(theta_1..t) - mean(theta_1..t-1)|| falls below
// tolerance. Deterministic for fixed inputs and seed.
//
// initial_theta defaults to zero. min_obs < 0 applies the identifiability
// floor R + 1; too few observations raise UnderdeterminedModel, and
// ||theta|| > 1e6 raises DivergenceError.
FitResult fit_mnl(std::span<const Observation> obs, const SgdConfig& cfg,
                  const std::vector<double>* initial_theta = nullptr,
                  int min_obs = -1);

}  // namespace ssldcm
