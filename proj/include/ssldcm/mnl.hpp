#pragma once

#include <span>
#include <vector>

#include "ssldcm/data.hpp"

namespace ssldcm {

// Utility weights, one per msf feature.
struct Coefficients {
  std::vector<double> theta;

  Coefficients() = default;
  explicit Coefficients(std::vector<double> t) : theta(std::move(t)) {}
  static Coefficients zeros(int r) { return Coefficients(std::vector<double>(size_t(r), 0.0)); }
  int size() const { return int(theta.size()); }
};

// A fitting observation: one request plus its target, either a hard label or
// soft per-alternative weights summing to 1.
struct Observation {
  const Request* request = nullptr;
  int label = -1;               // >= 0 means hard target
  std::vector<double> weights;  // non-empty means soft target

  bool soft() const { return !weights.empty(); }
};

// Hard observations for the labeled requests, in dataset order.
std::vector<Observation> labeled_observations(const Dataset& d);

// Throws NumericError if any soft weight row does not sum to 1 within 1e-9,
// has negative entries, or has the wrong length.
void check_observation_weights(std::span<const Observation> obs);

// Utilities s_ij . theta for every alternative of a request.
void utilities(const Coefficients& c, const Request& x, std::vector<double>& out);

// Softmax of the utilities, computed with max subtraction so large utilities
// cannot overflow. Entries are strictly positive and sum to 1. Throws
// NumericError naming the request on a non-finite utility.
std::vector<double> choice_probabilities(const Coefficients& c, const Request& x);

struct LoglikGrad {
  double loglik = 0.0;
  std::vector<double> grad;
};

namespace kernels {

// Serial references, kept for the tests and the benchmark target.
double log_likelihood_serial(const Coefficients& c, std::span<const Observation> obs);
LoglikGrad log_likelihood_gradient_serial(const Coefficients& c,
                                          std::span<const Observation> obs);

// OpenMP versions. Fixed-size blocks are accumulated independently and then
// reduced in block order, so results are bit-identical for any thread count.
double log_likelihood(const Coefficients& c, std::span<const Observation> obs);
LoglikGrad log_likelihood_gradient(const Coefficients& c,
                                   std::span<const Observation> obs);

}  // namespace kernels

// Weighted log-likelihood sum(i) sum(j) w_ij log prob_ij. Validates soft
// weight rows, then delegates to the parallel kernel.
double log_likelihood(const Coefficients& c, std::span<const Observation> obs);

// Convenience overload over a dataset's labeled requests.
double log_likelihood(const Coefficients& c, const Dataset& d);

// ROL explosion: a request ranked over |X| alternatives becomes |X|-1 MNL
// requests over shrinking choice sets; the k-th keeps the alternatives ranked
// k.. (original order preserved) with the rank-k alternative chosen.
std::vector<Request> explode_rol(const Request& x);
std::vector<Request> explode_rol(std::span<const Request> ranked);

// Alternatives sorted by utility, best first; ties go to the lower index.
std::vector<int> predict_rank(const Coefficients& c, const Request& x);

}  // namespace ssldcm
