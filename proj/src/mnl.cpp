#include "ssldcm/mnl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssldcm {

std::vector<Observation> labeled_observations(const Dataset& d) {
  std::vector<Observation> obs;
  obs.reserve(size_t(d.n_labeled()));
  for (const auto& r : d.requests) {
    if (r.label) obs.push_back(Observation{&r, *r.label, {}});
  }
  return obs;
}

void check_observation_weights(std::span<const Observation> obs) {
  for (const auto& o : obs) {
    if (o.soft()) {
      if (int(o.weights.size()) != o.request->n_alternatives()) {
        throw NumericError("weight vector length mismatch for request " + o.request->id);
      }
      double sum = 0;
      for (double w : o.weights) {
        if (w < 0) throw NumericError("negative weight for request " + o.request->id);
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw NumericError("weights of request " + o.request->id + " sum to " +
                           std::to_string(sum));
      }
    } else if (o.label < 0 || o.label >= o.request->n_alternatives()) {
      throw NumericError("label out of range for request " + o.request->id);
    }
  }
}

void utilities(const Coefficients& c, const Request& x, std::vector<double>& out) {
  const size_t J = x.alternatives.size();
  out.resize(J);
  for (size_t j = 0; j < J; ++j) {
    const auto& msf = x.alternatives[j].msf;
    double u = 0;
    for (size_t k = 0; k < msf.size(); ++k) u += msf[k] * c.theta[k];
    out[j] = u;
  }
}

namespace {

// Shared per-observation core. Adds the observation's log-likelihood
// contribution and, when grad is non-null, its gradient contribution.
// Scratch vectors avoid per-call allocation in the hot loops.
double obs_contribution(const Coefficients& c, const Observation& o,
                        std::vector<double>& u, std::vector<double>& p,
                        double* grad) {
  const Request& x = *o.request;
  const size_t J = x.alternatives.size();
  utilities(c, x, u);

  double max_u = u[0];
  for (size_t j = 1; j < J; ++j) max_u = std::max(max_u, u[j]);
  if (!std::isfinite(max_u)) {
    throw NumericError("non-finite utility in request " + x.id);
  }
  double denom = 0;
  p.resize(J);
  for (size_t j = 0; j < J; ++j) {
    p[j] = std::exp(u[j] - max_u);
    denom += p[j];
  }
  const double lse = max_u + std::log(denom);
  for (size_t j = 0; j < J; ++j) p[j] /= denom;

  double ll = 0;
  if (o.soft()) {
    for (size_t j = 0; j < J; ++j) ll += o.weights[j] * (u[j] - lse);
  } else {
    ll = u[size_t(o.label)] - lse;
  }

  if (grad != nullptr) {
    const size_t R = c.theta.size();
    for (size_t j = 0; j < J; ++j) {
      const double w = o.soft() ? o.weights[j] : (int(j) == o.label ? 1.0 : 0.0);
      const double coef = w - p[j];
      if (coef == 0.0) continue;
      const auto& msf = x.alternatives[j].msf;
      for (size_t k = 0; k < R; ++k) grad[k] += coef * msf[k];
    }
  }
  return ll;
}

constexpr size_t kBlock = 256;  // reduction block; fixed so results are
                                // independent of the thread count

}  // namespace

namespace kernels {

double log_likelihood_serial(const Coefficients& c, std::span<const Observation> obs) {
  std::vector<double> u, p;
  double ll = 0;
  for (const auto& o : obs) ll += obs_contribution(c, o, u, p, nullptr);
  return ll;
}

LoglikGrad log_likelihood_gradient_serial(const Coefficients& c,
                                          std::span<const Observation> obs) {
  LoglikGrad out;
  out.grad.assign(c.theta.size(), 0.0);
  std::vector<double> u, p;
  for (const auto& o : obs) {
    out.loglik += obs_contribution(c, o, u, p, out.grad.data());
  }
  return out;
}

double log_likelihood(const Coefficients& c, std::span<const Observation> obs) {
  const size_t n = obs.size();
  const size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(n_blocks, 0.0);

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < long(n_blocks); ++b) {
    std::vector<double> u, p;
    double ll = 0;
    const size_t lo = size_t(b) * kBlock;
    const size_t hi = std::min(lo + kBlock, n);
    for (size_t i = lo; i < hi; ++i) ll += obs_contribution(c, obs[i], u, p, nullptr);
    partial[size_t(b)] = ll;
  }

  double total = 0;
  for (double x : partial) total += x;
  return total;
}

LoglikGrad log_likelihood_gradient(const Coefficients& c,
                                   std::span<const Observation> obs) {
  const size_t n = obs.size();
  const size_t R = c.theta.size();
  const size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial_ll(n_blocks, 0.0);
  std::vector<double> partial_grad(n_blocks * R, 0.0);

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < long(n_blocks); ++b) {
    std::vector<double> u, p;
    double ll = 0;
    double* grad = partial_grad.data() + size_t(b) * R;
    const size_t lo = size_t(b) * kBlock;
    const size_t hi = std::min(lo + kBlock, n);
    for (size_t i = lo; i < hi; ++i) ll += obs_contribution(c, obs[i], u, p, grad);
    partial_ll[size_t(b)] = ll;
  }

  LoglikGrad out;
  out.grad.assign(R, 0.0);
  for (size_t b = 0; b < n_blocks; ++b) {
    out.loglik += partial_ll[b];
    const double* grad = partial_grad.data() + b * R;
    for (size_t k = 0; k < R; ++k) out.grad[k] += grad[k];
  }
  return out;
}

}  // namespace kernels

std::vector<double> choice_probabilities(const Coefficients& c, const Request& x) {
  std::vector<double> u;
  utilities(c, x, u);
  double max_u = *std::max_element(u.begin(), u.end());
  if (!std::isfinite(max_u)) {
    throw NumericError("non-finite utility in request " + x.id);
  }
  double denom = 0;
  std::vector<double> p(u.size());
  for (size_t j = 0; j < u.size(); ++j) {
    p[j] = std::exp(u[j] - max_u);
    denom += p[j];
  }
  for (double& v : p) v /= denom;
  return p;
}

double log_likelihood(const Coefficients& c, std::span<const Observation> obs) {
  check_observation_weights(obs);
  return kernels::log_likelihood(c, obs);
}

double log_likelihood(const Coefficients& c, const Dataset& d) {
  const auto obs = labeled_observations(d);
  return kernels::log_likelihood(c, obs);
}

std::vector<Request> explode_rol(const Request& x) {
  if (!x.rank) throw DataError("explode_rol: request " + x.id + " has no rank");
  const auto& rank = *x.rank;
  const int J = x.n_alternatives();
  std::vector<Request> out;
  out.reserve(size_t(J - 1));

  // Alternatives ranked at position k or below, original order preserved.
  std::vector<int> position(static_cast<size_t>(J));  // alternative -> rank position
  for (int pos = 0; pos < J; ++pos) position[size_t(rank[size_t(pos)])] = pos;

  for (int k = 0; k < J - 1; ++k) {
    Request sub;
    sub.id = x.id + "#" + std::to_string(k + 1);
    for (int j = 0; j < J; ++j) {
      if (position[size_t(j)] < k) continue;
      if (j == rank[size_t(k)]) sub.label = sub.n_alternatives();
      sub.alternatives.push_back(x.alternatives[size_t(j)]);
    }
    out.push_back(std::move(sub));
  }
  return out;
}

std::vector<Request> explode_rol(std::span<const Request> ranked) {
  std::vector<Request> out;
  for (const auto& r : ranked) {
    auto sub = explode_rol(r);
    out.insert(out.end(), std::make_move_iterator(sub.begin()),
               std::make_move_iterator(sub.end()));
  }
  return out;
}

std::vector<int> predict_rank(const Coefficients& c, const Request& x) {
  std::vector<double> u;
  utilities(c, x, u);
  std::vector<int> order(u.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (u[size_t(a)] != u[size_t(b)]) return u[size_t(a)] > u[size_t(b)];
    return a < b;
  });
  return order;
}

}  // namespace ssldcm
