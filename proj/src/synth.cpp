#include "ssldcm/synth.hpp"

#include <cmath>

#include "ssldcm/mnl.hpp"
#include "ssldcm/rng.hpp"

namespace ssldcm {

SynthResult synth_generate(const GeneratorConfig& cfg, uint64_t seed) {
  if (cfg.n_requests <= 0 || cfg.alts_per_request < 2 || cfg.msf_dim <= 0 ||
      cfg.isf_dim < 0) {
    throw DataError("synth_generate: non-positive dimensions in config");
  }
  const size_t n_segments = cfg.segment_coefficients.size();
  if (n_segments == 0) throw DataError("synth_generate: at least one segment required");
  if (cfg.segment_isf_means.size() != n_segments) {
    throw DataError("synth_generate: one isf mean per segment required");
  }
  for (const auto& theta : cfg.segment_coefficients) {
    if (int(theta.size()) != cfg.msf_dim) {
      throw DataError("synth_generate: coefficient length must equal msf_dim");
    }
  }
  for (const auto& mu : cfg.segment_isf_means) {
    if (int(mu.size()) != cfg.isf_dim) {
      throw DataError("synth_generate: isf mean length must equal isf_dim");
    }
  }
  std::vector<double> cum_weights(n_segments, 0.0);
  {
    double total = 0;
    for (size_t s = 0; s < n_segments; ++s) {
      double w = cfg.segment_weights.empty() ? 1.0 : cfg.segment_weights[s];
      if (w < 0) throw DataError("synth_generate: negative segment weight");
      total += w;
      cum_weights[s] = total;
    }
    if (total <= 0) throw DataError("synth_generate: segment weights sum to zero");
    for (double& c : cum_weights) c /= total;
  }

  Rng rng(seed);
  SynthResult out;
  out.config = cfg;
  Dataset& d = out.dataset;
  for (int j = 0; j < cfg.isf_dim; ++j) d.isf_names.push_back("v" + std::to_string(j + 1));
  for (int j = 0; j < cfg.msf_dim; ++j) d.msf_names.push_back("x" + std::to_string(j + 1));

  d.requests.reserve(size_t(cfg.n_requests));
  out.segment_of_request.reserve(size_t(cfg.n_requests));
  for (int i = 0; i < cfg.n_requests; ++i) {
    const double u = rng.uniform();
    size_t seg = 0;
    while (seg + 1 < n_segments && u >= cum_weights[seg]) ++seg;
    out.segment_of_request.push_back(int(seg));

    Request r;
    r.id = "r" + std::to_string(i + 1);
    std::vector<double> isf(static_cast<size_t>(cfg.isf_dim));
    for (int j = 0; j < cfg.isf_dim; ++j) {
      isf[size_t(j)] = rng.normal(cfg.segment_isf_means[seg][size_t(j)], cfg.isf_stddev);
    }
    r.alternatives.resize(size_t(cfg.alts_per_request));
    for (auto& a : r.alternatives) {
      a.isf = isf;
      a.msf.resize(size_t(cfg.msf_dim));
      for (double& x : a.msf) x = rng.normal();
    }

    // Label from the segment's MNL probabilities.
    const Coefficients theta(cfg.segment_coefficients[seg]);
    const auto probs = choice_probabilities(theta, r);
    const double pick = rng.uniform();
    double acc = 0;
    int label = cfg.alts_per_request - 1;
    for (int j = 0; j < cfg.alts_per_request; ++j) {
      acc += probs[size_t(j)];
      if (pick < acc) {
        label = j;
        break;
      }
    }
    r.label = label;
    d.requests.push_back(std::move(r));
  }

  if (cfg.standardize_isf && cfg.isf_dim > 0) standardize_isf(d);
  return out;
}

}  // namespace ssldcm
