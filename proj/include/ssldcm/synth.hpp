#pragma once

#include <cstdint>
#include <vector>

#include "ssldcm/data.hpp"

namespace ssldcm {

// Synthetic choice data. Requests are drawn from segments, each with its own
// utility coefficients and isf center; labels are sampled from the segment's
// MNL probabilities, so the generator doubles as a recovery oracle.
struct GeneratorConfig {
  int n_requests = 0;
  int alts_per_request = 0;
  int isf_dim = 0;
  int msf_dim = 0;
  std::vector<std::vector<double>> segment_coefficients;  // one theta* per segment
  std::vector<std::vector<double>> segment_isf_means;     // one center per segment
  std::vector<double> segment_weights;                    // empty -> uniform
  double isf_stddev = 1.0;
  bool standardize_isf = true;
};

struct SynthResult {
  Dataset dataset;
  std::vector<int> segment_of_request;  // generator truth, kept for recovery tests
  GeneratorConfig config;
};

// Bit-identical for identical (cfg, seed).
SynthResult synth_generate(const GeneratorConfig& cfg, uint64_t seed);

}  // namespace ssldcm
