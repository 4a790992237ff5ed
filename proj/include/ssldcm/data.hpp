#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ssldcm/error.hpp"

namespace ssldcm {

// One alternative of a choice set. `isf` holds the individual-specific
// features and is identical across a request's alternatives (it is the
// clustering vector v_i); `msf` holds the alternative-specific and
// interaction features that enter the utility.
struct Alternative {
  std::vector<double> isf;
  std::vector<double> msf;
};

struct Request {
  std::string id;
  std::vector<Alternative> alternatives;
  std::optional<int> label;              // index of the chosen alternative
  std::optional<std::vector<int>> rank;  // best-first permutation of indices

  int n_alternatives() const { return int(alternatives.size()); }
  const std::vector<double>& isf() const { return alternatives.front().isf; }
};

struct Dataset {
  std::vector<Request> requests;
  std::vector<std::string> isf_names;
  std::vector<std::string> msf_names;

  int n_features() const { return int(msf_names.size()); }
  long n_labeled() const;
  long n_unlabeled() const;
  std::vector<int> labeled_indices() const;
  std::vector<int> unlabeled_indices() const;

  // The individual-specific vectors v_i, one row per request.
  std::vector<std::vector<double>> isf_matrix() const;
};

// Imputed selection for an unlabeled request: either a hard label index or a
// weight vector on the simplex over the request's alternatives.
using SoftLabel = std::variant<int, std::vector<double>>;

struct SoftLabeledDataset {
  const Dataset* base = nullptr;
  std::map<int, SoftLabel> imputed;  // request index -> soft label

  // Simplex sums within 1e-9, hard labels in range. Throws NumericError.
  void validate() const;
};

// Checks every type invariant: >= 2 alternatives per request, isf identical
// within a request, feature dimensions consistent across the dataset, labels
// and ranks valid. Throws DataError naming the first offending request.
void validate_dataset(const Dataset& d);

// Keeps labels on a seeded uniformly random ceil(keep_fraction * n) subset of
// the requests and strips the rest. Features are untouched. Requires a fully
// labeled input.
Dataset mask_labels(const Dataset& d, double keep_fraction, uint64_t seed);

// z-scores each isf column in place over the per-request vectors v_i
// (population sd; near-constant columns are centered only).
void standardize_isf(Dataset& d);

}  // namespace ssldcm
