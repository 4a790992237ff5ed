#include "ssldcm/data.hpp"

#include <algorithm>
#include <cmath>

#include "ssldcm/rng.hpp"

namespace ssldcm {

long Dataset::n_labeled() const {
  long n = 0;
  for (const auto& r : requests) n += r.label.has_value() ? 1 : 0;
  return n;
}

long Dataset::n_unlabeled() const { return long(requests.size()) - n_labeled(); }

std::vector<int> Dataset::labeled_indices() const {
  std::vector<int> out;
  for (int i = 0; i < int(requests.size()); ++i) {
    if (requests[size_t(i)].label) out.push_back(i);
  }
  return out;
}

std::vector<int> Dataset::unlabeled_indices() const {
  std::vector<int> out;
  for (int i = 0; i < int(requests.size()); ++i) {
    if (!requests[size_t(i)].label) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<double>> Dataset::isf_matrix() const {
  std::vector<std::vector<double>> v;
  v.reserve(requests.size());
  for (const auto& r : requests) v.push_back(r.isf());
  return v;
}

void SoftLabeledDataset::validate() const {
  for (const auto& [idx, sl] : imputed) {
    if (idx < 0 || idx >= int(base->requests.size())) {
      throw NumericError("soft label for out-of-range request index " + std::to_string(idx));
    }
    const Request& r = base->requests[size_t(idx)];
    if (std::holds_alternative<int>(sl)) {
      int lab = std::get<int>(sl);
      if (lab < 0 || lab >= r.n_alternatives()) {
        throw NumericError("hard imputation out of range for request " + r.id);
      }
    } else {
      const auto& w = std::get<std::vector<double>>(sl);
      if (int(w.size()) != r.n_alternatives()) {
        throw NumericError("weight vector length mismatch for request " + r.id);
      }
      double sum = 0;
      for (double x : w) {
        if (x < 0) throw NumericError("negative weight for request " + r.id);
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw NumericError("weights of request " + r.id + " sum to " + std::to_string(sum));
      }
    }
  }
}

void validate_dataset(const Dataset& d) {
  const size_t isf_dim = d.isf_names.size();
  const size_t msf_dim = d.msf_names.size();
  for (const auto& r : d.requests) {
    if (r.alternatives.size() < 2) {
      throw DataError("request " + r.id + " has fewer than 2 alternatives");
    }
    const auto& v = r.alternatives.front().isf;
    for (const auto& a : r.alternatives) {
      if (a.isf.size() != isf_dim) {
        throw DataError("request " + r.id + ": isf dimension mismatch");
      }
      if (a.msf.size() != msf_dim) {
        throw DataError("request " + r.id + ": msf dimension mismatch");
      }
      if (a.isf != v) {
        throw DataError("request " + r.id + ": isf differs between alternatives");
      }
      for (double x : a.isf) {
        if (!std::isfinite(x)) throw DataError("request " + r.id + ": non-finite isf value");
      }
      for (double x : a.msf) {
        if (!std::isfinite(x)) throw DataError("request " + r.id + ": non-finite msf value");
      }
    }
    if (r.label && (*r.label < 0 || *r.label >= r.n_alternatives())) {
      throw DataError("request " + r.id + ": label out of range");
    }
    if (r.rank) {
      if (int(r.rank->size()) != r.n_alternatives()) {
        throw DataError("request " + r.id + ": rank length mismatch");
      }
      std::vector<bool> seen(r.rank->size(), false);
      for (int idx : *r.rank) {
        if (idx < 0 || idx >= r.n_alternatives() || seen[size_t(idx)]) {
          throw DataError("request " + r.id + ": rank is not a permutation");
        }
        seen[size_t(idx)] = true;
      }
    }
  }
}

Dataset mask_labels(const Dataset& d, double keep_fraction, uint64_t seed) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw DataError("keep_fraction must be in (0, 1]");
  }
  const long n = long(d.requests.size());
  for (const auto& r : d.requests) {
    if (!r.label) throw DataError("mask_labels requires a fully labeled dataset");
  }
  const long keep = long(std::ceil(keep_fraction * double(n)));
  if (keep <= 0) throw DataError("keep_fraction leaves no labeled requests");

  Rng rng(seed);
  std::vector<int> kept = rng.sample_indices(int(n), int(keep));
  std::vector<bool> keep_mask(size_t(n), false);
  for (int i : kept) keep_mask[size_t(i)] = true;

  Dataset out = d;
  for (size_t i = 0; i < out.requests.size(); ++i) {
    if (!keep_mask[i]) {
      out.requests[i].label.reset();
      out.requests[i].rank.reset();
    }
  }
  return out;
}

void standardize_isf(Dataset& d) {
  if (d.requests.empty() || d.isf_names.empty()) return;
  const size_t dim = d.isf_names.size();
  const double n = double(d.requests.size());
  std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
  for (const auto& r : d.requests) {
    const auto& v = r.isf();
    for (size_t j = 0; j < dim; ++j) mean[j] += v[j];
  }
  for (size_t j = 0; j < dim; ++j) mean[j] /= n;
  for (const auto& r : d.requests) {
    const auto& v = r.isf();
    for (size_t j = 0; j < dim; ++j) {
      const double c = v[j] - mean[j];
      sd[j] += c * c;
    }
  }
  for (size_t j = 0; j < dim; ++j) sd[j] = std::sqrt(sd[j] / n);

  for (auto& r : d.requests) {
    for (auto& a : r.alternatives) {
      for (size_t j = 0; j < dim; ++j) {
        a.isf[j] -= mean[j];
        if (sd[j] > 1e-12) a.isf[j] /= sd[j];
      }
    }
  }
}

}  // namespace ssldcm
