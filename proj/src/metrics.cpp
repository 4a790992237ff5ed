#include "ssldcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ssldcm {

double rolik(const Coefficients& c, const Request& x) {
  if (!x.rank) throw DataError("rolik: request " + x.id + " has no rank");
  const auto& rank = *x.rank;
  const size_t J = x.alternatives.size();
  std::vector<double> u;
  utilities(c, x, u);

  double total = 0;
  for (size_t k = 0; k + 1 < J; ++k) {
    // log-softmax of the position-k item among the items ranked k and below
    double max_u = u[size_t(rank[k])];
    for (size_t j = k; j < J; ++j) max_u = std::max(max_u, u[size_t(rank[j])]);
    if (!std::isfinite(max_u)) throw NumericError("rolik: non-finite utility in " + x.id);
    double denom = 0;
    for (size_t j = k; j < J; ++j) denom += std::exp(u[size_t(rank[j])] - max_u);
    total += u[size_t(rank[k])] - max_u - std::log(denom);
  }
  return total;
}

double kendall_tau(std::span<const int> r1, std::span<const int> r2) {
  const size_t n = r1.size();
  if (n != r2.size()) throw DataError("kendall_tau: length mismatch");
  if (n < 2) throw DataError("kendall_tau: need length >= 2");

  // Positions of each item in both rankings.
  std::vector<int> p1(n), p2(n);
  for (size_t pos = 0; pos < n; ++pos) {
    p1[size_t(r1[pos])] = int(pos);
    p2[size_t(r2[pos])] = int(pos);
  }

  long concordant = 0, discordant = 0, ties1 = 0, ties2 = 0;
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + 1; b < n; ++b) {
      const long d1 = p1[a] - p1[b];
      const long d2 = p2[a] - p2[b];
      if (d1 == 0 && d2 == 0) continue;
      if (d1 == 0) {
        ++ties1;
      } else if (d2 == 0) {
        ++ties2;
      } else if ((d1 > 0) == (d2 > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  // tau-b; reduces to tau-a on tie-free permutations.
  const double n1 = double(concordant + discordant + ties1);
  const double n2 = double(concordant + discordant + ties2);
  const double denom = std::sqrt(n1) * std::sqrt(n2);
  if (denom == 0) throw DataError("kendall_tau: degenerate rankings");
  return double(concordant - discordant) / denom;
}

double rank_difference(std::span<const int> r_true, std::span<const int> r_est) {
  return (1.0 - kendall_tau(r_true, r_est)) / 2.0;
}

double position_difference(std::span<const int> r_est, int chosen) {
  const size_t J = r_est.size();
  if (J < 2) throw DataError("position_difference: need >= 2 alternatives");
  for (size_t pos = 0; pos < J; ++pos) {
    if (r_est[pos] == chosen) {
      return double(pos) / double(J - 1);  // (p - 1) / (|X| - 1), p 1-based
    }
  }
  throw DataError("position_difference: chosen alternative not in the permutation");
}

double mean_reciprocal_rank(std::span<const int> positions) {
  if (positions.empty()) throw DataError("mean_reciprocal_rank: empty input");
  double s = 0;
  for (int p : positions) {
    if (p < 1) throw DataError("mean_reciprocal_rank: positions are 1-based");
    s += 1.0 / double(p);
  }
  return s / double(positions.size());
}

namespace {

// Indices of the ceil(p * J) smallest values, ties to the lower index.
std::vector<int> lowest_set(const std::vector<double>& values, double p_pct) {
  const int J = int(values.size());
  const int take = int(std::ceil(p_pct * double(J)));
  std::vector<int> order(static_cast<size_t>(J));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[size_t(a)] < values[size_t(b)];
  });
  order.resize(size_t(std::min(take, J)));
  return order;
}

}  // namespace

MfMhResult mf_mh(const std::vector<std::vector<double>>& fares,
                 const std::vector<std::vector<double>>& quality,
                 const std::vector<int>& predictions, double p_pct) {
  if (!(p_pct > 0.0 && p_pct < 1.0)) throw DataError("mf_mh: p_pct must be in (0, 1)");
  if (fares.size() != quality.size() || fares.size() != predictions.size()) {
    throw DataError("mf_mh: fares, quality and predictions must align");
  }

  MfMhResult out;
  double mf_sum = 0, mh_sum = 0;
  long used = 0;
  for (size_t i = 0; i < fares.size(); ++i) {
    const auto& F = fares[i];
    const auto& H = quality[i];
    const int J = int(F.size());
    const int take = int(std::ceil(p_pct * double(J)));
    if (J < 1 || take < 1 || H.size() != F.size()) {
      ++out.skipped;
      continue;
    }
    const int pred = predictions[i];
    if (pred < 0 || pred >= J) throw DataError("mf_mh: prediction out of range");

    const auto A = lowest_set(F, p_pct);
    const auto B = lowest_set(H, p_pct);
    std::vector<bool> in_z(size_t(J), false);
    for (int a : A) in_z[size_t(a)] = true;
    for (int b : B) in_z[size_t(b)] = true;

    double zf = 0, zh = 0, xf = 0, xh = 0;
    long zn = 0;
    for (int j = 0; j < J; ++j) {
      xf += F[size_t(j)];
      xh += H[size_t(j)];
      if (in_z[size_t(j)]) {
        zf += F[size_t(j)];
        zh += H[size_t(j)];
        ++zn;
      }
    }
    const double x_mean_f = xf / double(J);
    const double x_mean_h = xh / double(J);
    if (std::abs(x_mean_f) < 1e-12 || std::abs(x_mean_h) < 1e-12) {
      ++out.skipped;
      continue;
    }
    mf_sum += (F[size_t(pred)] - zf / double(zn)) / x_mean_f;
    mh_sum += (H[size_t(pred)] - zh / double(zn)) / x_mean_h;
    ++used;
  }
  if (used == 0) throw DataError("mf_mh: no usable requests");
  out.mf = 100.0 * mf_sum / double(used);
  out.mh = 100.0 * mh_sum / double(used);
  return out;
}

namespace kernels {

namespace {

RankMetrics one_request(const Coefficients& c, const Request& x) {
  RankMetrics m;
  const auto re = predict_rank(c, x);
  m.rolik = ssldcm::rolik(c, x);
  m.rd = rank_difference(*x.rank, re);
  m.pd = position_difference(re, *x.label);
  int p = 1;
  for (size_t pos = 0; pos < re.size(); ++pos) {
    if (re[pos] == *x.label) {
      p = int(pos) + 1;
      break;
    }
  }
  m.rr = 1.0 / double(p);
  return m;
}

constexpr size_t kBlock = 256;

}  // namespace

RankMetrics rank_metrics_serial(const Coefficients& c, std::span<const Request> test) {
  if (test.empty()) throw DataError("rank_metrics: empty test set");
  RankMetrics sum;
  for (const auto& x : test) {
    const auto m = one_request(c, x);
    sum.rolik += m.rolik;
    sum.rd += m.rd;
    sum.pd += m.pd;
    sum.rr += m.rr;
  }
  const double n = double(test.size());
  return {sum.rolik / n, sum.rd / n, sum.pd / n, sum.rr / n};
}

RankMetrics rank_metrics(const Coefficients& c, std::span<const Request> test) {
  if (test.empty()) throw DataError("rank_metrics: empty test set");
  const size_t n = test.size();
  const size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<RankMetrics> partial(n_blocks);

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < long(n_blocks); ++b) {
    RankMetrics sum;
    const size_t lo = size_t(b) * kBlock;
    const size_t hi = std::min(lo + kBlock, n);
    for (size_t i = lo; i < hi; ++i) {
      const auto m = one_request(c, test[i]);
      sum.rolik += m.rolik;
      sum.rd += m.rd;
      sum.pd += m.pd;
      sum.rr += m.rr;
    }
    partial[size_t(b)] = sum;
  }

  RankMetrics sum;
  for (const auto& p : partial) {
    sum.rolik += p.rolik;
    sum.rd += p.rd;
    sum.pd += p.pd;
    sum.rr += p.rr;
  }
  const double dn = double(n);
  return {sum.rolik / dn, sum.rd / dn, sum.pd / dn, sum.rr / dn};
}

}  // namespace kernels

}  // namespace ssldcm
