#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ssldcm {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic RNG with explicit distribution transforms. std::mt19937_64 is
// bit-specified by the standard, the std::*_distribution wrappers are not, so
// the few transforms we need are implemented on top of raw 64-bit draws.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

  // Independent stream derived from a root seed and a stream id.
  static Rng derive(uint64_t root, uint64_t stream) {
    return Rng(splitmix64(root ^ splitmix64(stream + 0x6a09e667f3bcc909ULL)));
  }
  static uint64_t derive_seed(uint64_t root, uint64_t stream) {
    return splitmix64(root ^ splitmix64(stream + 0x6a09e667f3bcc909ULL));
  }

  uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53 mantissa bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). Exactly one engine call per draw.
  uint64_t uniform_int(uint64_t n) {
    return uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller, two engine calls per draw.
  double normal() {
    constexpr double kTwoPi = 6.28318530717958647692;
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[size_t(uniform_int(uint64_t(i)))]);
    }
  }

  // k distinct indices from [0, n), order randomized (partial Fisher-Yates).
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[size_t(i)] = i;
    if (k > n) k = n;
    for (int i = 0; i < k; ++i) {
      std::swap(idx[size_t(i)], idx[size_t(i) + size_t(uniform_int(uint64_t(n - i)))]);
    }
    idx.resize(size_t(k));
    return idx;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ssldcm
