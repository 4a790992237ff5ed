// Times the OpenMP kernels against their serial references on synthetic data.
//
//   ./bench_kernels [n_requests] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssldcm/kmeans.hpp"
#include "ssldcm/metrics.hpp"
#include "ssldcm/mnl.hpp"
#include "ssldcm/synth.hpp"

using namespace ssldcm;

namespace {

template <typename F>
double time_best_of(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 50000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

  GeneratorConfig cfg;
  cfg.n_requests = n;
  cfg.alts_per_request = 5;
  cfg.isf_dim = 8;
  cfg.msf_dim = 6;
  cfg.segment_coefficients = {{0.8, -0.5, 0.3, 1.1, -0.2, 0.4}};
  cfg.segment_isf_means = {std::vector<double>(8, 0.0)};
  const auto synth = synth_generate(cfg, 7);
  const Dataset& d = synth.dataset;
  const auto obs = labeled_observations(d);
  const Coefficients theta({0.5, -0.4, 0.2, 0.9, -0.1, 0.3});

#ifdef _OPENMP
  std::printf("n=%d requests, %d alternatives, %d threads\n", n, cfg.alts_per_request,
              omp_get_max_threads());
#else
  std::printf("n=%d requests, %d alternatives, OpenMP off\n", n, cfg.alts_per_request);
#endif

  volatile double sink = 0;
  report("log_likelihood",
         time_best_of(repeats, [&] { sink = kernels::log_likelihood_serial(theta, obs); }),
         time_best_of(repeats, [&] { sink = kernels::log_likelihood(theta, obs); }));
  report("loglik_gradient",
         time_best_of(repeats,
                      [&] { sink = kernels::log_likelihood_gradient_serial(theta, obs).loglik; }),
         time_best_of(repeats,
                      [&] { sink = kernels::log_likelihood_gradient(theta, obs).loglik; }));

  const auto V = d.isf_matrix();
  std::vector<std::vector<double>> centroids;
  for (int k = 0; k < 8; ++k) centroids.push_back(V[size_t(k) * 97]);
  std::vector<int> assign;
  report("kmeans_assign",
         time_best_of(repeats, [&] { kernels::assign_nearest_serial(V, centroids, assign); }),
         time_best_of(repeats, [&] { kernels::assign_nearest(V, centroids, assign); }));

  // Ranked copy for the metric kernel.
  std::vector<Request> ranked = d.requests;
  for (auto& r : ranked) r.rank = predict_rank(theta, r);
  report("rank_metrics",
         time_best_of(repeats, [&] { sink = kernels::rank_metrics_serial(theta, ranked).rd; }),
         time_best_of(repeats, [&] { sink = kernels::rank_metrics(theta, ranked).rd; }));

  (void)sink;
  return 0;
}
