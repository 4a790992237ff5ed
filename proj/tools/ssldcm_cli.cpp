// Command-line surface: fit choice models, run the cross-validation
// experiment, run the airline labeling pipeline, generate synthetic data and
// validate dataset files.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric/fit failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ssldcm/airline.hpp"
#include "ssldcm/csv.hpp"
#include "ssldcm/experiment.hpp"
#include "ssldcm/metrics.hpp"
#include "ssldcm/report.hpp"
#include "ssldcm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssldcm;

namespace {

struct SgdFlags {
  std::string preset = "hotel";
  double step = -1;
  double rate = -1;
  int iters = -1;
  double tol = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "SGD preset: hotel (step 40, rate 0.2) or airline (step 7, rate 0.8)")
        ->check(CLI::IsMember({"hotel", "airline"}));
    cmd->add_option("--step", step, "SGD step size (overrides the preset)");
    cmd->add_option("--rate", rate, "SGD sampling rate in (0, 1]");
    cmd->add_option("--iters", iters, "SGD max iterations");
    cmd->add_option("--tol", tol, "SGD average-coefficient drift tolerance");
  }

  SgdConfig build(uint64_t seed) const {
    SgdConfig cfg;
    if (preset == "airline") {
      cfg.step_size = 7.0;
      cfg.sampling_rate = 0.8;
    }
    if (step > 0) cfg.step_size = step;
    if (rate > 0) cfg.sampling_rate = rate;
    if (iters > 0) cfg.max_iterations = iters;
    if (tol > 0) cfg.tolerance = tol;
    cfg.seed = seed;
    return cfg;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

GeneratorConfig generator_from_json(const json& j) {
  GeneratorConfig cfg;
  cfg.n_requests = j.value("n_requests", 0);
  cfg.alts_per_request = j.value("alts_per_request", 0);
  cfg.isf_dim = j.value("isf_dim", 0);
  cfg.msf_dim = j.value("msf_dim", 0);
  if (j.contains("segment_coefficients")) {
    cfg.segment_coefficients = j["segment_coefficients"].get<std::vector<std::vector<double>>>();
  }
  if (j.contains("segment_isf_means")) {
    cfg.segment_isf_means = j["segment_isf_means"].get<std::vector<std::vector<double>>>();
  }
  if (j.contains("segment_weights")) {
    cfg.segment_weights = j["segment_weights"].get<std::vector<double>>();
  }
  cfg.isf_stddev = j.value("isf_stddev", 1.0);
  cfg.standardize_isf = j.value("standardize_isf", true);
  return cfg;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return j;
}

int run_fit(const std::string& algo, const std::string& data_path, uint64_t seed,
            const std::string& out_path, const SgdFlags& sgd_flags, bool raw_isf,
            int k, double beta, const std::string& em_mode, double em_tol,
            int em_iters, int k_max, int iter_num_max, int m_floor) {
  LoadOptions opts;
  opts.standardize_isf = !raw_isf;
  const Dataset d = load_dataset(data_path, opts);
  const SgdConfig cfg = sgd_flags.build(seed);

  FitReport report;
  if (algo == "baseline") {
    report = fit_baseline(d, cfg);
  } else if (algo == "em") {
    const EmMode mode = em_mode == "hard" ? EmMode::kHard : EmMode::kSoft;
    report = fit_em(d, beta, cfg, em_tol, em_iters, mode);
  } else if (algo == "cl") {
    report = fit_cl(d, k, cfg, Rng::derive_seed(seed, 0xC1), m_floor);
  } else {
    XclConfig xcl;
    xcl.k_max = k_max;
    xcl.iter_num_max = iter_num_max;
    xcl.m = m_floor;
    xcl.seed = Rng::derive_seed(seed, 0xCC);
    report = algo == "xcl1" ? fit_xcl1(d, xcl, cfg) : fit_xcl2(d, xcl, cfg);
  }
  write_fit_report(out_path, report);
  std::cout << "wrote " << out_path << " (algorithm " << report.algorithm << ", loglik "
            << report.loglik << ")\n";
  return 0;
}

int run_experiment(const std::string& data_path, ExperimentPlan plan,
                   const std::string& out_dir) {
  const Dataset d = load_dataset(data_path);
  const CvResult res = run_cv(plan, d);

  fs::create_directories(out_dir);
  write_text(out_dir + "/results.csv", cv_rows_to_csv(res.rows));
  write_text(out_dir + "/timing.csv", cv_rows_to_csv(res.timing, "seconds"));
  write_text(out_dir + "/summary.json", cv_summary_to_json(res, plan) + "\n");
  std::cout << "wrote " << out_dir << "/results.csv (" << res.rows.size() << " rows), "
            << res.failed_folds << "/" << res.total_folds << " fold fits failed\n";
  return res.failed_folds == res.total_folds ? 3 : 0;
}

int run_airline(const std::string& data_path, uint64_t seed, const std::string& out_dir,
                const std::vector<std::string>& roster, const SgdFlags& sgd_flags,
                bool no_interactions) {
  const auto requests = load_airline_csv(data_path);
  AirlineOptions opts;
  opts.with_interactions = !no_interactions;
  const AirlineDataset air = airline_label(requests, opts);
  const Dataset& d = air.dataset;

  fs::create_directories(out_dir);
  json summary;
  summary["n_requests"] = d.requests.size();
  summary["n_labeled"] = air.n_labeled;
  summary["n_unlabeled"] = long(d.requests.size()) - air.n_labeled;

  std::vector<CvRow> mf_rows;
  json algos = json::object();
  for (const auto& algo : roster) {
    SgdConfig cfg = sgd_flags.build(Rng::derive_seed(seed, std::hash<std::string>{}(algo)));
    FitReport report;
    if (algo == "baseline") {
      report = fit_baseline(d, cfg);
    } else if (algo == "em") {
      report = fit_em(d, 0.10, cfg);
    } else if (algo == "cl") {
      report = fit_cl(d, 2, cfg, Rng::derive_seed(seed, 0xC1));
    } else if (algo == "xcl1" || algo == "xcl2") {
      XclConfig xcl;
      xcl.seed = Rng::derive_seed(seed, 0xCC);
      report = algo == "xcl1" ? fit_xcl1(d, xcl, cfg) : fit_xcl2(d, xcl, cfg);
    } else {
      throw DataError("unknown algorithm " + algo);
    }

    // Predicted itinerary per request, then the accuracy grid.
    std::vector<int> predictions;
    predictions.reserve(d.requests.size());
    for (const auto& r : d.requests) {
      const auto p = choice_probabilities(report.theta, r);
      predictions.push_back(int(std::max_element(p.begin(), p.end()) - p.begin()));
    }
    json acc = json::object();
    for (int p = 10; p <= 50; p += 10) {
      const auto res = mf_mh(air.fares, air.quality, predictions, double(p) / 100.0);
      acc[std::to_string(p)] = json{{"mf", res.mf}, {"mh", res.mh}, {"skipped", res.skipped}};
      mf_rows.push_back(CvRow{algo, p, 0, "mf", res.mf});
      mf_rows.push_back(CvRow{algo, p, 0, "mh", res.mh});
    }

    // Value of time: fare-gap coefficient is utility/dollar, departure
    // differences are utility/hour; the ratio lands at dollars per hour.
    json vot = json::object();
    const auto& names = d.msf_names;
    const auto fare_it = std::find(names.begin(), names.end(), "fare_gap");
    if (fare_it != names.end()) {
      const double theta_fare = report.theta.theta[size_t(fare_it - names.begin())];
      if (std::abs(theta_fare) > 1e-12) {
        for (const char* dep : {"dep1_diff", "dep2_diff"}) {
          const auto it = std::find(names.begin(), names.end(), dep);
          if (it != names.end()) {
            vot[dep] = report.theta.theta[size_t(it - names.begin())] / theta_fare;
          }
        }
      }
    }

    json entry;
    entry["theta"] = report.theta.theta;
    entry["feature_names"] = report.feature_names;
    entry["loglik"] = report.loglik;
    entry["counts"] = json{{"labeled", report.n_labeled},
                           {"imputed", report.n_imputed},
                           {"discarded", report.n_discarded}};
    entry["value_of_time"] = vot;
    entry["accuracy"] = acc;
    algos[algo] = entry;
  }
  summary["algorithms"] = algos;

  write_text(out_dir + "/airline_report.json", summary.dump(2) + "\n");
  write_text(out_dir + "/mf_mh.csv", cv_rows_to_csv(mf_rows, "percent"));
  std::cout << "labeled " << air.n_labeled << " of " << d.requests.size()
            << " requests; wrote " << out_dir << "/airline_report.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-supervised discrete choice model calibration"};
  app.require_subcommand(1);

  // --- synth ---
  auto* synth = app.add_subcommand("synth", "generate synthetic datasets");
  std::string synth_kind = "choice", synth_out, synth_config, synth_theta = "1.0,-2.0";
  uint64_t synth_seed = 0;
  int synth_n = 1000, synth_alts = 3, synth_isf = 2, synth_msf = 2, synth_itins = 5;
  double synth_planted = 0.5;
  synth->add_option("--kind", synth_kind)->check(CLI::IsMember({"choice", "airline"}));
  synth->add_option("--out", synth_out, "output CSV path")->required();
  synth->add_option("--seed", synth_seed, "RNG seed")->required();
  synth->add_option("--config", synth_config, "generator config JSON (choice kind)");
  synth->add_option("--n", synth_n, "number of requests");
  synth->add_option("--alts", synth_alts, "alternatives per request");
  synth->add_option("--isf-dim", synth_isf);
  synth->add_option("--msf-dim", synth_msf);
  synth->add_option("--theta", synth_theta, "single-segment coefficients, comma separated");
  synth->add_option("--itins", synth_itins, "itineraries per request (airline kind)");
  synth->add_option("--planted", synth_planted, "planted joint-minimizer fraction (airline)");

  // --- validate ---
  auto* validate = app.add_subcommand("validate", "check a dataset file's invariants");
  std::string validate_data;
  validate->add_option("--data", validate_data)->required();

  // --- fit ---
  auto* fit = app.add_subcommand("fit", "calibrate a model on a dataset");
  std::string fit_algo, fit_data, fit_out = "report.json", fit_em_mode = "soft";
  uint64_t fit_seed = 0;
  bool fit_raw_isf = false;
  int fit_k = 2, fit_em_iters = 50, fit_kmax = 6, fit_iternum = 10, fit_m = -1;
  double fit_beta = 0.1, fit_em_tol = 0.01;
  SgdFlags fit_sgd;
  fit->add_option("--algo", fit_algo, "baseline|em|cl|xcl1|xcl2")->required();
  fit->add_option("--data", fit_data)->required();
  fit->add_option("--seed", fit_seed)->required();
  fit->add_option("--out", fit_out);
  fit->add_flag("--raw-isf", fit_raw_isf, "skip isf standardization");
  fit->add_option("--k", fit_k, "cluster count for cl");
  fit->add_option("--beta", fit_beta, "EM unlabeled sampling fraction");
  fit->add_option("--em-mode", fit_em_mode)->check(CLI::IsMember({"soft", "hard"}));
  fit->add_option("--em-tol", fit_em_tol);
  fit->add_option("--em-iters", fit_em_iters);
  fit->add_option("--kmax", fit_kmax, "XCL maximum cluster count");
  fit->add_option("--iter-num-max", fit_iternum, "XCL split retry budget");
  fit->add_option("--m", fit_m, "labeled-count floor per cluster (-1 = max(R+1, 20))");
  fit_sgd.attach(fit);

  // --- experiment ---
  auto* exp = app.add_subcommand("experiment", "ranked cross-validation protocol");
  std::string exp_data, exp_out = "results", exp_config;
  uint64_t exp_seed = 0;
  std::vector<int> exp_q;
  std::vector<std::string> exp_roster;
  int exp_folds = -1;
  SgdFlags exp_sgd;
  exp->add_option("--data", exp_data);
  exp->add_option("--seed", exp_seed);
  exp->add_option("--config", exp_config, "experiment plan JSON");
  exp->add_option("--q", exp_q, "labeled percentages (multiples of 10)");
  exp->add_option("--roster", exp_roster, "algorithms to run");
  exp->add_option("--folds", exp_folds);
  exp->add_option("--out-dir", exp_out);
  exp_sgd.attach(exp);

  // --- airline ---
  auto* air = app.add_subcommand("airline", "label itineraries and fit the roster");
  std::string air_data, air_out = "airline_results";
  uint64_t air_seed = 0;
  std::vector<std::string> air_roster = {"baseline", "em", "cl", "xcl1", "xcl2"};
  bool air_nointer = false;
  SgdFlags air_sgd;
  air_sgd.preset = "airline";
  air->add_option("--data", air_data)->required();
  air->add_option("--seed", air_seed)->required();
  air->add_option("--out-dir", air_out);
  air->add_option("--roster", air_roster);
  air->add_flag("--no-interactions", air_nointer);
  air_sgd.attach(air);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) {
      if (synth_kind == "airline") {
        AirlineSynthConfig cfg;
        cfg.n_requests = synth_n;
        cfg.itins_per_request = synth_itins;
        cfg.planted_fraction = synth_planted;
        write_airline_csv(synth_out, airline_synth(cfg, synth_seed));
      } else {
        GeneratorConfig cfg;
        if (!synth_config.empty()) {
          cfg = generator_from_json(load_json(synth_config));
        } else {
          cfg.n_requests = synth_n;
          cfg.alts_per_request = synth_alts;
          cfg.isf_dim = synth_isf;
          cfg.msf_dim = synth_msf;
          std::vector<double> theta;
          std::stringstream ss(synth_theta);
          std::string tok;
          while (std::getline(ss, tok, ',')) theta.push_back(std::stod(tok));
          if (int(theta.size()) != synth_msf) {
            std::cerr << "--theta must list msf-dim coefficients\n";
            return 1;
          }
          cfg.segment_coefficients = {theta};
          cfg.segment_isf_means = {std::vector<double>(size_t(synth_isf), 0.0)};
        }
        write_dataset(synth_out, synth_generate(cfg, synth_seed).dataset);
      }
      std::cout << "wrote " << synth_out << "\n";
      return 0;
    }

    if (validate->parsed()) {
      const Dataset d = load_dataset(validate_data);
      std::cout << validate_data << ": " << d.requests.size() << " requests ("
                << d.n_labeled() << " labeled, " << d.n_unlabeled() << " unlabeled), "
                << d.isf_names.size() << " isf + " << d.msf_names.size()
                << " msf features, all invariants hold\n";
      return 0;
    }

    if (fit->parsed()) {
      const std::set<std::string> known = {"baseline", "em", "cl", "xcl1", "xcl2"};
      if (!known.count(fit_algo)) {
        std::cerr << "unknown algorithm '" << fit_algo << "'\n";
        return 1;
      }
      if (fit_algo == "cl" && fit_k < 1) {
        std::cerr << "invalid cluster count K=" << fit_k << " (must be >= 1)\n";
        return 1;
      }
      return run_fit(fit_algo, fit_data, fit_seed, fit_out, fit_sgd, fit_raw_isf, fit_k,
                     fit_beta, fit_em_mode, fit_em_tol, fit_em_iters, fit_kmax,
                     fit_iternum, fit_m);
    }

    if (exp->parsed()) {
      ExperimentPlan plan;
      std::string data_path = exp_data;
      std::string out_dir = exp_out;
      if (!exp_config.empty()) {
        const json j = load_json(exp_config);
        if (j.contains("data")) data_path = j["data"].get<std::string>();
        if (j.contains("out_dir")) out_dir = j["out_dir"].get<std::string>();
        if (j.contains("seed")) plan.seed = j["seed"].get<uint64_t>();
        if (j.contains("q_pcts")) plan.q_pcts = j["q_pcts"].get<std::vector<int>>();
        if (j.contains("folds")) plan.folds = j["folds"].get<int>();
        if (j.contains("roster")) plan.roster = j["roster"].get<std::vector<std::string>>();
        if (j.contains("cl_ks")) plan.cl_ks = j["cl_ks"].get<std::vector<int>>();
        if (j.contains("em_betas")) plan.em_betas = j["em_betas"].get<std::vector<double>>();
        if (j.contains("max_em_iter")) plan.max_em_iter = j["max_em_iter"].get<int>();
        if (j.contains("em_mode")) {
          plan.em_mode = j["em_mode"].get<std::string>() == "hard" ? EmMode::kHard
                                                                   : EmMode::kSoft;
        }
        if (j.contains("sgd")) {
          const json& s = j["sgd"];
          plan.sgd.step_size = s.value("step_size", plan.sgd.step_size);
          plan.sgd.sampling_rate = s.value("sampling_rate", plan.sgd.sampling_rate);
          plan.sgd.max_iterations = s.value("max_iterations", plan.sgd.max_iterations);
          plan.sgd.tolerance = s.value("tolerance", plan.sgd.tolerance);
        }
        if (j.contains("xcl")) {
          const json& x = j["xcl"];
          plan.xcl.k_max = x.value("k_max", plan.xcl.k_max);
          plan.xcl.iter_num_max = x.value("iter_num_max", plan.xcl.iter_num_max);
          plan.xcl.m = x.value("m", plan.xcl.m);
        }
      }
      // Flags override the config file.
      if (exp->count("--seed")) plan.seed = exp_seed;
      if (!exp_q.empty()) plan.q_pcts = exp_q;
      if (!exp_roster.empty()) plan.roster = exp_roster;
      if (exp_folds > 0) plan.folds = exp_folds;
      if (exp->count("--preset") || exp->count("--step") || exp->count("--rate") ||
          exp->count("--iters") || exp->count("--tol")) {
        plan.sgd = exp_sgd.build(plan.seed);
      }
      plan.sgd.seed = plan.seed;
      if (data_path.empty()) {
        std::cerr << "experiment: --data or a config file with \"data\" is required\n";
        return 1;
      }
      if (!exp->count("--seed") && exp_config.empty()) {
        std::cerr << "experiment: --seed or a config file with \"seed\" is required\n";
        return 1;
      }
      return run_experiment(data_path, plan, out_dir);
    }

    if (air->parsed()) {
      return run_airline(air_data, air_seed, air_out, air_roster, air_sgd, air_nointer);
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const UnderdeterminedModel& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
