#include "ssldcm/airline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ssldcm/rng.hpp"

namespace ssldcm {

namespace {

double abs_diff_term(const std::optional<double>& a, const std::optional<double>& b,
                     bool strict, const char* name, const std::string& id) {
  if (a && b) return std::abs(*a - *b);
  if (strict && (a.has_value() || b.has_value())) {
    throw DataError("airline_quality: field " + std::string(name) + " missing in request " + id);
  }
  return 0.0;
}

}  // namespace

double airline_quality(const TravelRequest& req, const Itinerary& itin, bool strict) {
  double h = std::abs(req.dep1 - itin.dep1) + std::abs(req.dep2 - itin.dep2);
  h += abs_diff_term(req.arr1, itin.arr1, strict, "arr1", req.id);
  h += abs_diff_term(req.arr2, itin.arr2, strict, "arr2", req.id);
  h += abs_diff_term(req.elapsed, itin.elapsed, strict, "elapsed", req.id);
  return h;
}

AirlineLabel airline_label_one(const TravelRequest& req) {
  if (req.itineraries.size() < 2) {
    throw DataError("request " + req.id + " has fewer than 2 itineraries");
  }
  AirlineLabel out;
  std::vector<double> H(req.itineraries.size());
  out.lowest_fare = req.itineraries.front().fare;
  for (size_t j = 0; j < req.itineraries.size(); ++j) {
    H[j] = airline_quality(req, req.itineraries[j]);
    out.lowest_fare = std::min(out.lowest_fare, req.itineraries[j].fare);
  }
  out.lowest_quality = *std::min_element(H.begin(), H.end());

  int hits = 0;
  int winner = -1;
  for (size_t j = 0; j < req.itineraries.size(); ++j) {
    if (std::abs(req.itineraries[j].fare - out.lowest_fare) <= 1e-9 &&
        std::abs(H[j] - out.lowest_quality) <= 1e-9) {
      ++hits;
      if (winner < 0) winner = int(j);
    }
  }
  if (hits == 1) out.chosen = winner;  // sum(delta) must be exactly 1
  return out;
}

std::array<double, 3> airline_features(const TravelRequest& req, int itin_index) {
  const auto& its = req.itineraries;
  double mean_fare = 0;
  for (const auto& it : its) mean_fare += it.fare;
  mean_fare /= double(its.size());
  const Itinerary& j = its[size_t(itin_index)];
  // Departure differences stay signed: earlier and later matter differently.
  return {j.fare - mean_fare, req.dep1 - j.dep1, req.dep2 - j.dep2};
}

namespace {

// Bucket index helpers; the first bucket of each group is the reference level
// and carries no dummy, which keeps the interaction columns independent of
// the plain fare-gap column.
int los_bucket(double days) { return days < 4 ? 0 : (days < 7 ? 1 : 2); }
int dow_bucket(int dow) { return dow <= 3 ? 0 : (dow <= 5 ? 1 : 2); }
int ap_bucket(double days) {
  if (days >= 84) return 0;  // early
  if (days >= 28) return 1;  // medium
  if (days >= 14) return 2;  // late
  return 3;                  // rush
}
int cabin_bucket(const std::string& cabin) {
  if (cabin == "business") return 0;
  if (cabin == "economy") return 1;
  if (cabin == "discounted_economy") return 2;
  return 3;  // no preference
}

struct InteractionPlan {
  bool los = false, dow = false, ap = false, cabin = false;
};

InteractionPlan plan_interactions(const std::vector<TravelRequest>& requests) {
  InteractionPlan plan;
  if (requests.empty()) return plan;
  plan.los = requests.front().length_of_stay.has_value();
  plan.dow = requests.front().day_of_week.has_value();
  plan.ap = requests.front().advance_purchase.has_value();
  plan.cabin = requests.front().cabin.has_value();
  for (const auto& r : requests) {
    if (r.length_of_stay.has_value() != plan.los || r.day_of_week.has_value() != plan.dow ||
        r.advance_purchase.has_value() != plan.ap || r.cabin.has_value() != plan.cabin) {
      throw DataError("attribute columns must be present for all requests or none (request " +
                      r.id + ")");
    }
  }
  return plan;
}

void push_onehot_x(std::vector<double>& msf, int bucket, int n_buckets, double fare_gap) {
  for (int b = 1; b < n_buckets; ++b) msf.push_back(bucket == b ? fare_gap : 0.0);
}

}  // namespace

AirlineDataset airline_label(const std::vector<TravelRequest>& requests,
                             const AirlineOptions& opts) {
  if (requests.empty()) throw DataError("airline_label: no requests");
  const InteractionPlan plan = plan_interactions(requests);

  AirlineDataset out;
  Dataset& d = out.dataset;
  d.msf_names = {"fare_gap", "dep1_diff", "dep2_diff"};
  if (opts.with_interactions) {
    if (plan.los) {
      d.msf_names.push_back("los_4to7~fare_gap");
      d.msf_names.push_back("los_7plus~fare_gap");
    }
    if (plan.dow) {
      d.msf_names.push_back("dow_late~fare_gap");
      d.msf_names.push_back("dow_weekend~fare_gap");
    }
    if (plan.ap) {
      d.msf_names.push_back("ap_medium~fare_gap");
      d.msf_names.push_back("ap_late~fare_gap");
      d.msf_names.push_back("ap_rush~fare_gap");
    }
    if (plan.cabin) {
      d.msf_names.push_back("cabin_economy~fare_gap");
      d.msf_names.push_back("cabin_discounted~fare_gap");
      d.msf_names.push_back("cabin_none~fare_gap");
    }
  }
  d.isf_names = {"req_dep1", "req_dep2"};
  if (plan.los) d.isf_names.push_back("los");
  if (plan.ap) d.isf_names.push_back("ap_days");

  for (const auto& req : requests) {
    const auto label = airline_label_one(req);
    Request r;
    r.id = req.id;
    if (label.chosen) {
      r.label = *label.chosen;
      ++out.n_labeled;
    }

    std::vector<double> isf = {req.dep1, req.dep2};
    if (plan.los) isf.push_back(*req.length_of_stay);
    if (plan.ap) isf.push_back(*req.advance_purchase);

    std::vector<double>& fares = out.fares.emplace_back();
    std::vector<double>& quality = out.quality.emplace_back();
    for (int j = 0; j < int(req.itineraries.size()); ++j) {
      const auto f = airline_features(req, j);
      Alternative alt;
      alt.isf = isf;
      alt.msf = {f[0], f[1], f[2]};
      if (opts.with_interactions) {
        if (plan.los) push_onehot_x(alt.msf, los_bucket(*req.length_of_stay), 3, f[0]);
        if (plan.dow) push_onehot_x(alt.msf, dow_bucket(*req.day_of_week), 3, f[0]);
        if (plan.ap) push_onehot_x(alt.msf, ap_bucket(*req.advance_purchase), 4, f[0]);
        if (plan.cabin) push_onehot_x(alt.msf, cabin_bucket(*req.cabin), 4, f[0]);
      }
      r.alternatives.push_back(std::move(alt));
      fares.push_back(req.itineraries[size_t(j)].fare);
      quality.push_back(airline_quality(req, req.itineraries[size_t(j)], opts.strict_quality));
    }
    d.requests.push_back(std::move(r));
  }
  if (opts.standardize_isf) standardize_isf(d);
  return out;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_num(const std::string& cell, long line_no) {
  double out = 0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt(*x) : ""; }

}  // namespace

std::vector<TravelRequest> load_airline_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = split_cells(line);

  std::map<std::string, int> col;
  for (int c = 0; c < int(header.size()); ++c) col[header[size_t(c)]] = c;
  for (const char* required : {"request_id", "fare", "dep1", "dep2", "requested_dep1",
                               "requested_dep2"}) {
    if (!col.count(required)) throw DataError(path + ": missing column " + required);
  }
  auto cell = [&](const std::vector<std::string>& cells, const char* name) -> const std::string* {
    auto it = col.find(name);
    if (it == col.end()) return nullptr;
    return &cells[size_t(it->second)];
  };
  auto opt_num = [&](const std::vector<std::string>& cells, const char* name,
                     long line_no) -> std::optional<double> {
    const std::string* c = cell(cells, name);
    if (c == nullptr || c->empty()) return std::nullopt;
    return parse_num(*c, line_no);
  };

  std::vector<TravelRequest> out;
  std::map<std::string, size_t> pos;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_cells(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": wrong cell count");
    }
    const std::string rid = *cell(cells, "request_id");
    auto [it, inserted] = pos.try_emplace(rid, out.size());
    if (inserted) {
      TravelRequest r;
      r.id = rid;
      r.dep1 = parse_num(*cell(cells, "requested_dep1"), line_no);
      r.dep2 = parse_num(*cell(cells, "requested_dep2"), line_no);
      r.arr1 = opt_num(cells, "requested_arr1", line_no);
      r.arr2 = opt_num(cells, "requested_arr2", line_no);
      r.elapsed = opt_num(cells, "requested_elapsed", line_no);
      r.length_of_stay = opt_num(cells, "los", line_no);
      if (auto dow = opt_num(cells, "dow", line_no)) r.day_of_week = int(*dow);
      r.advance_purchase = opt_num(cells, "ap_days", line_no);
      if (const std::string* cab = cell(cells, "cabin"); cab != nullptr && !cab->empty()) {
        r.cabin = *cab;
      }
      out.push_back(std::move(r));
    }
    Itinerary itin;
    itin.fare = parse_num(*cell(cells, "fare"), line_no);
    itin.dep1 = parse_num(*cell(cells, "dep1"), line_no);
    itin.dep2 = parse_num(*cell(cells, "dep2"), line_no);
    itin.arr1 = opt_num(cells, "arr1", line_no);
    itin.arr2 = opt_num(cells, "arr2", line_no);
    itin.elapsed = opt_num(cells, "elapsed", line_no);
    out[it->second].itineraries.push_back(itin);
  }
  for (const auto& r : out) {
    if (r.itineraries.size() < 2) {
      throw DataError("request " + r.id + " has fewer than 2 itineraries");
    }
  }
  return out;
}

void write_airline_csv(const std::string& path, const std::vector<TravelRequest>& requests) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "request_id,fare,dep1,dep2,arr1,arr2,elapsed,requested_dep1,requested_dep2,"
         "requested_arr1,requested_arr2,requested_elapsed,los,dow,ap_days,cabin\n";
  for (const auto& r : requests) {
    for (const auto& it : r.itineraries) {
      out << r.id << "," << fmt(it.fare) << "," << fmt(it.dep1) << "," << fmt(it.dep2) << ","
          << fmt_opt(it.arr1) << "," << fmt_opt(it.arr2) << "," << fmt_opt(it.elapsed) << ","
          << fmt(r.dep1) << "," << fmt(r.dep2) << "," << fmt_opt(r.arr1) << ","
          << fmt_opt(r.arr2) << "," << fmt_opt(r.elapsed) << "," << fmt_opt(r.length_of_stay)
          << "," << (r.day_of_week ? std::to_string(*r.day_of_week) : "") << ","
          << fmt_opt(r.advance_purchase) << "," << (r.cabin ? *r.cabin : "") << "\n";
    }
  }
}

std::vector<TravelRequest> airline_synth(const AirlineSynthConfig& cfg, uint64_t seed) {
  if (cfg.n_requests <= 0 || cfg.itins_per_request < 2) {
    throw DataError("airline_synth: need n_requests > 0 and >= 2 itineraries");
  }
  if (!(cfg.planted_fraction >= 0.0 && cfg.planted_fraction <= 1.0)) {
    throw DataError("airline_synth: planted_fraction must be in [0, 1]");
  }
  const int planted = int(std::lround(cfg.planted_fraction * cfg.n_requests));
  const char* cabins[] = {"business", "economy", "discounted_economy", "none"};

  Rng rng(seed);
  std::vector<TravelRequest> out;
  out.reserve(size_t(cfg.n_requests));
  for (int i = 0; i < cfg.n_requests; ++i) {
    TravelRequest r;
    r.id = "a" + std::to_string(i + 1);
    r.dep1 = rng.uniform(6.0, 22.0);
    const double stay_h = rng.uniform(24.0, 14.0 * 24.0);
    r.dep2 = r.dep1 + stay_h;
    if (cfg.with_attributes) {
      r.length_of_stay = stay_h / 24.0;
      r.day_of_week = 1 + int(rng.uniform_int(7));
      r.advance_purchase = rng.uniform(0.0, 120.0);
      r.cabin = cabins[rng.uniform_int(4)];
    }

    const int J = cfg.itins_per_request;
    r.itineraries.resize(size_t(J));
    for (auto& it : r.itineraries) {
      it.fare = rng.uniform(200.0, 800.0);
      // Offsets bounded away from zero so quality minima stay unambiguous.
      const double o1 = (rng.uniform() < 0.5 ? -1 : 1) * (0.5 + std::abs(rng.normal(0, 2.0)));
      const double o2 = (rng.uniform() < 0.5 ? -1 : 1) * (0.5 + std::abs(rng.normal(0, 2.0)));
      it.dep1 = r.dep1 + o1;
      it.dep2 = r.dep2 + o2;
    }

    if (i < planted) {
      // One itinerary gets both the strictly lowest fare and a perfect match.
      const int star = int(rng.uniform_int(uint64_t(J)));
      double min_fare = r.itineraries[0].fare;
      for (const auto& it : r.itineraries) min_fare = std::min(min_fare, it.fare);
      r.itineraries[size_t(star)].fare = min_fare - rng.uniform(10.0, 30.0);
      r.itineraries[size_t(star)].dep1 = r.dep1;
      r.itineraries[size_t(star)].dep2 = r.dep2;
    } else {
      // Split minima: the cheapest itinerary and the best-matching itinerary
      // are forced to differ, so no single itinerary attains both.
      const int jf = int(rng.uniform_int(uint64_t(J)));
      int jh = int(rng.uniform_int(uint64_t(J - 1)));
      if (jh >= jf) ++jh;
      double min_fare = r.itineraries[0].fare;
      for (const auto& it : r.itineraries) min_fare = std::min(min_fare, it.fare);
      r.itineraries[size_t(jf)].fare = min_fare - rng.uniform(10.0, 30.0);
      r.itineraries[size_t(jh)].dep1 = r.dep1;
      r.itineraries[size_t(jh)].dep2 = r.dep2;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ssldcm
