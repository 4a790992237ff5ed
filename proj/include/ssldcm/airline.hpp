#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssldcm/data.hpp"

namespace ssldcm {

// Times are continuous hours from a day-0 epoch, so cross-midnight
// differences are plain subtractions.
struct Itinerary {
  double fare = 0.0;
  double dep1 = 0.0;
  double dep2 = 0.0;
  std::optional<double> arr1;
  std::optional<double> arr2;
  std::optional<double> elapsed;  // hours
};

struct TravelRequest {
  std::string id;
  double dep1 = 0.0;
  double dep2 = 0.0;
  std::optional<double> arr1;
  std::optional<double> arr2;
  std::optional<double> elapsed;
  // Attributes feeding the bucketed interaction features; all optional.
  std::optional<double> length_of_stay;    // days
  std::optional<int> day_of_week;          // 1..7, Monday = 1
  std::optional<double> advance_purchase;  // days ahead
  std::optional<std::string> cabin;        // business|economy|discounted_economy|none
  std::vector<Itinerary> itineraries;
};

// Quality H_ij: sum of absolute deviations between requested and offered
// times. Fields absent on either side contribute zero; strict mode raises
// DataError instead.
double airline_quality(const TravelRequest& req, const Itinerary& itin,
                       bool strict = false);

struct AirlineLabel {
  std::optional<int> chosen;  // set iff exactly one itinerary attains both minima
  double lowest_fare = 0.0;
  double lowest_quality = 0.0;
};

// delta_ij = 1 iff F_ij = LF_i and H_ij = LH_i (tolerance 1e-9); the request
// is labeled iff exactly one itinerary qualifies.
AirlineLabel airline_label_one(const TravelRequest& req);

// f1 = fare gap to the request mean; f2, f3 = signed departure differences
// (requested minus offered).
std::array<double, 3> airline_features(const TravelRequest& req, int itin_index);

struct AirlineOptions {
  bool with_interactions = true;  // bucketed one-hot x fare-gap products
  bool standardize_isf = true;
  bool strict_quality = false;
};

struct AirlineDataset {
  Dataset dataset;
  std::vector<std::vector<double>> fares;    // per request x itinerary
  std::vector<std::vector<double>> quality;  // H_ij
  long n_labeled = 0;
};

// Applies the labeling rule to every request and assembles the choice
// dataset: msf = f1..f3 plus interactions, isf = requested times and
// available attributes.
AirlineDataset airline_label(const std::vector<TravelRequest>& requests,
                             const AirlineOptions& opts = {});

// CSV: one row per itinerary with request-level columns repeated.
std::vector<TravelRequest> load_airline_csv(const std::string& path);
void write_airline_csv(const std::string& path,
                       const std::vector<TravelRequest>& requests);

struct AirlineSynthConfig {
  int n_requests = 0;
  int itins_per_request = 5;
  // Fraction of requests given a unique joint (min-fare, min-quality)
  // itinerary; the remainder are constructed with split minima.
  double planted_fraction = 0.5;
  bool with_attributes = true;
};

std::vector<TravelRequest> airline_synth(const AirlineSynthConfig& cfg,
                                         uint64_t seed);

}  // namespace ssldcm
