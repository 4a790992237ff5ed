#pragma once

#include <string>
#include <vector>

#include "ssldcm/data.hpp"

namespace ssldcm {

// Column mapping for choice-set CSV files. Feature columns default to the
// `isf:` / `msf:` header prefixes when the explicit lists are empty.
struct CsvSchema {
  std::string request_id = "request_id";
  std::string alt_id = "alt_id";  // "alternative_id" accepted as an alias
  std::string chosen = "chosen";
  std::vector<std::string> isf_columns;
  std::vector<std::string> msf_columns;
};

struct LoadOptions {
  CsvSchema schema;
  bool standardize_isf = true;  // raw-scale mode when false
};

// One row per alternative; requests grouped by request_id in first-appearance
// order. A request with any chosen=1 row is labeled, all-empty/all-0 rows
// mean unlabeled. Malformed rows raise DataError with the 1-based line
// number; invariant violations name the request.
Dataset load_dataset(const std::string& path, const LoadOptions& opts = {});

std::string dataset_to_csv(const Dataset& d);
void write_dataset(const std::string& path, const Dataset& d);

}  // namespace ssldcm
