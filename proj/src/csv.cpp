#include "ssldcm/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace ssldcm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
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

double parse_double(const std::string& cell, long line_no, const std::string& col) {
  double out = 0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + cell +
                    "' in column " + col);
  }
  return out;
}

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

Dataset load_dataset(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = split_line(line);

  const CsvSchema& s = opts.schema;
  int col_request = -1, col_alt = -1, col_chosen = -1;
  std::vector<int> isf_cols, msf_cols;
  std::vector<std::string> isf_names, msf_names;
  for (int c = 0; c < int(header.size()); ++c) {
    const std::string& h = header[size_t(c)];
    if (h == s.request_id) {
      col_request = c;
    } else if (h == s.alt_id || h == "alternative_id") {
      col_alt = c;
    } else if (h == s.chosen) {
      col_chosen = c;
    } else if (!s.isf_columns.empty() || !s.msf_columns.empty()) {
      if (std::find(s.isf_columns.begin(), s.isf_columns.end(), h) != s.isf_columns.end()) {
        isf_cols.push_back(c);
        isf_names.push_back(h);
      } else if (std::find(s.msf_columns.begin(), s.msf_columns.end(), h) != s.msf_columns.end()) {
        msf_cols.push_back(c);
        msf_names.push_back(h);
      }
    } else if (h.rfind("isf:", 0) == 0) {
      isf_cols.push_back(c);
      isf_names.push_back(h.substr(4));
    } else if (h.rfind("msf:", 0) == 0) {
      msf_cols.push_back(c);
      msf_names.push_back(h.substr(4));
    }
  }
  if (col_request < 0) throw DataError(path + ": missing column " + s.request_id);
  if (col_alt < 0) throw DataError(path + ": missing column " + s.alt_id);
  if (col_chosen < 0) throw DataError(path + ": missing column " + s.chosen);
  if (msf_cols.empty()) throw DataError(path + ": no msf feature columns found");

  Dataset d;
  d.isf_names = isf_names;
  d.msf_names = msf_names;
  std::unordered_map<std::string, size_t> request_pos;
  std::vector<int> chosen_count;  // per request, number of chosen=1 rows

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    const std::string& rid = cells[size_t(col_request)];
    auto [it, inserted] = request_pos.try_emplace(rid, d.requests.size());
    if (inserted) {
      Request r;
      r.id = rid;
      d.requests.push_back(std::move(r));
      chosen_count.push_back(0);
    }
    Request& req = d.requests[it->second];

    Alternative alt;
    alt.isf.reserve(isf_cols.size());
    alt.msf.reserve(msf_cols.size());
    for (size_t j = 0; j < isf_cols.size(); ++j) {
      alt.isf.push_back(parse_double(cells[size_t(isf_cols[j])], line_no, "isf:" + isf_names[j]));
    }
    for (size_t j = 0; j < msf_cols.size(); ++j) {
      alt.msf.push_back(parse_double(cells[size_t(msf_cols[j])], line_no, "msf:" + msf_names[j]));
    }

    const std::string& ch = cells[size_t(col_chosen)];
    if (ch == "1") {
      if (++chosen_count[it->second] > 1) {
        throw DataError("request " + rid + " has more than one chosen alternative");
      }
      req.label = req.n_alternatives();
    } else if (!ch.empty() && ch != "0") {
      throw DataError("line " + std::to_string(line_no) + ": chosen must be 0, 1 or empty, got '" +
                      ch + "'");
    }
    req.alternatives.push_back(std::move(alt));
  }

  for (const auto& r : d.requests) {
    if (r.alternatives.size() < 2) {
      throw DataError("request " + r.id + " has fewer than 2 alternatives");
    }
  }
  validate_dataset(d);
  if (opts.standardize_isf) standardize_isf(d);
  return d;
}

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream out;
  out << "request_id,alt_id,chosen";
  for (const auto& n : d.isf_names) out << ",isf:" << n;
  for (const auto& n : d.msf_names) out << ",msf:" << n;
  out << "\n";
  for (const auto& r : d.requests) {
    for (int j = 0; j < r.n_alternatives(); ++j) {
      out << r.id << "," << j << ",";
      if (r.label) out << (*r.label == j ? "1" : "0");
      for (double x : r.alternatives[size_t(j)].isf) out << "," << format_double(x);
      for (double x : r.alternatives[size_t(j)].msf) out << "," << format_double(x);
      out << "\n";
    }
  }
  return out.str();
}

void write_dataset(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << dataset_to_csv(d);
}

}  // namespace ssldcm
