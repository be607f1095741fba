#include "fairwasp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include "fairwasp/common.hpp"

namespace fairwasp {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Dense id for a label token, first appearance wins.
int label_id(std::vector<std::string>& values,
             std::unordered_map<std::string, int>& index, const std::string& tok) {
  auto it = index.find(tok);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(values.size());
  values.push_back(tok);
  index.emplace(tok, id);
  return id;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& d_column,
                 const std::string& y_column, bool include_d_in_features) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("empty file: " + path);
  std::vector<std::string> header = split_line(header_line);
  for (auto& h : header) h = trim(h);

  int d_col = -1, y_col = -1;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[c] == d_column) d_col = c;
    if (header[c] == y_column) y_col = c;
  }
  if (d_col < 0) throw ConfigError("protected column '" + d_column + "' not found in " + path);
  if (y_col < 0) throw ConfigError("outcome column '" + y_column + "' not found in " + path);
  if (d_col == y_col) throw ConfigError("protected and outcome columns must differ");

  Dataset ds;
  ds.d_name = d_column;
  ds.y_name = y_column;
  std::vector<int> feature_cols;  // source column per feature
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (c == y_col) {
      ds.column_order.push_back(-2);
    } else if (c == d_col) {
      ds.column_order.push_back(-1);
    } else {
      ds.column_order.push_back(static_cast<int>(feature_cols.size()));
      feature_cols.push_back(c);
      ds.feature_names.push_back(header[c]);
    }
  }
  if (include_d_in_features) {
    // Extra feature copy of d; the output schema still writes d once, as d.
    feature_cols.push_back(d_col);
    ds.feature_names.push_back(d_column);
  }

  std::unordered_map<std::string, int> d_index, y_index;
  std::vector<std::vector<double>> rows;
  std::vector<int> d_ids, y_ids;
  std::string line;
  int row_no = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_no;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    std::vector<double> feat(feature_cols.size());
    for (size_t f = 0; f < feature_cols.size(); ++f) {
      const int c = feature_cols[f];
      double v = 0.0;
      if (!parse_double(cells[c], v)) {
        throw DataError("non-numeric feature value at row " + std::to_string(row_no) +
                        ", column '" + header[c] + "'");
      }
      if (!std::isfinite(v)) {
        throw DataError("non-finite feature value at row " + std::to_string(row_no) +
                        ", column '" + header[c] + "'");
      }
      feat[f] = v;
    }
    rows.push_back(std::move(feat));
    d_ids.push_back(label_id(ds.d_values, d_index, trim(cells[d_col])));
    y_ids.push_back(label_id(ds.y_values, y_index, trim(cells[y_col])));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);

  ds.num_d = static_cast<int>(ds.d_values.size());
  ds.num_y = static_cast<int>(ds.y_values.size());
  if (ds.num_y < 2) throw DataError("single outcome class '" + ds.y_values[0] + "'");
  if (ds.num_d < 2) throw DataError("single protected class '" + ds.d_values[0] + "'");

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(feature_cols.size());
  ds.features.resize(n, p);
  ds.d_labels.resize(n);
  ds.y_labels.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) ds.features(i, j) = rows[i][j];
    ds.d_labels[i] = d_ids[i];
    ds.y_labels[i] = y_ids[i];
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);

  std::vector<int> order = ds.column_order;
  if (order.empty()) {
    for (int j = 0; j < ds.p(); ++j) order.push_back(j);
    order.push_back(-1);
    order.push_back(-2);
  }
  bool first = true;
  for (int slot : order) {
    if (!first) out << ',';
    first = false;
    if (slot == -1) out << ds.d_name;
    else if (slot == -2) out << ds.y_name;
    else out << ds.feature_names[slot];
  }
  out << '\n';
  for (int i = 0; i < ds.n(); ++i) {
    first = true;
    for (int slot : order) {
      if (!first) out << ',';
      first = false;
      if (slot == -1) out << ds.d_values[ds.d_labels[i]];
      else if (slot == -2) out << ds.y_values[ds.y_labels[i]];
      else out << format_double(ds.features(i, slot));
    }
    out << '\n';
  }
}

Dataset standardize(const Dataset& ds) {
  Dataset out = ds;
  const int n = ds.n();
  if (n < 2) return out;
  for (int j = 0; j < ds.p(); ++j) {
    const double mean = ds.features.col(j).mean();
    const double ss = (ds.features.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / (n - 1));
    if (sd > 0.0) out.features.col(j) /= sd;
  }
  return out;
}

MarginalY marginal_y(const Dataset& ds) {
  MarginalY m;
  m.probs = Eigen::VectorXd::Zero(ds.num_y);
  for (int i = 0; i < ds.n(); ++i) m.probs[ds.y_labels[i]] += 1.0;
  m.probs /= static_cast<double>(ds.n());
  return m;
}

GroupIndex group_index(const Dataset& ds) {
  GroupIndex gi;
  gi.num_d = ds.num_d;
  gi.num_y = ds.num_y;
  gi.group_of.resize(ds.n());

  std::map<std::pair<int, int>, std::vector<int>> buckets;  // lexicographic
  for (int i = 0; i < ds.n(); ++i) {
    buckets[{ds.d_labels[i], ds.y_labels[i]}].push_back(i);
  }
  const int L = static_cast<int>(buckets.size());
  gi.group_d.resize(L);
  gi.group_y.resize(L);
  int l = 0;
  for (auto& [key, members] : buckets) {
    gi.group_d[l] = key.first;
    gi.group_y[l] = key.second;
    for (int i : members) gi.group_of[i] = l;
    gi.groups.push_back(std::move(members));
    ++l;
  }
  return gi;
}

std::vector<int> GroupIndex::d_members(int d) const {
  std::vector<int> out;
  for (int l = 0; l < size(); ++l) {
    if (group_d[l] != d) continue;
    out.insert(out.end(), groups[l].begin(), groups[l].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::VectorXd GroupIndex::group_sums(
    const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(size());
  for (int i = 0; i < n(); ++i) sums[group_of[i]] += theta[i];
  return sums;
}

namespace {

// 53-bit uniform in [0, 1); explicit so the stream is stable across stdlibs.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal01(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

Dataset generate_synthetic(int n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("synthetic generator needs n >= 2");
  std::mt19937_64 rng(seed);

  Dataset ds;
  ds.features.resize(n, 2);
  ds.d_labels.resize(n);
  ds.y_labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int d = uniform01(rng) < 0.5 ? 1 : 0;
    const double x1u = uniform01(rng);  // drawn unconditionally: stable stream
    const double x2 = 5.0 * normal01(rng);
    ds.d_labels[i] = d;
    ds.features(i, 0) = d == 1 ? 10.0 * x1u : 0.0;
    ds.features(i, 1) = x2;
  }
  const double m_x = (ds.features.col(0) + ds.features.col(1)).mean();
  for (int i = 0; i < n; ++i) {
    const double noise = normal01(rng);
    const double score = ds.features(i, 0) + ds.features(i, 1) + noise;
    ds.y_labels[i] = score > m_x ? 1 : 0;
  }
  ds.num_d = 2;
  ds.num_y = 2;
  ds.d_values = {"0", "1"};
  ds.y_values = {"0", "1"};
  ds.feature_names = {"x1", "x2"};
  ds.column_order = {0, 1, -1, -2};
  return ds;
}

std::uint64_t dataset_hash(const Dataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_bytes = [&h](const void* data, size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t dims[4] = {ds.n(), ds.p(), ds.num_d, ds.num_y};
  mix_bytes(dims, sizeof(dims));
  for (int i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.p(); ++j) {
      const double v = ds.features(i, j);
      mix_bytes(&v, sizeof(v));
    }
    const std::int32_t labels[2] = {ds.d_labels[i], ds.y_labels[i]};
    mix_bytes(labels, sizeof(labels));
  }
  return h;
}

}  // namespace fairwasp
