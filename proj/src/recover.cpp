#include "fairwasp/recover.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fairwasp/common.hpp"

namespace fairwasp {

Recovery recover_weights(const Eigen::Ref<const Eigen::VectorXd>& lambda_star,
                         const CompressedCost& cc, const ConstraintMatrix& cm,
                         int threads) {
  const DualEvaluation ev = evaluate(lambda_star, cc, cm, threads);
  Recovery rec;
  rec.theta.weights = ev.column_counts;
  rec.objective = ev.primal_objective;
  rec.tie_count = ev.tie_count;
  return rec;
}

double relative_objective_gap(double obj_a, double obj_b) {
  return std::abs(obj_a - obj_b) / (std::abs(obj_a) + std::abs(obj_b) + 1.0);
}

Dataset materialize(const Dataset& ds, const WeightVector& theta) {
  if (theta.n() != ds.n()) {
    throw std::invalid_argument("materialize: weight count does not match dataset");
  }
  if (theta.sum() != ds.n()) {
    throw std::invalid_argument("materialize: weights must sum to n");
  }
  Dataset out = ds;
  out.features.resize(ds.n(), ds.p());
  out.d_labels.resize(ds.n());
  out.y_labels.resize(ds.n());
  int r = 0;
  for (int i = 0; i < ds.n(); ++i) {
    for (int copy = 0; copy < theta.weights[i]; ++copy) {
      out.features.row(r) = ds.features.row(i);
      out.d_labels[r] = ds.d_labels[i];
      out.y_labels[r] = ds.y_labels[i];
      ++r;
    }
  }
  return out;
}

WeightVector read_weights_csv(const std::string& path, int expected_n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open weights file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty weights file: " + path);

  WeightVector theta;
  theta.weights = Eigen::VectorXi::Constant(expected_n, -1);
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("malformed weights row: " + line);
    int index = 0, weight = 0;
    const char* ib = line.data();
    auto r1 = std::from_chars(ib, ib + comma, index);
    auto r2 = std::from_chars(ib + comma + 1, ib + line.size(), weight);
    if (r1.ec != std::errc() || r2.ec != std::errc()) {
      throw DataError("malformed weights row: " + line);
    }
    if (index < 0 || index >= expected_n) {
      throw DataError("weight index out of range: " + std::to_string(index));
    }
    if (weight < 0) throw DataError("negative weight at index " + std::to_string(index));
    if (theta.weights[index] != -1) {
      throw DataError("duplicate weight index " + std::to_string(index));
    }
    theta.weights[index] = weight;
    ++seen;
  }
  if (seen != expected_n) {
    throw DataError("weights file has " + std::to_string(seen) + " rows, expected " +
                    std::to_string(expected_n));
  }
  return theta;
}

void write_weights_csv(const WeightVector& theta, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open weights file for writing: " + path);
  out << "index,weight\n";
  for (int i = 0; i < theta.n(); ++i) out << i << ',' << theta.weights[i] << '\n';
}

}  // namespace fairwasp
