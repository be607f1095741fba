#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace fairwasp {

// A classification dataset: an n x p numeric feature matrix plus one
// protected-attribute column and one outcome column. Label values are mapped
// to dense ids 0..num_d-1 / 0..num_y-1 in first-appearance order; the
// original tokens are kept so outputs can reproduce the input schema.
struct Dataset {
  Eigen::MatrixXd features;           // n x p
  Eigen::VectorXi d_labels;           // protected-class id per row
  Eigen::VectorXi y_labels;           // outcome id per row
  int num_d = 0;
  int num_y = 0;
  std::vector<std::string> d_values;  // id -> original token
  std::vector<std::string> y_values;
  std::vector<std::string> feature_names;
  std::string d_name = "d";
  std::string y_name = "y";
  // Input column layout: >= 0 is a feature index, -1 the d column, -2 the y
  // column. Used to write materialized datasets with the original schema.
  std::vector<int> column_order;

  int n() const { return static_cast<int>(features.rows()); }
  int p() const { return static_cast<int>(features.cols()); }
};

// Partition of row indices by (d, y) pair, ordered lexicographically.
// Only observed pairs get a group, so L <= num_d * num_y and every group is
// nonempty.
struct GroupIndex {
  std::vector<std::vector<int>> groups;  // L disjoint lists covering [n]
  Eigen::VectorXi group_of;              // n: row -> group id
  Eigen::VectorXi group_d;               // L
  Eigen::VectorXi group_y;               // L
  int num_d = 0;
  int num_y = 0;

  int size() const { return static_cast<int>(groups.size()); }
  int n() const { return static_cast<int>(group_of.size()); }

  // Row indices of one protected class, ascending.
  std::vector<int> d_members(int d) const;

  // Per-group totals of a weight vector.
  Eigen::VectorXd group_sums(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
};

// Empirical marginal distribution of the outcome label.
struct MarginalY {
  Eigen::VectorXd probs;  // num_y entries, summing to 1
};

Dataset load_csv(const std::string& path, const std::string& d_column,
                 const std::string& y_column, bool include_d_in_features = false);

void write_csv(const Dataset& ds, const std::string& path);

// Divides each feature column by its sample standard deviation (n-1
// denominator). Columns with exactly zero variance pass through unchanged.
Dataset standardize(const Dataset& ds);

MarginalY marginal_y(const Dataset& ds);

GroupIndex group_index(const Dataset& ds);

// Two-feature synthetic generator: D ~ Bernoulli(1/2), X1 ~ U[0,10] when
// D = 1 and exactly 0 otherwise, X2 ~ N(0, 25), and Y indicates whether
// X1 + X2 + N(0,1) noise exceeds the empirical mean of X1 + X2.
// Bit-reproducible for a fixed seed.
Dataset generate_synthetic(int n, std::uint64_t seed);

// FNV-1a over dimensions, feature bytes, and label ids.
std::uint64_t dataset_hash(const Dataset& ds);

}  // namespace fairwasp
