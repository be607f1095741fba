#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "fairwasp/dataset.hpp"

namespace testutil {

inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double gauss(std::mt19937_64& rng) {
  double u1 = u01(rng);
  while (u1 <= 0.0) u1 = u01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u01(rng));
}

// Random instance with Gaussian features and uniform labels; resamples labels
// until both protected classes and both outcome levels appear. Standardized.
inline fairwasp::Dataset random_instance(int n, std::uint64_t seed, int num_d = 2,
                                         int num_y = 2, int p = 2) {
  std::mt19937_64 rng(seed);
  fairwasp::Dataset ds;
  ds.features.resize(n, p);
  ds.d_labels.resize(n);
  ds.y_labels.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) ds.features(i, j) = 3.0 * gauss(rng);
  while (true) {
    std::vector<bool> seen_d(num_d, false), seen_y(num_y, false);
    for (int i = 0; i < n; ++i) {
      ds.d_labels[i] = static_cast<int>(u01(rng) * num_d);
      ds.y_labels[i] = static_cast<int>(u01(rng) * num_y);
      seen_d[ds.d_labels[i]] = true;
      seen_y[ds.y_labels[i]] = true;
    }
    bool all = true;
    for (bool b : seen_d) all = all && b;
    for (bool b : seen_y) all = all && b;
    if (all) break;
  }
  ds.num_d = num_d;
  ds.num_y = num_y;
  for (int d = 0; d < num_d; ++d) ds.d_values.push_back(std::to_string(d));
  for (int y = 0; y < num_y; ++y) ds.y_values.push_back(std::to_string(y));
  for (int j = 0; j < p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  return fairwasp::standardize(ds);
}

// The balanced 4-sample toy: one singleton group per (d, y) pair, symmetric
// feature placement, so theta = e is fair and optimal.
inline fairwasp::Dataset balanced_toy() {
  fairwasp::Dataset ds;
  ds.features.resize(4, 2);
  ds.features << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  ds.d_labels.resize(4);
  ds.d_labels << 0, 0, 1, 1;
  ds.y_labels.resize(4);
  ds.y_labels << 0, 1, 0, 1;
  ds.num_d = 2;
  ds.num_y = 2;
  ds.d_values = {"0", "1"};
  ds.y_values = {"0", "1"};
  ds.feature_names = {"x1", "x2"};
  return ds;
}

// Two samples, each protected class observed with a single outcome: the
// marginal constraints at eps = 0 force every weight to zero, so the problem
// is infeasible.
inline fairwasp::Dataset infeasible_toy() {
  fairwasp::Dataset ds;
  ds.features.resize(2, 1);
  ds.features << 0.0, 1.0;
  ds.d_labels.resize(2);
  ds.d_labels << 0, 1;
  ds.y_labels.resize(2);
  ds.y_labels << 0, 1;
  ds.num_d = 2;
  ds.num_y = 2;
  ds.d_values = {"0", "1"};
  ds.y_values = {"0", "1"};
  ds.feature_names = {"x1"};
  return ds;
}

// Random integer weights summing to n with every protected class kept
// positive.
inline Eigen::VectorXi random_theta(const fairwasp::Dataset& ds,
                                    std::mt19937_64& rng) {
  const int n = ds.n();
  while (true) {
    Eigen::VectorXi theta = Eigen::VectorXi::Zero(n);
    for (int c = 0; c < n; ++c) theta[static_cast<int>(u01(rng) * n)] += 1;
    Eigen::VectorXi dsum = Eigen::VectorXi::Zero(ds.num_d);
    for (int i = 0; i < n; ++i) dsum[ds.d_labels[i]] += theta[i];
    if (dsum.minCoeff() > 0) return theta;
  }
}

inline std::string temp_path(const std::string& name) {
  return std::string("/tmp/fairwasp_test_") + name;
}

}  // namespace testutil
