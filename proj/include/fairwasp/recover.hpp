#pragma once

#include <Eigen/Dense>

#include "fairwasp/accpm.hpp"
#include "fairwasp/dataset.hpp"

namespace fairwasp {

// Integer sample weights with sum exactly n. Integrality holds by
// construction: weights are column counts of a 0/1 transport plan.
struct WeightVector {
  Eigen::VectorXi weights;

  int n() const { return static_cast<int>(weights.size()); }
  long long sum() const { return weights.cast<long long>().sum(); }
  Eigen::VectorXd as_real() const { return weights.cast<double>(); }
};

struct Recovery {
  WeightVector theta;
  double objective = 0.0;  // <C, P*> at lambda_star
  int tie_count = 0;       // nonzero means Assumption-1 uniqueness is unverified
};

// theta* = (P*)^T e from the dual evaluation at lambda_star: weight k counts
// the rows whose chosen group's argmin column is k.
Recovery recover_weights(const Eigen::Ref<const Eigen::VectorXd>& lambda_star,
                         const CompressedCost& cc, const ConstraintMatrix& cm,
                         int threads = 1);

// |a - b| / (|a| + |b| + 1).
double relative_objective_gap(double obj_a, double obj_b);

// Dataset with row i repeated weights[i] times, ascending original order.
// Output has exactly n rows.
Dataset materialize(const Dataset& ds, const WeightVector& theta);

WeightVector read_weights_csv(const std::string& path, int expected_n);
void write_weights_csv(const WeightVector& theta, const std::string& path);

}  // namespace fairwasp
