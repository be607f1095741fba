#pragma once

#include <Eigen/Dense>

#include "fairwasp/cost.hpp"
#include "fairwasp/fairness.hpp"

namespace fairwasp {

// Local improvement of an integer row->group assignment. The induced weights
// are feasible iff the group counts h satisfy coeff * h >= 0, and the plan
// cost is the sum of row-group minima, so the whole candidate search lives in
// the L-dimensional count space: cancel negative exchange cycles (optimal
// transport for fixed h), then move single units along shortest exchange
// paths to restore feasibility and to keep lowering cost while feasible.
struct PolishResult {
  Eigen::VectorXi assignment;  // row -> group
  Eigen::VectorXi theta;       // column counts of the induced plan
  double objective = 0.0;      // sum of row-group minima along the assignment
  bool feasible = false;
  int moves = 0;
};

PolishResult polish_assignment(Eigen::VectorXi assignment, const CompressedCost& cc,
                               const ConstraintMatrix& cm, int move_cap = 2000);

}  // namespace fairwasp
