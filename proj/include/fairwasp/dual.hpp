#pragma once

#include <Eigen/Dense>

#include <optional>

#include "fairwasp/cost.hpp"
#include "fairwasp/fairness.hpp"

namespace fairwasp {

// One evaluation of the dual objective F(lambda) = max_{P in S_n} <Cbar, P>
// with Cbar = sum_j lambda_j e a_j^T - C. The maximizing P assigns each row i
// to one column inside its best group, so it is represented by chosen_group
// plus the compressed argmin indices instead of an n x n matrix.
struct DualEvaluation {
  double value = 0.0;              // F(lambda)
  Eigen::VectorXd subgradient;     // m: sum_i coeff[j][chosen_group[i]]
  Eigen::VectorXi chosen_group;    // n: argmax_l (v_l - row_group_min[i][l])
  Eigen::VectorXi column_counts;   // n: integer theta candidate (P*)^T e
  double primal_objective = 0.0;   // <C, P*> = sum_i row_group_min[i][chosen]
  int tie_count = 0;               // rows whose max was attained twice
};

// O(mL + nL) per call once the compressed cost exists. Deterministic: ties
// pick the smallest group index. Rows may be split across threads; partial
// sums merge in thread order.
DualEvaluation evaluate(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                        const CompressedCost& cc, const ConstraintMatrix& cm,
                        int threads = 1);

// Objective cut (subgradient + value) for lambda >= 0, otherwise the
// coordinate cut g = -e_j for the smallest negative index with no value.
struct SeparationCut {
  Eigen::VectorXd g;
  std::optional<double> value;
};

SeparationCut separation_oracle(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                const CompressedCost& cc,
                                const ConstraintMatrix& cm, int threads = 1);

}  // namespace fairwasp
