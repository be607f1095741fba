#pragma once

#include <Eigen/Dense>

#include <vector>

#include "fairwasp/dataset.hpp"

namespace fairwasp {

enum class ConstraintSide { Upper, Lower };

struct ConstraintRowMeta {
  int d = 0;
  int y = 0;
  ConstraintSide side = ConstraintSide::Upper;
};

// Demographic-parity constraints A theta >= 0 stored in group space: each
// row's coefficient is constant within a (d, y) group, so only the m x L
// group values are kept. Upper row (d, y): (1+eps)*t_y on every group of
// class d, minus 1 on group (d, y). Lower row: indicator of (d, y) minus
// t_y/(1+eps) on class d.
struct ConstraintMatrix {
  Eigen::MatrixXd coeff;  // m x L
  double epsilon = 0.0;
  MarginalY target;
  std::vector<ConstraintRowMeta> row_meta;

  int rows() const { return static_cast<int>(coeff.rows()); }
  int num_groups() const { return static_cast<int>(coeff.cols()); }
};

// Symmetric probability ratio distance max{p/q - 1, q/p - 1}.
// Inputs must be strictly positive.
double ratio_distance(double p, double q);

// One upper and one lower row per (d, y) pair. With dedup_binary_y and
// |Y| = 2 the redundant half is dropped exactly (m = 2|D|): upper(d, y) and
// lower(d, 1-y) differ by a fixed multiple of the class-d weight total, so
// the pointwise looser of the two is implied by the other for any theta >= 0.
ConstraintMatrix build_constraints(const GroupIndex& gi, const MarginalY& t,
                                   double epsilon, bool dedup_binary_y);

// Largest overshoot of the conditionals p_theta(y|d) outside the
// [t_y/(1+eps), (1+eps)*t_y] band; zero iff theta satisfies the marginal
// constraints. Throws EvalError when some class d has zero total weight.
double fairness_violation(const Eigen::Ref<const Eigen::VectorXd>& theta,
                          const GroupIndex& gi, const MarginalY& t,
                          double epsilon);

// Largest J across outcome levels and pairs of protected classes with
// positive weight. A zero conditional against a positive one yields +inf;
// two zero conditionals are equal and contribute 0.
double pairwise_violation(const Eigen::Ref<const Eigen::VectorXd>& theta,
                          const GroupIndex& gi);

// Row values of coeff * group_sums(theta); feasibility means every entry
// >= -1e-9 * n.
Eigen::VectorXd constraint_margins(const ConstraintMatrix& cm,
                                   const GroupIndex& gi,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta);

}  // namespace fairwasp
