#include "fairwasp/fairness.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fairwasp/common.hpp"

namespace fairwasp {

double ratio_distance(double p, double q) {
  if (!(p > 0.0) || !(q > 0.0)) {
    throw std::domain_error("ratio_distance requires strictly positive arguments");
  }
  return std::max(p / q - 1.0, q / p - 1.0);
}

ConstraintMatrix build_constraints(const GroupIndex& gi, const MarginalY& t,
                                   double epsilon, bool dedup_binary_y) {
  if (epsilon < 0.0) throw std::domain_error("epsilon must be nonnegative");
  for (int y = 0; y < t.probs.size(); ++y) {
    if (!(t.probs[y] >= 0.0) || !(t.probs[y] <= 1.0)) {
      throw std::domain_error("target marginal entries must lie in [0, 1]");
    }
  }
  const int L = gi.size();
  const int num_y = gi.num_y;

  // Observed protected classes, ascending.
  std::vector<int> ds;
  for (int l = 0; l < L; ++l) {
    if (ds.empty() || ds.back() != gi.group_d[l]) ds.push_back(gi.group_d[l]);
  }

  ConstraintMatrix cm;
  cm.epsilon = epsilon;
  cm.target = t;

  auto upper_row = [&](int d, int y) {
    Eigen::VectorXd row(L);
    for (int l = 0; l < L; ++l) {
      double v = 0.0;
      if (gi.group_d[l] == d) {
        v = (1.0 + epsilon) * t.probs[y];
        if (gi.group_y[l] == y) v -= 1.0;
      }
      row[l] = v;
    }
    return row;
  };
  auto lower_row = [&](int d, int y) {
    Eigen::VectorXd row(L);
    for (int l = 0; l < L; ++l) {
      double v = 0.0;
      if (gi.group_d[l] == d) {
        v = -t.probs[y] / (1.0 + epsilon);
        if (gi.group_y[l] == y) v += 1.0;
      }
      row[l] = v;
    }
    return row;
  };

  std::vector<Eigen::VectorXd> rows;
  std::vector<ConstraintRowMeta> meta;
  const bool dedup = dedup_binary_y && num_y == 2;
  for (int d : ds) {
    for (int y = 0; y < num_y; ++y) {
      if (dedup) {
        // upper(d,y) - lower(d,1-y) = kappa_y * S_d with S_d >= 0, so the
        // looser of the pair is implied by the tighter for every theta >= 0.
        const int yo = 1 - y;
        const double kappa = (1.0 + epsilon) * t.probs[y] - 1.0 +
                             t.probs[yo] / (1.0 + epsilon);
        if (kappa >= 0.0) {
          rows.push_back(lower_row(d, yo));
          meta.push_back({d, yo, ConstraintSide::Lower});
        } else {
          rows.push_back(upper_row(d, y));
          meta.push_back({d, y, ConstraintSide::Upper});
        }
      } else {
        rows.push_back(upper_row(d, y));
        meta.push_back({d, y, ConstraintSide::Upper});
        rows.push_back(lower_row(d, y));
        meta.push_back({d, y, ConstraintSide::Lower});
      }
    }
  }

  cm.coeff.resize(static_cast<int>(rows.size()), L);
  for (int j = 0; j < static_cast<int>(rows.size()); ++j) cm.coeff.row(j) = rows[j];
  cm.row_meta = std::move(meta);
  return cm;
}

namespace {

// Per-(d, y) weight totals and per-d totals.
struct ClassSums {
  Eigen::MatrixXd dy;  // num_d x num_y
  Eigen::VectorXd d;   // num_d
};

ClassSums class_sums(const Eigen::Ref<const Eigen::VectorXd>& theta,
                     const GroupIndex& gi) {
  ClassSums s;
  s.dy = Eigen::MatrixXd::Zero(gi.num_d, gi.num_y);
  s.d = Eigen::VectorXd::Zero(gi.num_d);
  for (int l = 0; l < gi.size(); ++l) {
    double total = 0.0;
    for (int i : gi.groups[l]) total += theta[i];
    s.dy(gi.group_d[l], gi.group_y[l]) += total;
    s.d[gi.group_d[l]] += total;
  }
  return s;
}

}  // namespace

double fairness_violation(const Eigen::Ref<const Eigen::VectorXd>& theta,
                          const GroupIndex& gi, const MarginalY& t,
                          double epsilon) {
  const ClassSums s = class_sums(theta, gi);
  double worst = 0.0;
  for (int d = 0; d < gi.num_d; ++d) {
    if (!(s.d[d] > 0.0)) {
      throw EvalError("conditional undefined: protected class " + std::to_string(d) +
                      " has zero total weight");
    }
    for (int y = 0; y < gi.num_y; ++y) {
      const double p = s.dy(d, y) / s.d[d];
      const double ty = t.probs[y];
      worst = std::max(worst, ty / (1.0 + epsilon) - p);
      worst = std::max(worst, p - (1.0 + epsilon) * ty);
    }
  }
  return std::max(0.0, worst);
}

double pairwise_violation(const Eigen::Ref<const Eigen::VectorXd>& theta,
                          const GroupIndex& gi) {
  const ClassSums s = class_sums(theta, gi);
  std::vector<int> live;  // classes with conditionals
  for (int d = 0; d < gi.num_d; ++d) {
    if (s.d[d] > 0.0) live.push_back(d);
  }
  double worst = 0.0;
  for (int y = 0; y < gi.num_y; ++y) {
    for (size_t a = 0; a < live.size(); ++a) {
      for (size_t b = a + 1; b < live.size(); ++b) {
        const double p = s.dy(live[a], y) / s.d[live[a]];
        const double q = s.dy(live[b], y) / s.d[live[b]];
        if (p == 0.0 && q == 0.0) continue;  // equal rates
        if (p == 0.0 || q == 0.0) {
          return std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, ratio_distance(p, q));
      }
    }
  }
  return worst;
}

Eigen::VectorXd constraint_margins(const ConstraintMatrix& cm,
                                   const GroupIndex& gi,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta) {
  return cm.coeff * gi.group_sums(theta);
}

}  // namespace fairwasp
