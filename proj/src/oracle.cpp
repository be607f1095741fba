#include "fairwasp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fairwasp/common.hpp"

namespace fairwasp::oracle {

Rational Rational::from_double(double x) {
  if (x < 0.0 || !std::isfinite(x)) {
    throw std::domain_error("oracle rationals must be finite and nonnegative");
  }
  // Continued fractions, denominator capped at 1e9; exact for every value
  // used here (counts/n, decimal grids, decimal tolerances).
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int it = 0; it < 64; ++it) {
    const double a_f = std::floor(frac);
    const long long a = static_cast<long long>(a_f);
    const long long p2 = a * p1 + p0;
    const long long q2 = a * q1 + q0;
    if (q2 > 1000000000LL) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) < 1e-12) break;
    const double rem = frac - a_f;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  return Rational{p1, q1};
}

namespace {

using i128 = __int128;

Eigen::MatrixXd cost_matrix(const Dataset& ds, CostMetric metric) {
  const int n = ds.n();
  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = pair_cost(ds, i, j, metric);
  return C;
}

// All row->column assignments respecting remaining column capacities,
// with branch-and-bound pruning on the running sum.
void enum_assignments(const Eigen::MatrixXd& C, int row, std::vector<int>& cap,
                      double partial, double& best) {
  const int n = static_cast<int>(cap.size());
  if (partial >= best) return;
  if (row == n) {
    best = partial;
    return;
  }
  for (int j = 0; j < n; ++j) {
    if (cap[j] == 0) continue;
    --cap[j];
    enum_assignments(C, row + 1, cap, partial + C(row, j), best);
    ++cap[j];
  }
}

double enum_cost(const Eigen::MatrixXd& C, const Eigen::VectorXi& theta) {
  const int n = static_cast<int>(theta.size());
  std::vector<int> cap(theta.data(), theta.data() + n);
  double best = std::numeric_limits<double>::infinity();
  enum_assignments(C, 0, cap, 0.0, best);
  return best;
}

// Successive shortest augmenting paths with Johnson potentials on the dense
// bipartite transportation graph: rows supply one unit each, column j demands
// theta_j units. O(n) augmentations, O(n^2) Dijkstra each.
double flow_cost(const Eigen::MatrixXd& C, const Eigen::VectorXi& theta) {
  const int n = static_cast<int>(theta.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<int> row_to(n, -1);
  std::vector<int> col_used(n, 0);
  std::vector<double> pot_row(n, 0.0), pot_col(n, 0.0);

  for (int unit = 0; unit < n; ++unit) {
    std::vector<double> dist_row(n, inf), dist_col(n, inf);
    std::vector<int> prev_col_row(n, -1);  // col reached from this row
    std::vector<int> prev_row_col(n, -1);  // row reached back from this col; -2 = free
    std::vector<bool> done_row(n, false), done_col(n, false);
    for (int i = 0; i < n; ++i) {
      if (row_to[i] == -1) {
        dist_row[i] = 0.0;
        prev_row_col[i] = -2;
      }
    }
    int end_col = -1;
    double end_dist = inf;
    while (true) {
      double best = inf;
      int bi = -1;
      bool is_col = false;
      for (int i = 0; i < n; ++i) {
        if (!done_row[i] && dist_row[i] < best) { best = dist_row[i]; bi = i; is_col = false; }
      }
      for (int j = 0; j < n; ++j) {
        if (!done_col[j] && dist_col[j] < best) { best = dist_col[j]; bi = j; is_col = true; }
      }
      if (bi == -1) break;
      if (is_col) {
        done_col[bi] = true;
        if (col_used[bi] < theta[bi]) {
          end_col = bi;
          end_dist = best;
          break;
        }
        // saturated column: residual arcs back to the rows currently on it
        for (int i = 0; i < n; ++i) {
          if (row_to[i] != bi || done_row[i]) continue;
          const double w = -(C(i, bi) + pot_row[i] - pot_col[bi]);
          if (dist_col[bi] + w < dist_row[i]) {
            dist_row[i] = dist_col[bi] + w;
            prev_row_col[i] = bi;
          }
        }
      } else {
        done_row[bi] = true;
        for (int j = 0; j < n; ++j) {
          if (done_col[j]) continue;
          const double w = C(bi, j) + pot_row[bi] - pot_col[j];
          if (dist_row[bi] + w < dist_col[j]) {
            dist_col[j] = dist_row[bi] + w;
            prev_col_row[j] = bi;
          }
        }
      }
    }
    if (end_col == -1) throw EvalError("transport flow: no augmenting path");

    // Johnson update clamped at the target distance, applied to every node:
    // unreached nodes take the clamp too, or their stale potentials produce
    // negative reduced costs in later rounds.
    for (int i = 0; i < n; ++i) pot_row[i] += std::min(dist_row[i], end_dist);
    for (int j = 0; j < n; ++j) pot_col[j] += std::min(dist_col[j], end_dist);

    int col = end_col;
    while (true) {
      const int row = prev_col_row[col];
      const int pcol = prev_row_col[row];
      row_to[row] = col;
      if (pcol == -2) break;
      col = pcol;
    }
    ++col_used[end_col];
  }

  double total = 0.0;
  for (int i = 0; i < n; ++i) total += C(i, row_to[i]);
  return total;
}

}  // namespace

double transport_cost_enum(const Dataset& ds, const WeightVector& theta,
                           CostMetric metric) {
  if (ds.n() > 8) throw std::invalid_argument("enumeration transport limited to n <= 8");
  if (theta.sum() != ds.n()) throw std::invalid_argument("weights must sum to n");
  return enum_cost(cost_matrix(ds, metric), theta.weights);
}

double transport_cost_flow(const Dataset& ds, const WeightVector& theta,
                           CostMetric metric) {
  if (ds.n() > 200) throw std::invalid_argument("flow transport limited to n <= 200");
  if (theta.sum() != ds.n()) throw std::invalid_argument("weights must sum to n");
  return flow_cost(cost_matrix(ds, metric), theta.weights);
}

double transport_cost(const Dataset& ds, const WeightVector& theta,
                      CostMetric metric) {
  if (ds.n() <= 8) return transport_cost_enum(ds, theta, metric);
  return transport_cost_flow(ds, theta, metric);
}

namespace {

// Integer class sums of one candidate.
struct ClassSumsInt {
  Eigen::MatrixXi dy;  // num_d x num_y
  Eigen::VectorXi d;   // num_d

  void load(const Eigen::VectorXi& theta, const GroupIndex& gi) {
    dy.setZero(gi.num_d, gi.num_y);
    d.setZero(gi.num_d);
    for (int i = 0; i < gi.n(); ++i) {
      const int l = gi.group_of[i];
      dy(gi.group_d[l], gi.group_y[l]) += theta[i];
      d[gi.group_d[l]] += theta[i];
    }
  }
};

bool marginal_ok(const ClassSumsInt& f, const std::vector<Rational>& t,
                 const Rational& eps, BoundKind bound) {
  const i128 p = eps.num, q = eps.den;
  for (int d = 0; d < f.d.size(); ++d) {
    const i128 sd = f.d[d];
    for (int y = 0; y < f.dy.cols(); ++y) {
      const i128 sdy = f.dy(d, y);
      const i128 cn = t[y].num, cd = t[y].den;
      if (bound == BoundKind::Plain) {
        // upper: sdy <= (1+eps) t_y sd   <=>   q cd sdy <= (q+p) cn sd
        if (q * cd * sdy > (q + p) * cn * sd) return false;
        // lower: sdy >= t_y/(1+eps) sd   <=>   (q+p) cd sdy >= q cn sd
        if ((q + p) * cd * sdy < q * cn * sd) return false;
      } else {
        // band at sqrt(1+eps) = sqrt((q+p)/q): compare squares
        const i128 a = cd * sdy, b = cn * sd;
        if (q * a * a > (q + p) * b * b) return false;
        if ((q + p) * a * a < q * b * b) return false;
      }
    }
  }
  return true;
}

bool pairwise_ok(const ClassSumsInt& f, const Rational& eps) {
  const i128 p = eps.num, q = eps.den;
  const int num_d = static_cast<int>(f.d.size());
  for (int y = 0; y < f.dy.cols(); ++y) {
    for (int d1 = 0; d1 < num_d; ++d1) {
      if (f.d[d1] == 0) continue;  // class carries no conditional
      for (int d2 = d1 + 1; d2 < num_d; ++d2) {
        if (f.d[d2] == 0) continue;
        const i128 a = f.dy(d1, y), b = f.dy(d2, y);
        const i128 sd1 = f.d[d1], sd2 = f.d[d2];
        // J(a/sd1, b/sd2) <= eps cross-multiplied; 0 vs 0 passes,
        // 0 vs positive fails one side.
        if (q * a * sd2 > (q + p) * b * sd1) return false;
        if (q * b * sd1 > (q + p) * a * sd2) return false;
      }
    }
  }
  return true;
}

template <typename Fn>
void enum_compositions(Eigen::VectorXi& theta, int pos, int remaining, Fn&& fn) {
  if (pos == theta.size() - 1) {
    theta[pos] = remaining;
    fn(theta);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    theta[pos] = v;
    enum_compositions(theta, pos + 1, remaining - v, fn);
  }
}

std::vector<Rational> rational_marginal(const MarginalY& t) {
  std::vector<Rational> out;
  out.reserve(t.probs.size());
  for (int y = 0; y < t.probs.size(); ++y) out.push_back(Rational::from_double(t.probs[y]));
  return out;
}

}  // namespace

bool marginal_feasible_exact(const Eigen::VectorXi& theta, const GroupIndex& gi,
                             const MarginalY& t, double epsilon, BoundKind bound) {
  ClassSumsInt f;
  f.load(theta, gi);
  return marginal_ok(f, rational_marginal(t), Rational::from_double(epsilon), bound);
}

bool pairwise_feasible_exact(const Eigen::VectorXi& theta, const GroupIndex& gi,
                             double epsilon) {
  ClassSumsInt f;
  f.load(theta, gi);
  return pairwise_ok(f, Rational::from_double(epsilon));
}

OracleResult brute_mip(const Dataset& ds, const MarginalY& t, double epsilon,
                       BoundKind bound) {
  const int n = ds.n();
  if (n > 7) throw std::invalid_argument("brute_mip limited to n <= 7");
  const GroupIndex gi = group_index(ds);
  const std::vector<Rational> tr = rational_marginal(t);
  const Rational eps = Rational::from_double(epsilon);
  const Eigen::MatrixXd C = cost_matrix(ds, CostMetric::Euclidean);

  OracleResult res;
  res.objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXi theta(n);
  ClassSumsInt f;
  enum_compositions(theta, 0, n, [&](const Eigen::VectorXi& th) {
    f.load(th, gi);
    if (!marginal_ok(f, tr, eps, bound)) return;
    ++res.feasible_count;
    const double cost = flow_cost(C, th);
    if (cost < res.objective) {
      res.objective = cost;
      res.theta = WeightVector{th};
    }
  });
  return res;
}

OracleResult brute_pairwise_mip(const Dataset& ds, double epsilon) {
  const int n = ds.n();
  if (n > 7) throw std::invalid_argument("brute_pairwise_mip limited to n <= 7");
  const GroupIndex gi = group_index(ds);
  const Rational eps = Rational::from_double(epsilon);
  const Eigen::MatrixXd C = cost_matrix(ds, CostMetric::Euclidean);

  OracleResult res;
  res.objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXi theta(n);
  ClassSumsInt f;
  enum_compositions(theta, 0, n, [&](const Eigen::VectorXi& th) {
    f.load(th, gi);
    if (!pairwise_ok(f, eps)) return;
    ++res.feasible_count;
    const double cost = flow_cost(C, th);
    if (cost < res.objective) {
      res.objective = cost;
      res.theta = WeightVector{th};
    }
  });
  return res;
}

}  // namespace fairwasp::oracle
