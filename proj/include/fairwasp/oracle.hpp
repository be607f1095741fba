#pragma once

#include <Eigen/Dense>

#include <optional>

#include "fairwasp/cost.hpp"
#include "fairwasp/dataset.hpp"
#include "fairwasp/recover.hpp"

// Brute-force reference solvers for desk-scale instances. Test and
// verification machinery only; nothing on the main solve path calls these.
namespace fairwasp::oracle {

struct OracleResult {
  double objective = 0.0;
  std::optional<WeightVector> theta;
  long feasible_count = 0;
};

// Exact nonnegative rational, for boundary-exact feasibility filtering.
struct Rational {
  long long num = 0;
  long long den = 1;

  // Continued-fraction reconstruction of a double (tolerance 1e-12).
  static Rational from_double(double x);
};

// Band comparisons against (1+eps) or sqrt(1+eps), exact in integers.
// Squaring handles the sqrt bound without leaving the rationals.
enum class BoundKind { Plain, SqrtOnePlus };

// Exact optimal transport cost for fixed integer weights: every assignment
// of rows to columns with column multiplicities theta is enumerated.
double transport_cost_enum(const Dataset& ds, const WeightVector& theta,
                           CostMetric metric = CostMetric::Euclidean);

// Same value via successive shortest augmenting paths on the bipartite
// transportation graph (Dijkstra with potentials).
double transport_cost_flow(const Dataset& ds, const WeightVector& theta,
                           CostMetric metric = CostMetric::Euclidean);

// Dispatcher: enumeration up to n = 8, flow up to n = 200.
double transport_cost(const Dataset& ds, const WeightVector& theta,
                      CostMetric metric = CostMetric::Euclidean);

// Enumerates every integer theta >= 0 with sum n, filters by the marginal
// fairness band at (t, eps) using exact integer group sums, and minimizes the
// exact transport cost. n <= 7.
OracleResult brute_mip(const Dataset& ds, const MarginalY& t, double epsilon,
                       BoundKind bound = BoundKind::Plain);

// Same enumeration filtered by the pairwise ratio constraint at eps, exact on
// rational conditionals. Classes with zero total weight are skipped; a zero
// conditional against a positive one is infeasible for any finite eps.
OracleResult brute_pairwise_mip(const Dataset& ds, double epsilon);

// Exact feasibility of one integer theta under the marginal band; exposed for
// set-containment checks.
bool marginal_feasible_exact(const Eigen::VectorXi& theta, const GroupIndex& gi,
                             const MarginalY& t, double epsilon,
                             BoundKind bound = BoundKind::Plain);
bool pairwise_feasible_exact(const Eigen::VectorXi& theta, const GroupIndex& gi,
                             double epsilon);

}  // namespace fairwasp::oracle
