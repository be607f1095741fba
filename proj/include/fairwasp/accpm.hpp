#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "fairwasp/dual.hpp"

namespace fairwasp {

struct SolverConfig {
  double gap_tol = 1e-3;
  int max_iters = 500;
  // Box scale: the initial localization set is [0, R]^m with
  // R = lambda_max * (1 + max row_group_min).
  double lambda_max = 1e4;
  double newton_tol = 1e-8;  // on the Newton decrement
  int newton_max = 50;
  std::optional<int> cut_drop_threshold;  // default 30*m, trimmed to 15*m
  int threads = 1;
};

// Affine cut g^T lambda <= b. Box cuts bound the initial set and are never
// dropped.
struct Cut {
  Eigen::VectorXd g;
  double b = 0.0;
  bool box = false;
};

// Localization set {lambda : g_i^T lambda <= b_i for all i}. Valid cuts keep
// every optimal lambda inside.
struct CutSet {
  std::vector<Cut> cuts;
  int dim = 0;

  static CutSet box(int m, double radius);
  void add(Eigen::VectorXd g, double b, bool is_box = false);
  // -sum_i log(slack_i); +inf outside the interior.
  double barrier(const Eigen::Ref<const Eigen::VectorXd>& lambda) const;
};

// Thrown when no strictly interior point can be maintained.
struct InteriorCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Analytic center: minimizer of the log barrier, by damped Newton with
// backtracking (0.25, 0.5) from a strictly feasible warm start. Stops when
// the Newton decrement falls below newton_tol.
Eigen::VectorXd analytic_center(const CutSet& cuts,
                                const Eigen::Ref<const Eigen::VectorXd>& warm_start,
                                double newton_tol = 1e-8, int newton_max = 50);

enum class SolveStatus { Converged, IterationLimit, NumericalFailure, Infeasible };

std::string to_string(SolveStatus s);

struct SolverReport {
  Eigen::VectorXd lambda_star;   // best query point by dual value
  double best_dual = 0.0;        // max over iterations of -F(lambda^k)
  double best_primal = 0.0;      // <C, P^k> of the best feasible candidate
  Eigen::VectorXi best_theta;    // its integer weights (empty if none found)
  double rel_gap = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::IterationLimit;
  int tie_count = 0;             // ties at lambda_star (Assumption 1 stress)
  double box_radius = 0.0;       // final R after any doubling
  int restarts = 0;
  bool has_primal = false;
};

// Analytic-center cutting-plane minimization of F over lambda >= 0.
// Each iteration queries the separation oracle at the current center, adds
// the neutral cut through it, and tracks the certified duality gap
// |best_primal - best_dual| / (1 + |best_primal| + |best_dual|).
SolverReport solve(const CompressedCost& cc, const ConstraintMatrix& cm,
                   const SolverConfig& cfg = SolverConfig{});

}  // namespace fairwasp
