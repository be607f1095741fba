#pragma once

#include <Eigen/Dense>

#include "fairwasp/accpm.hpp"
#include "fairwasp/recover.hpp"

namespace fairwasp {

// Configuration for the pairwise demographic-parity variant. The pairwise
// tolerance eps maps to the tightened marginal tolerance
// eps_bar = sqrt(1 + eps) - 1 used by every inner solve.
struct PWConfig {
  double epsilon = 0.05;
  double epsilon_bar = 0.0;
  int nm_max_evals = 200;
  double nm_tol = 1e-4;  // simplex diameter
  int restarts = 2;
  SolverConfig inner;

  static PWConfig for_epsilon(double eps);
};

enum class PWStatus { Converged, Infeasible, Flagged };

struct PWReport {
  WeightVector theta;
  MarginalY t_star;
  double objective = 0.0;
  int evaluations = 0;
  int inner_iterations = 0;  // summed over all inner solves
  double pairwise_viol = 0.0;
  PWStatus status = PWStatus::Infeasible;
  double epsilon_bar = 0.0;
};

// Inner objective H(t): best feasible transport cost of the marginal problem
// built at (t, eps_bar); +inf when that problem is infeasible. The compressed
// cost is computed once by the caller and reused across evaluations.
double h_objective(const Eigen::Ref<const Eigen::VectorXd>& t,
                   const CompressedCost& cc, const GroupIndex& gi,
                   const PWConfig& cfg);

// Nelder-Mead over t in [0,1]^|Y| starting from the empirical marginal, with
// deterministic perturbed restarts. Proposals are clipped to the box.
PWReport solve_pw(const Dataset& ds, const PWConfig& cfg);

}  // namespace fairwasp
