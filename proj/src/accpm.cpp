#include "fairwasp/accpm.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fairwasp/common.hpp"
#include "fairwasp/polish.hpp"

namespace fairwasp {

CutSet CutSet::box(int m, double radius) {
  CutSet cs;
  cs.dim = m;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(m);
    lo[j] = -1.0;  // lambda_j >= 0
    cs.add(std::move(lo), 0.0, true);
    Eigen::VectorXd hi = Eigen::VectorXd::Zero(m);
    hi[j] = 1.0;  // lambda_j <= radius
    cs.add(std::move(hi), radius, true);
  }
  return cs;
}

void CutSet::add(Eigen::VectorXd g, double b, bool is_box) {
  cuts.push_back(Cut{std::move(g), b, is_box});
}

double CutSet::barrier(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  double phi = 0.0;
  for (const Cut& c : cuts) {
    const double s = c.b - c.g.dot(lambda);
    if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
    phi -= std::log(s);
  }
  return phi;
}

namespace {

struct ACResult {
  Eigen::VectorXd center;
  Eigen::MatrixXd hessian;  // barrier Hessian at the center
};

// Damped Newton on the log barrier from a strictly feasible start.
// Backtracking parameters (0.25, 0.5); stops on Newton decrement <= tol.
// The Newton system (G^T D^2 G) step = -G^T d is solved as the least-squares
// problem min ||D G step + e||, which halves the condition number exponent:
// slacks span many orders of magnitude once cuts crowd the optimum.
ACResult ac_newton(const CutSet& cs, Eigen::VectorXd lambda, double newton_tol,
                   int newton_max) {
  const int m = cs.dim;
  const int k = static_cast<int>(cs.cuts.size());
  Eigen::MatrixXd G(k, m);
  Eigen::VectorXd b(k);
  for (int i = 0; i < k; ++i) {
    G.row(i) = cs.cuts[i].g;
    b[i] = cs.cuts[i].b;
  }

  Eigen::VectorXd s = b - G * lambda;
  if (s.minCoeff() <= 0.0) {
    throw InteriorCollapse("analytic center: warm start not strictly feasible");
  }
  double phi = -s.array().log().sum();

  // A stalled line search below this decrement still returns the point: the
  // center is then located to far better accuracy than a cut needs.
  const double stall_tol = 1e-4;

  Eigen::MatrixXd Gs(k, m);
  double decrement = std::numeric_limits<double>::infinity();
  for (int it = 0; it < newton_max; ++it) {
    const Eigen::VectorXd d = s.cwiseInverse();
    const Eigen::VectorXd grad = G.transpose() * d;
    Gs = d.asDiagonal() * G;

    const Eigen::VectorXd step =
        Gs.colPivHouseholderQr().solve(-Eigen::VectorXd::Ones(k));
    const double descent = grad.dot(step);  // -decrement^2 for an exact solve
    decrement = std::sqrt(std::max(0.0, -descent));
    if (decrement <= newton_tol) {
      return {std::move(lambda), Gs.transpose() * Gs};
    }
    if (descent >= 0.0) {
      if (decrement <= stall_tol) return {std::move(lambda), Gs.transpose() * Gs};
      throw InteriorCollapse("analytic center: no descent direction");
    }

    double t = 1.0;
    bool moved = false;
    while (t >= 1e-16) {
      const Eigen::VectorXd cand = lambda + t * step;
      const Eigen::VectorXd sc = b - G * cand;
      if (sc.minCoeff() > 0.0) {
        const double phic = -sc.array().log().sum();
        if (phic <= phi + 0.25 * t * descent) {
          lambda = cand;
          s = sc;
          phi = phic;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) {
      if (decrement <= stall_tol) return {std::move(lambda), Gs.transpose() * Gs};
      throw InteriorCollapse("analytic center: line search failed");
    }
    if (log_level() >= LogLevel::Debug) {
      std::ostringstream os;
      os << "  newton it=" << it << " dec=" << decrement << " t=" << t
         << " minslack=" << s.minCoeff() << " phi=" << phi;
      log(LogLevel::Debug, os.str());
    }
  }
  if (decrement <= stall_tol) {
    const Eigen::VectorXd d = s.cwiseInverse();
    Gs = d.asDiagonal() * G;
    return {std::move(lambda), Gs.transpose() * Gs};
  }
  throw InteriorCollapse("analytic center: Newton iteration limit");
}

// Strictly feasible start for the next center after adding cut (g, .) through
// the previous center: step inside the Dikin ellipsoid, which the barrier
// Hessian guarantees stays inside the old polytope.
Eigen::VectorXd dikin_start(const CutSet& cs, const Eigen::VectorXd& center,
                            const Eigen::MatrixXd& hessian,
                            const Eigen::VectorXd& g) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
  Eigen::VectorXd dir;
  if (ldlt.info() == Eigen::Success) {
    dir = ldlt.solve(g);
  } else {
    dir = g;
  }
  const double denom = std::sqrt(std::max(1e-300, g.dot(dir)));
  dir /= denom;
  for (double alpha : {0.5, 0.25, 0.05, 0.005, 5e-4}) {
    Eigen::VectorXd cand = center - alpha * dir;
    bool ok = true;
    for (const Cut& c : cs.cuts) {
      if (!(c.b - c.g.dot(cand) > 0.0)) {
        ok = false;
        break;
      }
    }
    if (ok) return cand;
  }
  throw InteriorCollapse("localization set has no usable interior");
}

void drop_slack_cuts(CutSet& cs, const Eigen::VectorXd& center, int keep) {
  std::vector<int> nonbox;
  for (int i = 0; i < static_cast<int>(cs.cuts.size()); ++i) {
    if (!cs.cuts[i].box) nonbox.push_back(i);
  }
  if (static_cast<int>(nonbox.size()) <= keep) return;
  std::sort(nonbox.begin(), nonbox.end(), [&](int a, int b) {
    const double sa = cs.cuts[a].b - cs.cuts[a].g.dot(center);
    const double sb = cs.cuts[b].b - cs.cuts[b].g.dot(center);
    return sa > sb;  // largest slack first
  });
  std::vector<bool> drop(cs.cuts.size(), false);
  for (size_t r = 0; r + keep < nonbox.size(); ++r) drop[nonbox[r]] = true;
  std::vector<Cut> kept;
  kept.reserve(cs.cuts.size());
  for (size_t i = 0; i < cs.cuts.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(cs.cuts[i]));
  }
  cs.cuts = std::move(kept);
}

}  // namespace

Eigen::VectorXd analytic_center(const CutSet& cuts,
                                const Eigen::Ref<const Eigen::VectorXd>& warm_start,
                                double newton_tol, int newton_max) {
  return ac_newton(cuts, warm_start, newton_tol, newton_max).center;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::NumericalFailure: return "numerical-failure";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

SolverReport solve(const CompressedCost& cc, const ConstraintMatrix& cm,
                   const SolverConfig& cfg) {
  const int m = cm.rows();
  const int n = cc.n;
  const double inf = std::numeric_limits<double>::infinity();

  double radius = cfg.lambda_max * (1.0 + cc.row_group_min.maxCoeff());
  // Any feasible transport plan costs at most n * max_cost, so a dual bound
  // above that certifies an empty feasible set.
  const double infeasibility_cap = n * cc.max_cost + 1.0;
  const double margin_tol = 1e-9 * n;
  const int drop_at = cfg.cut_drop_threshold.value_or(30 * m);

  SolverReport rep;
  rep.best_dual = -inf;
  rep.best_primal = inf;
  rep.rel_gap = inf;
  rep.status = SolveStatus::IterationLimit;

  auto update_gap = [&] {
    if (rep.has_primal && rep.best_dual > -inf) {
      rep.rel_gap = std::abs(rep.best_primal - rep.best_dual) /
                    (1.0 + std::abs(rep.best_primal) + std::abs(rep.best_dual));
    }
  };

  // Argmax candidates break ties all one way, so near a degenerate optimum
  // they can stay infeasible forever; the polish pass rebalances a few rows
  // in group space and usually lands on the optimal integer weights.
  auto run_polish = [&](const Eigen::VectorXi& assignment) {
    const PolishResult pol = polish_assignment(assignment, cc, cm);
    if (pol.feasible && pol.objective < rep.best_primal) {
      rep.best_primal = pol.objective;
      rep.best_theta = pol.theta;
      rep.has_primal = true;
      update_gap();
    }
  };

  auto final_polish = [&] {
    if (rep.lambda_star.size() != m) return;
    if (rep.has_primal && rep.rel_gap <= cfg.gap_tol) return;
    run_polish(evaluate(rep.lambda_star, cc, cm, cfg.threads).chosen_group);
    // identity start diversifies away from the dual's tie-breaking
    Eigen::VectorXi own(n);
    for (int i = 0; i < n; ++i) {
      int bl = 0;
      for (int l = 1; l < cc.L; ++l) {
        if (cc.row_group_min(i, l) < cc.row_group_min(i, bl)) bl = l;
      }
      own[i] = bl;
    }
    run_polish(own);
    // a class observed with a lopsided outcome mix may be cheapest to zero
    // out entirely; those optima sit behind whole-class moves that unit
    // exchanges cannot reach, so seed them explicitly. Constraint rows only
    // touch groups of their own class, which recovers the group -> class map.
    const int L = cc.L;
    std::vector<int> group_class(L, -1);
    for (int j = 0; j < cm.rows(); ++j) {
      for (int l = 0; l < L; ++l) {
        if (cm.coeff(j, l) != 0.0 && group_class[l] == -1) {
          group_class[l] = cm.row_meta[j].d;
        }
      }
    }
    std::vector<int> classes;
    for (int l = 0; l < L; ++l) {
      if (group_class[l] >= 0 &&
          std::find(classes.begin(), classes.end(), group_class[l]) == classes.end()) {
        classes.push_back(group_class[l]);
      }
    }
    if (classes.size() > 1) {
      for (int kill : classes) {
        Eigen::VectorXi start = own;
        for (int i = 0; i < n; ++i) {
          if (group_class[start[i]] != kill) continue;
          int bl = -1;
          for (int l = 0; l < L; ++l) {
            if (group_class[l] == kill) continue;
            if (bl == -1 || cc.row_group_min(i, l) < cc.row_group_min(i, bl)) bl = l;
          }
          if (bl >= 0) start[i] = bl;
        }
        run_polish(start);
      }
    }
  };

  auto finalize = [&](SolveStatus status) {
    rep.status = status;
    rep.box_radius = radius;
    if (rep.lambda_star.size() == 0) rep.lambda_star = Eigen::VectorXd::Zero(m);
    return rep;
  };

  for (int restart = 0; restart <= 3; ++restart) {
    CutSet cuts = CutSet::box(m, radius);
    Eigen::VectorXd warm = Eigen::VectorXd::Constant(m, radius / 2.0);
    bool want_restart = false;

    while (rep.iterations < cfg.max_iters) {
      ++rep.iterations;
      ACResult ac;
      try {
        ac = ac_newton(cuts, warm, cfg.newton_tol, cfg.newton_max);
      } catch (const InteriorCollapse& e) {
        log(LogLevel::Info, std::string("solver stop: ") + e.what());
        final_polish();
        if (rep.has_primal && rep.rel_gap <= cfg.gap_tol) {
          return finalize(SolveStatus::Converged);
        }
        return finalize(rep.has_primal ? SolveStatus::NumericalFailure
                                       : SolveStatus::Infeasible);
      }
      const Eigen::VectorXd& center = ac.center;

      if (center.minCoeff() < 0.0) {
        // Numerically drifted outside the cone: coordinate feasibility cut.
        const SeparationCut cut = separation_oracle(center, cc, cm, cfg.threads);
        cuts.add(cut.g, 0.0);
        try {
          warm = dikin_start(cuts, center, ac.hessian, cut.g);
        } catch (const InteriorCollapse& e) {
          log(LogLevel::Info, std::string("solver stop: ") + e.what());
          return finalize(rep.has_primal ? SolveStatus::NumericalFailure
                                         : SolveStatus::Infeasible);
        }
        continue;
      }

      const DualEvaluation ev = evaluate(center, cc, cm, cfg.threads);
      const double dual_val = -ev.value;
      if (dual_val > rep.best_dual) {
        rep.best_dual = dual_val;
        rep.lambda_star = center;
        rep.tie_count = ev.tie_count;
      }

      // The subgradient doubles as the candidate's constraint margins:
      // g_j = sum_l coeff[j][l] * (rows assigned to group l).
      const bool feasible = ev.subgradient.minCoeff() >= -margin_tol;
      if (feasible && ev.primal_objective < rep.best_primal) {
        rep.best_primal = ev.primal_objective;
        rep.best_theta = ev.column_counts;
        rep.has_primal = true;
      }
      update_gap();
      if (rep.iterations % 10 == 1 &&
          !(rep.has_primal && rep.rel_gap <= cfg.gap_tol)) {
        run_polish(ev.chosen_group);
      }

      if (log_level() >= LogLevel::Debug) {
        std::ostringstream os;
        os << "iter=" << rep.iterations << " F=" << ev.value
           << " best_dual=" << rep.best_dual << " best_primal=" << rep.best_primal
           << " rel_gap=" << rep.rel_gap << " cuts=" << cuts.cuts.size();
        log(LogLevel::Debug, os.str());
      }

      if (rep.has_primal && rep.rel_gap <= cfg.gap_tol) {
        bool upper_active = false;
        for (int j = 0; j < m; ++j) {
          if (radius - center[j] <= 1e-6 * radius) upper_active = true;
        }
        if (upper_active && restart < 3) {
          log(LogLevel::Info, "upper box face active at convergence; doubling R");
          radius *= 2.0;
          ++rep.restarts;
          want_restart = true;
          break;
        }
        return finalize(SolveStatus::Converged);
      }
      if (rep.best_dual > infeasibility_cap) {
        log(LogLevel::Info, "dual bound exceeds any feasible cost; infeasible");
        return finalize(SolveStatus::Infeasible);
      }

      const Eigen::VectorXd& g = ev.subgradient;
      const double gnorm = g.norm();
      if (gnorm <= 1e-14 * (1.0 + std::abs(ev.value))) {
        // Flat subgradient: F is minimized here; nothing further to cut.
        final_polish();
        return finalize(rep.has_primal ? SolveStatus::Converged
                                       : SolveStatus::NumericalFailure);
      }
      // normalized cut: slacks are then distances, which keeps the barrier
      // Hessian as well scaled as the geometry allows
      cuts.add(g / gnorm, g.dot(center) / gnorm);
      if (static_cast<int>(cuts.cuts.size()) - 2 * m > drop_at) {
        drop_slack_cuts(cuts, center, std::max(1, drop_at / 2));
      }

      try {
        warm = dikin_start(cuts, center, ac.hessian, g);
      } catch (const InteriorCollapse& e) {
        log(LogLevel::Info, std::string("solver stop: ") + e.what());
        final_polish();
        if (rep.has_primal && rep.rel_gap <= cfg.gap_tol) {
          return finalize(SolveStatus::Converged);
        }
        return finalize(rep.has_primal ? SolveStatus::NumericalFailure
                                       : SolveStatus::Infeasible);
      }
    }
    if (!want_restart) break;  // iteration budget exhausted
  }
  final_polish();
  return finalize(rep.has_primal && rep.rel_gap <= cfg.gap_tol
                      ? SolveStatus::Converged
                      : SolveStatus::IterationLimit);
}

}  // namespace fairwasp
