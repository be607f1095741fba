#include "fairwasp/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "fairwasp/common.hpp"
#include "fairwasp/fairness.hpp"

namespace fairwasp {

PWConfig PWConfig::for_epsilon(double eps) {
  PWConfig cfg;
  cfg.epsilon = eps;
  cfg.epsilon_bar = std::sqrt(1.0 + eps) - 1.0;
  return cfg;
}

namespace {

Eigen::VectorXd clip01(Eigen::VectorXd t) {
  for (int i = 0; i < t.size(); ++i) t[i] = std::min(1.0, std::max(0.0, t[i]));
  return t;
}

struct InnerResult {
  double h = std::numeric_limits<double>::infinity();
  SolverReport report;
};

InnerResult solve_inner(const Eigen::VectorXd& t, const CompressedCost& cc,
                        const GroupIndex& gi, const PWConfig& cfg) {
  MarginalY target;
  target.probs = clip01(t);
  const ConstraintMatrix cm =
      build_constraints(gi, target, cfg.epsilon_bar, /*dedup_binary_y=*/true);
  InnerResult out;
  out.report = solve(cc, cm, cfg.inner);
  if (out.report.has_primal &&
      (out.report.status == SolveStatus::Converged ||
       out.report.status == SolveStatus::IterationLimit)) {
    out.h = out.report.best_primal;
  }
  return out;
}

}  // namespace

double h_objective(const Eigen::Ref<const Eigen::VectorXd>& t,
                   const CompressedCost& cc, const GroupIndex& gi,
                   const PWConfig& cfg) {
  return solve_inner(t, cc, gi, cfg).h;
}

PWReport solve_pw(const Dataset& ds, const PWConfig& cfg) {
  const GroupIndex gi = group_index(ds);
  CompressOptions copts;
  copts.threads = cfg.inner.threads;
  const CompressedCost cc = compress(ds, gi, copts);  // O(n^2) init happens once
  const Eigen::VectorXd t0 = marginal_y(ds).probs;
  const int dim = static_cast<int>(t0.size());

  PWReport rep;
  rep.epsilon_bar = cfg.epsilon_bar;
  double best_h = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_t;
  SolverReport best_inner;
  int evals = 0;

  auto eval_point = [&](const Eigen::VectorXd& t) {
    const InnerResult r = solve_inner(t, cc, gi, cfg);
    ++evals;
    rep.inner_iterations += r.report.iterations;
    if (r.h < best_h) {
      best_h = r.h;
      best_t = clip01(t);
      best_inner = r.report;
    }
    return r.h;
  };

  // One Nelder-Mead run with standard coefficients (1, 2, 0.5, 0.5),
  // proposals clipped into the unit box.
  auto nelder_mead = [&](const Eigen::VectorXd& start) {
    std::vector<Eigen::VectorXd> x;
    std::vector<double> f;
    x.push_back(clip01(start));
    f.push_back(eval_point(x[0]));
    for (int y = 0; y < dim; ++y) {
      Eigen::VectorXd v = x[0];
      v[y] += v[y] + 0.05 <= 1.0 ? 0.05 : -0.05;
      x.push_back(clip01(v));
      f.push_back(eval_point(x.back()));
    }
    int run_evals = dim + 1;

    while (run_evals < cfg.nm_max_evals) {
      // order vertices best..worst
      std::vector<int> idx(x.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
      std::vector<Eigen::VectorXd> xs;
      std::vector<double> fs;
      for (int i : idx) {
        xs.push_back(x[i]);
        fs.push_back(f[i]);
      }
      x = xs;
      f = fs;

      double diam = 0.0;
      for (size_t i = 1; i < x.size(); ++i) diam = std::max(diam, (x[i] - x[0]).norm());
      if (diam < cfg.nm_tol) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < dim; ++i) centroid += x[i];
      centroid /= dim;
      const Eigen::VectorXd& worst = x[dim];

      const Eigen::VectorXd xr = clip01(centroid + (centroid - worst));
      const double fr = eval_point(xr);
      ++run_evals;

      if (fr < f[0]) {
        const Eigen::VectorXd xe = clip01(centroid + 2.0 * (centroid - worst));
        const double fe = eval_point(xe);
        ++run_evals;
        if (fe < fr) {
          x[dim] = xe;
          f[dim] = fe;
        } else {
          x[dim] = xr;
          f[dim] = fr;
        }
        continue;
      }
      if (fr < f[dim - 1]) {
        x[dim] = xr;
        f[dim] = fr;
        continue;
      }
      const Eigen::VectorXd xc = clip01(centroid + 0.5 * ((fr < f[dim] ? xr : worst) - centroid));
      const double fc = eval_point(xc);
      ++run_evals;
      if (fc < std::min(fr, f[dim])) {
        x[dim] = xc;
        f[dim] = fc;
        continue;
      }
      // shrink toward the best vertex
      for (int i = 1; i <= dim; ++i) {
        x[i] = clip01(x[0] + 0.5 * (x[i] - x[0]));
        f[i] = eval_point(x[i]);
        ++run_evals;
      }
    }
  };

  nelder_mead(t0);
  for (int r = 1; r <= cfg.restarts; ++r) {
    // deterministic perturbed starts; no RNG so reruns are byte-identical
    Eigen::VectorXd start = t0;
    for (int y = 0; y < dim; ++y) {
      const double sign = ((y + r) % 2 == 0) ? 1.0 : -1.0;
      start[y] += sign * 0.12 * r;
    }
    nelder_mead(clip01(start));
  }

  rep.evaluations = evals;
  if (!std::isfinite(best_h)) {
    rep.status = PWStatus::Infeasible;
    return rep;
  }
  rep.objective = best_h;
  rep.t_star.probs = best_t;
  rep.theta.weights = best_inner.best_theta;
  rep.pairwise_viol = pairwise_violation(rep.theta.as_real(), gi);
  rep.status = rep.pairwise_viol <= cfg.epsilon + 1e-6 ? PWStatus::Converged
                                                       : PWStatus::Flagged;
  if (rep.status == PWStatus::Flagged) {
    std::ostringstream os;
    os << "pairwise violation " << rep.pairwise_viol << " exceeds epsilon "
       << cfg.epsilon;
    log(LogLevel::Info, os.str());
  }
  return rep;
}

}  // namespace fairwasp
