#include "fairwasp/dual.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fairwasp {

namespace {

struct Partial {
  double value = 0.0;
  double primal = 0.0;
  Eigen::VectorXd group_hits;  // L: rows assigned to each group
  int ties = 0;
};

}  // namespace

DualEvaluation evaluate(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                        const CompressedCost& cc, const ConstraintMatrix& cm,
                        int threads) {
  const int n = cc.n;
  const int L = cc.L;
  const int m = cm.rows();
  if (lambda.size() != m) {
    throw std::invalid_argument("evaluate: lambda has " + std::to_string(lambda.size()) +
                                " entries, constraint matrix has " + std::to_string(m) +
                                " rows");
  }
  if (cm.num_groups() != L) {
    throw std::invalid_argument("evaluate: constraint matrix has " +
                                std::to_string(cm.num_groups()) + " groups, cost has " +
                                std::to_string(L));
  }
  if (!lambda.allFinite()) {
    throw std::invalid_argument("evaluate: lambda must be finite");
  }

  // v_l = sum_j lambda_j coeff[j][l]: m*L work once, then an n*L scan.
  const Eigen::VectorXd v = cm.coeff.transpose() * lambda;

  DualEvaluation ev;
  ev.chosen_group.resize(n);
  ev.column_counts = Eigen::VectorXi::Zero(n);

  auto scan_rows = [&](int begin, int end, Partial& out) {
    out.group_hits = Eigen::VectorXd::Zero(L);
    for (int i = begin; i < end; ++i) {
      int best_l = 0;
      double best = v[0] - cc.row_group_min(i, 0);
      bool tied = false;
      for (int l = 1; l < L; ++l) {
        const double s = v[l] - cc.row_group_min(i, l);
        if (s > best) {
          best = s;
          best_l = l;
          tied = false;
        } else if (s == best) {
          tied = true;  // smallest group index stays chosen
        }
      }
      ev.chosen_group[i] = best_l;
      out.value += best;
      out.primal += cc.row_group_min(i, best_l);
      out.group_hits[best_l] += 1.0;
      if (tied) ++out.ties;
    }
  };

  const int k = std::max(1, threads);
  std::vector<Partial> parts(k);
  if (k == 1 || n < 1024) {
    scan_rows(0, n, parts[0]);
    parts.resize(1);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + k - 1) / k;
    for (int t = 0; t < k; ++t) {
      const int begin = t * chunk;
      const int end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(scan_rows, begin, end, std::ref(parts[t]));
    }
    for (auto& th : pool) th.join();
  }

  // merge in thread order: deterministic for a fixed thread count
  Eigen::VectorXd group_hits = Eigen::VectorXd::Zero(L);
  for (const Partial& p : parts) {
    if (p.group_hits.size() == 0) continue;
    ev.value += p.value;
    ev.primal_objective += p.primal;
    ev.tie_count += p.ties;
    group_hits += p.group_hits;
  }

  // subgradient[j] = sum_i coeff[j][chosen_group[i]]
  ev.subgradient = cm.coeff * group_hits;

  for (int i = 0; i < n; ++i) {
    ev.column_counts[cc.row_group_argmin(i, ev.chosen_group[i])] += 1;
  }
  return ev;
}

SeparationCut separation_oracle(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                const CompressedCost& cc,
                                const ConstraintMatrix& cm, int threads) {
  const int m = static_cast<int>(lambda.size());
  for (int j = 0; j < m; ++j) {
    if (lambda[j] < 0.0) {
      SeparationCut cut;
      cut.g = Eigen::VectorXd::Zero(m);
      cut.g[j] = -1.0;  // smallest negative index
      return cut;
    }
  }
  const DualEvaluation ev = evaluate(lambda, cc, cm, threads);
  SeparationCut cut;
  cut.g = ev.subgradient;
  cut.value = ev.value;
  return cut;
}

}  // namespace fairwasp
