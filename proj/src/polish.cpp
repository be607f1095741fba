#include "fairwasp/polish.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fairwasp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cheapest single-row move between each ordered pair of groups.
struct ExchangeGraph {
  Eigen::MatrixXd delta;  // L x L move costs, +inf when empty
  Eigen::MatrixXi arg;    // row realizing each move

  void build(const Eigen::VectorXi& assign, const Eigen::MatrixXd& c) {
    const int L = static_cast<int>(c.cols());
    delta = Eigen::MatrixXd::Constant(L, L, kInf);
    arg = Eigen::MatrixXi::Constant(L, L, -1);
    for (int i = 0; i < assign.size(); ++i) {
      const int a = assign[i];
      for (int b = 0; b < L; ++b) {
        if (b == a) continue;
        const double d = c(i, b) - c(i, a);
        if (d < delta(a, b)) {
          delta(a, b) = d;
          arg(a, b) = i;
        }
      }
    }
  }
};

struct State {
  Eigen::VectorXi assign;
  Eigen::VectorXi h;        // group counts
  Eigen::VectorXd margins;  // coeff * h
  const Eigen::MatrixXd* c = nullptr;
  const Eigen::MatrixXd* coeff = nullptr;

  void move_row(int row, int to) {
    const int from = assign[row];
    assign[row] = to;
    h[from] -= 1;
    h[to] += 1;
    margins += coeff->col(to) - coeff->col(from);
  }

  double violation_of(const Eigen::VectorXd& m) const {
    double v = 0.0;
    for (int j = 0; j < m.size(); ++j) v += std::max(0.0, -m[j]);
    return v;
  }
  double violation() const { return violation_of(margins); }
};

// Bellman-Ford negative-cycle detection on the exchange graph; cancelling
// such a cycle lowers cost without changing the counts.
bool cancel_one_cycle(State& st, ExchangeGraph& g) {
  const int L = static_cast<int>(st.h.size());
  std::vector<double> dist(L, 0.0);
  std::vector<int> pred(L, -1);
  // virtual source at distance 0 everywhere: an improvement in pass L+1
  // certifies a negative cycle
  int touched = -1;
  for (int pass = 0; pass <= L; ++pass) {
    touched = -1;
    for (int a = 0; a < L; ++a) {
      if (st.h[a] <= 0) continue;
      for (int b = 0; b < L; ++b) {
        if (g.delta(a, b) == kInf) continue;
        if (dist[a] + g.delta(a, b) < dist[b] - 1e-12) {
          dist[b] = dist[a] + g.delta(a, b);
          pred[b] = a;
          touched = b;
        }
      }
    }
    if (touched == -1) return false;
  }
  int x = touched;
  for (int i = 0; i < L && x != -1; ++i) x = pred[x];
  if (x == -1) return false;
  std::vector<int> cycle;
  for (int v = x;; v = pred[v]) {
    if (v == -1 || static_cast<int>(cycle.size()) > L + 1) return false;
    cycle.push_back(v);
    if (v == x && cycle.size() > 1) break;
  }
  std::reverse(cycle.begin(), cycle.end());
  // each edge moves its own cheapest row; sources are distinct along a cycle
  std::vector<std::pair<int, int>> moves;
  for (size_t k = 0; k + 1 < cycle.size(); ++k) {
    const int a = cycle[k], b = cycle[k + 1];
    if (g.arg(a, b) < 0) return false;
    moves.emplace_back(g.arg(a, b), b);
  }
  for (auto [row, to] : moves) st.move_row(row, to);
  g.build(st.assign, *st.c);
  return true;
}

void cancel_cycles(State& st, ExchangeGraph& g, int& moves, int cap) {
  while (moves < cap && cancel_one_cycle(st, g)) ++moves;
}

struct Paths {
  Eigen::MatrixXd dist;
  Eigen::MatrixXi next;

  void floyd(const ExchangeGraph& g, const Eigen::VectorXi& h) {
    const int L = static_cast<int>(h.size());
    dist = Eigen::MatrixXd::Constant(L, L, kInf);
    next = Eigen::MatrixXi::Constant(L, L, -1);
    for (int a = 0; a < L; ++a) {
      dist(a, a) = 0.0;
      for (int b = 0; b < L; ++b) {
        if (a == b || h[a] <= 0 || g.delta(a, b) == kInf) continue;
        dist(a, b) = g.delta(a, b);
        next(a, b) = b;
      }
    }
    // empty groups have no outgoing edges, so every interior hop is backed by
    // a real row
    for (int k = 0; k < L; ++k) {
      for (int a = 0; a < L; ++a) {
        for (int b = 0; b < L; ++b) {
          if (dist(a, k) + dist(k, b) < dist(a, b) - 1e-15) {
            dist(a, b) = dist(a, k) + dist(k, b);
            next(a, b) = next(a, k);
          }
        }
      }
    }
  }
};

// Moves one unit from a to b along the reconstructed shortest path.
bool apply_path(State& st, ExchangeGraph& g, const Paths& p, int a, int b) {
  std::vector<std::pair<int, int>> moves;
  const int L = static_cast<int>(st.h.size());
  int u = a;
  for (int guard = 0; u != b; ++guard) {
    if (guard > L + 1) return false;
    const int v = p.next(u, b);
    if (v < 0 || g.arg(u, v) < 0) return false;
    moves.emplace_back(g.arg(u, v), v);
    u = v;
  }
  for (auto [row, to] : moves) st.move_row(row, to);
  g.build(st.assign, *st.c);
  return true;
}

struct UnitMove {
  int a = -1, b = -1;
  int a2 = -1, b2 = -1;  // optional second move
  bool pair() const { return a2 >= 0; }
  bool valid() const { return a >= 0; }
};

Eigen::VectorXd moved_margins(const State& st, const UnitMove& mv) {
  Eigen::VectorXd m = st.margins + st.coeff->col(mv.b) - st.coeff->col(mv.a);
  if (mv.pair()) m += st.coeff->col(mv.b2) - st.coeff->col(mv.a2);
  return m;
}

bool source_ok(const Eigen::VectorXi& h, const UnitMove& mv) {
  if (h[mv.a] <= 0) return false;
  if (!mv.pair()) return true;
  const int need = mv.a == mv.a2 ? 2 : 1;
  return h[mv.a2] >= need;
}

// Cheapest move (single, then paired when singles stall) that reduces the
// constraint violation. Paired moves matter when zeroing out a whole
// protected class, which takes one move per outcome level.
UnitMove best_repair_move(const State& st, const Paths& p) {
  const int L = static_cast<int>(st.h.size());
  const double v0 = st.violation();
  UnitMove best;
  double best_score = kInf;
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      if (a == b || p.dist(a, b) == kInf) continue;
      UnitMove mv{a, b, -1, -1};
      if (!source_ok(st.h, mv)) continue;
      const double v2 = st.violation_of(moved_margins(st, mv));
      if (v2 >= v0 - 1e-15) continue;
      const double score = p.dist(a, b) / (v0 - v2);
      if (score < best_score) {
        best_score = score;
        best = mv;
      }
    }
  }
  if (best.valid()) return best;
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      if (a == b || p.dist(a, b) == kInf) continue;
      for (int a2 = 0; a2 < L; ++a2) {
        for (int b2 = 0; b2 < L; ++b2) {
          if (a2 == b2 || p.dist(a2, b2) == kInf) continue;
          UnitMove mv{a, b, a2, b2};
          if (!source_ok(st.h, mv)) continue;
          const double v2 = st.violation_of(moved_margins(st, mv));
          if (v2 >= v0 - 1e-15) continue;
          const double score = (p.dist(a, b) + p.dist(a2, b2)) / (v0 - v2);
          if (score < best_score) {
            best_score = score;
            best = mv;
          }
        }
      }
    }
  }
  return best;
}

// Cheapest feasibility-preserving strict improvement, paired fallback again.
UnitMove best_improve_move(const State& st, const Paths& p, double feas_tol) {
  const int L = static_cast<int>(st.h.size());
  UnitMove best;
  double best_gain = -1e-12;
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      if (a == b || p.dist(a, b) >= best_gain) continue;
      UnitMove mv{a, b, -1, -1};
      if (!source_ok(st.h, mv)) continue;
      if (moved_margins(st, mv).minCoeff() < -feas_tol) continue;
      best_gain = p.dist(a, b);
      best = mv;
    }
  }
  if (best.valid()) return best;
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      if (a == b || p.dist(a, b) == kInf) continue;
      for (int a2 = 0; a2 < L; ++a2) {
        for (int b2 = 0; b2 < L; ++b2) {
          if (a2 == b2 || p.dist(a2, b2) == kInf) continue;
          const double gain = p.dist(a, b) + p.dist(a2, b2);
          if (gain >= best_gain) continue;
          UnitMove mv{a, b, a2, b2};
          if (!source_ok(st.h, mv)) continue;
          if (moved_margins(st, mv).minCoeff() < -feas_tol) continue;
          best_gain = gain;
          best = mv;
        }
      }
    }
  }
  return best;
}

bool apply_move(State& st, ExchangeGraph& g, Paths& p, const UnitMove& mv) {
  if (!apply_path(st, g, p, mv.a, mv.b)) return false;
  if (mv.pair()) {
    // re-route the second unit on the refreshed graph
    p.floyd(g, st.h);
    if (p.dist(mv.a2, mv.b2) == kInf) return false;
    if (!apply_path(st, g, p, mv.a2, mv.b2)) return false;
  }
  return true;
}

}  // namespace

PolishResult polish_assignment(Eigen::VectorXi assignment, const CompressedCost& cc,
                               const ConstraintMatrix& cm, int move_cap) {
  const int n = cc.n;
  const int L = cc.L;
  const Eigen::MatrixXd& c = cc.row_group_min;
  const double feas_tol = 1e-9 * n;

  State st;
  st.assign = std::move(assignment);
  st.c = &c;
  st.coeff = &cm.coeff;
  st.h = Eigen::VectorXi::Zero(L);
  for (int i = 0; i < n; ++i) st.h[st.assign[i]] += 1;
  st.margins = cm.coeff * st.h.cast<double>();

  ExchangeGraph g;
  g.build(st.assign, c);

  int moves = 0;
  cancel_cycles(st, g, moves, move_cap);

  Paths paths;
  while (st.violation() > feas_tol && moves < move_cap) {
    paths.floyd(g, st.h);
    const UnitMove mv = best_repair_move(st, paths);
    if (!mv.valid() || !apply_move(st, g, paths, mv)) break;
    ++moves;
    if (moves % 8 == 0) cancel_cycles(st, g, moves, move_cap);
  }

  while (moves < move_cap && st.violation() <= feas_tol) {
    paths.floyd(g, st.h);
    const UnitMove mv = best_improve_move(st, paths, feas_tol);
    if (!mv.valid() || !apply_move(st, g, paths, mv)) break;
    ++moves;
    if (moves % 8 == 0) cancel_cycles(st, g, moves, move_cap);
  }

  PolishResult out;
  out.moves = moves;
  out.feasible = st.margins.minCoeff() >= -feas_tol;
  out.objective = 0.0;
  for (int i = 0; i < n; ++i) out.objective += c(i, st.assign[i]);
  out.theta = Eigen::VectorXi::Zero(n);
  for (int i = 0; i < n; ++i) out.theta[cc.row_group_argmin(i, st.assign[i])] += 1;
  out.assignment = std::move(st.assign);
  return out;
}

}  // namespace fairwasp
