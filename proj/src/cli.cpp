#include "fairwasp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "fairwasp/accpm.hpp"
#include "fairwasp/common.hpp"
#include "fairwasp/cost.hpp"
#include "fairwasp/dataset.hpp"
#include "fairwasp/dual.hpp"
#include "fairwasp/fairness.hpp"
#include "fairwasp/oracle.hpp"
#include "fairwasp/pairwise.hpp"
#include "fairwasp/recover.hpp"

namespace fairwasp {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct DataArgs {
  std::string input;
  std::string d_col;
  std::string y_col;
  bool include_d = false;
  bool no_standardize = false;

  void attach(CLI::App* cmd, bool with_standardize = true) {
    cmd->add_option("--input", input, "input CSV file")->required();
    cmd->add_option("--d-col", d_col, "protected attribute column")->required();
    cmd->add_option("--y-col", y_col, "outcome label column")->required();
    cmd->add_flag("--include-d-in-features", include_d,
                  "also use the protected column as a feature");
    if (with_standardize) {
      cmd->add_flag("--no-standardize", no_standardize,
                    "skip per-feature standard deviation scaling");
    }
  }

  Dataset load(bool standardized) const {
    Dataset ds = load_csv(input, d_col, y_col, include_d);
    if (standardized && !no_standardize) return standardize(ds);
    return ds;
  }
};

json json_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// Conditionals and violations for a weighting; violation is null when some
// class carries zero weight.
json fairness_summary(const Eigen::VectorXd& theta, const Dataset& ds,
                      const GroupIndex& gi, const MarginalY& t, double epsilon) {
  json out;
  Eigen::MatrixXd dy = Eigen::MatrixXd::Zero(gi.num_d, gi.num_y);
  Eigen::VectorXd dsum = Eigen::VectorXd::Zero(gi.num_d);
  for (int l = 0; l < gi.size(); ++l) {
    double s = 0.0;
    for (int i : gi.groups[l]) s += theta[i];
    dy(gi.group_d[l], gi.group_y[l]) += s;
    dsum[gi.group_d[l]] += s;
  }
  json conds = json::array();
  for (int d = 0; d < gi.num_d; ++d) {
    for (int y = 0; y < gi.num_y; ++y) {
      json c;
      c["d"] = ds.d_values[d];
      c["y"] = ds.y_values[y];
      c["weight"] = dy(d, y);
      c["p"] = dsum[d] > 0.0 ? json(dy(d, y) / dsum[d]) : json(nullptr);
      conds.push_back(c);
    }
  }
  out["conditionals"] = conds;
  try {
    out["violation"] = fairness_violation(theta, gi, t, epsilon);
  } catch (const EvalError&) {
    out["violation"] = nullptr;
  }
  out["pairwise_violation"] = json_or_null(pairwise_violation(theta, gi));
  return out;
}

json margins_json(const ConstraintMatrix& cm, const GroupIndex& gi,
                  const Dataset& ds, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd m = constraint_margins(cm, gi, theta);
  json rows = json::array();
  for (int j = 0; j < cm.rows(); ++j) {
    json r;
    r["d"] = ds.d_values[cm.row_meta[j].d];
    r["y"] = ds.y_values[cm.row_meta[j].y];
    r["side"] = cm.row_meta[j].side == ConstraintSide::Upper ? "upper" : "lower";
    r["margin"] = m[j];
    rows.push_back(r);
  }
  return rows;
}

std::string status_string(const SolverReport& rep) {
  if (rep.status == SolveStatus::Converged && rep.tie_count > 0) {
    return "converged-with-ties";
  }
  return to_string(rep.status);
}

int status_exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return 0;
    case SolveStatus::Infeasible: return 2;
    case SolveStatus::NumericalFailure: return 3;
    case SolveStatus::IterationLimit: return 4;
  }
  return 1;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << body;
}

struct SolveArgs {
  DataArgs data;
  double epsilon = 0.05;
  double gap_tol = 1e-3;
  int max_iters = 500;
  double lambda_max = 1e4;
  int threads = 0;
  std::string out = "weights.csv";
  std::string cost_cache;
};

int cmd_solve(const SolveArgs& a) {
  const auto t_total = Clock::now();
  const Dataset raw = a.data.load(false);
  const std::uint64_t hash = dataset_hash(raw);
  const Dataset ds = a.data.no_standardize ? raw : standardize(raw);
  const GroupIndex gi = group_index(ds);
  const MarginalY py = marginal_y(ds);
  const int threads = a.threads > 0 ? a.threads : default_thread_count();

  const auto t_compress = Clock::now();
  CompressedCost cc;
  bool cache_hit = false;
  if (!a.cost_cache.empty()) {
    if (auto cached = load_cost_cache(a.cost_cache, hash)) {
      cc = std::move(*cached);
      cache_hit = true;
    }
  }
  if (!cache_hit) {
    CompressOptions copts;
    copts.threads = threads;
    cc = compress(ds, gi, copts);
    if (!a.cost_cache.empty()) save_cost_cache(cc, hash, a.cost_cache);
  }
  const double compress_s = seconds_since(t_compress);

  const ConstraintMatrix cm = build_constraints(gi, py, a.epsilon, true);

  SolverConfig cfg;
  cfg.gap_tol = a.gap_tol;
  cfg.max_iters = a.max_iters;
  cfg.lambda_max = a.lambda_max;
  cfg.threads = threads;
  const auto t_solve = Clock::now();
  const SolverReport rep = solve(cc, cm, cfg);
  const double solve_s = seconds_since(t_solve);

  const auto t_recover = Clock::now();
  json manifest;
  manifest["input"] = {{"path", a.data.input},
                       {"hash", hash},
                       {"n", ds.n()},
                       {"p", ds.p()},
                       {"num_d", ds.num_d},
                       {"num_y", ds.num_y}};
  manifest["config"] = {{"mode", "marginal"},
                        {"epsilon", a.epsilon},
                        {"gap_tol", a.gap_tol},
                        {"max_iters", a.max_iters},
                        {"lambda_max", a.lambda_max},
                        {"standardize", !a.data.no_standardize},
                        {"include_d_in_features", a.data.include_d},
                        {"dedup_binary_y", true},
                        {"threads", threads}};
  manifest["solver"] = {{"status", status_string(rep)},
                        {"iterations", rep.iterations},
                        {"best_dual", json_or_null(rep.best_dual)},
                        {"best_primal", json_or_null(rep.best_primal)},
                        {"rel_gap", json_or_null(rep.rel_gap)},
                        {"tie_count", rep.tie_count},
                        {"restarts", rep.restarts},
                        {"box_radius", rep.box_radius}};
  const Eigen::VectorXd uniform = Eigen::VectorXd::Ones(ds.n());
  manifest["fairness"] = {{"epsilon", a.epsilon},
                          {"before", fairness_summary(uniform, ds, gi, py, a.epsilon)}};

  if (rep.has_primal) {
    WeightVector theta{rep.best_theta};
    write_weights_csv(theta, a.out);
    manifest["fairness"]["after"] =
        fairness_summary(theta.as_real(), ds, gi, py, a.epsilon);
    manifest["weights"] = {{"path", a.out},
                           {"sum", theta.sum()},
                           {"nonzero", (theta.weights.array() != 0).count()}};
  } else {
    manifest["fairness"]["after"] = nullptr;
    manifest["weights"] = nullptr;
  }
  const double recover_s = seconds_since(t_recover);
  manifest["timings"] = {{"compress_s", compress_s},
                         {"solve_s", solve_s},
                         {"recover_s", recover_s},
                         {"total_s", seconds_since(t_total)},
                         {"cost_cache_hit", cache_hit}};
  write_text_file(a.out + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << "status: " << status_string(rep) << "\n"
            << "iterations: " << rep.iterations << "\n"
            << "objective: " << (rep.has_primal ? std::to_string(rep.best_primal) : "n/a")
            << "\nrel_gap: " << rep.rel_gap << "\n";
  return status_exit_code(rep.status);
}

struct PWArgs {
  DataArgs data;
  double epsilon = 0.05;
  double gap_tol = 1e-3;
  int max_iters = 500;
  int nm_max_evals = 200;
  int restarts = 2;
  int threads = 0;
  std::string out = "weights.csv";
};

int cmd_solve_pw(const PWArgs& a) {
  const Dataset raw = a.data.load(false);
  const std::uint64_t hash = dataset_hash(raw);
  const Dataset ds = a.data.no_standardize ? raw : standardize(raw);
  const GroupIndex gi = group_index(ds);
  const MarginalY py = marginal_y(ds);

  PWConfig cfg = PWConfig::for_epsilon(a.epsilon);
  cfg.nm_max_evals = a.nm_max_evals;
  cfg.restarts = a.restarts;
  cfg.inner.gap_tol = a.gap_tol;
  cfg.inner.max_iters = a.max_iters;
  cfg.inner.threads = a.threads > 0 ? a.threads : default_thread_count();

  const auto t_solve = Clock::now();
  const PWReport rep = solve_pw(ds, cfg);
  const double solve_s = seconds_since(t_solve);

  json manifest;
  manifest["input"] = {{"path", a.data.input},
                       {"hash", hash},
                       {"n", ds.n()},
                       {"p", ds.p()},
                       {"num_d", ds.num_d},
                       {"num_y", ds.num_y}};
  manifest["config"] = {{"mode", "pairwise"},
                        {"epsilon", a.epsilon},
                        {"epsilon_bar", cfg.epsilon_bar},
                        {"nm_max_evals", a.nm_max_evals},
                        {"restarts", a.restarts},
                        {"gap_tol", a.gap_tol},
                        {"max_iters", a.max_iters},
                        {"standardize", !a.data.no_standardize},
                        {"include_d_in_features", a.data.include_d},
                        {"threads", cfg.inner.threads}};

  std::string status = rep.status == PWStatus::Converged
                           ? "converged"
                           : (rep.status == PWStatus::Flagged ? "flagged" : "infeasible");
  manifest["solver"] = {{"status", status},
                        {"evaluations", rep.evaluations},
                        {"inner_iterations", rep.inner_iterations},
                        {"objective", json_or_null(rep.objective)},
                        {"pairwise_violation", json_or_null(rep.pairwise_viol)}};
  if (rep.status != PWStatus::Infeasible) {
    manifest["solver"]["t_star"] = std::vector<double>(
        rep.t_star.probs.data(), rep.t_star.probs.data() + rep.t_star.probs.size());
    write_weights_csv(rep.theta, a.out);
    manifest["fairness"] = {
        {"epsilon", a.epsilon},
        {"before", fairness_summary(Eigen::VectorXd::Ones(ds.n()), ds, gi, py, a.epsilon)},
        {"after", fairness_summary(rep.theta.as_real(), ds, gi, py, a.epsilon)}};
    manifest["weights"] = {{"path", a.out}, {"sum", rep.theta.sum()}};
  } else {
    manifest["weights"] = nullptr;
  }
  manifest["timings"] = {{"solve_s", solve_s}};
  write_text_file(a.out + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << "status: " << status << "\n"
            << "evaluations: " << rep.evaluations << "\n";
  if (rep.status != PWStatus::Infeasible) {
    std::cout << "objective: " << rep.objective
              << "\npairwise_violation: " << rep.pairwise_viol << "\n";
  }
  if (rep.status == PWStatus::Converged) return 0;
  return rep.status == PWStatus::Infeasible ? 2 : 3;
}

struct VerifyArgs {
  DataArgs data;
  std::string weights = "uniform";
  double epsilon = 0.05;
  bool as_json = false;
};

int cmd_verify(const VerifyArgs& a) {
  const Dataset ds = a.data.load(true);
  const GroupIndex gi = group_index(ds);
  const MarginalY py = marginal_y(ds);

  Eigen::VectorXd theta;
  if (a.weights == "uniform") {
    theta = Eigen::VectorXd::Ones(ds.n());
  } else {
    theta = read_weights_csv(a.weights, ds.n()).as_real();
  }
  const ConstraintMatrix cm = build_constraints(gi, py, a.epsilon, true);

  json report;
  report["epsilon"] = a.epsilon;
  report["marginal"] = std::vector<double>(py.probs.data(), py.probs.data() + py.probs.size());
  report["y_values"] = ds.y_values;
  report["weights_sum"] = theta.sum();
  report.update(fairness_summary(theta, ds, gi, py, a.epsilon));
  report["constraint_margins"] = margins_json(cm, gi, ds, theta);

  if (a.as_json) {
    std::cout << report.dump(2) << "\n";
    return 0;
  }
  std::cout << "epsilon: " << a.epsilon << "\nmarginal p_Y:";
  for (int y = 0; y < py.probs.size(); ++y) {
    std::cout << ' ' << ds.y_values[y] << '=' << py.probs[y];
  }
  std::cout << "\nconditionals p(y|d):\n";
  for (const auto& c : report["conditionals"]) {
    std::cout << "  d=" << c["d"].get<std::string>() << " y=" << c["y"].get<std::string>()
              << " weight=" << c["weight"].get<double>() << " p=";
    if (c["p"].is_null()) std::cout << "undefined";
    else std::cout << c["p"].get<double>();
    std::cout << "\n";
  }
  std::cout << "violation: ";
  if (report["violation"].is_null()) std::cout << "undefined (a class has zero weight)";
  else std::cout << report["violation"].get<double>();
  std::cout << "\npairwise_violation: ";
  if (report["pairwise_violation"].is_null()) std::cout << "inf";
  else std::cout << report["pairwise_violation"].get<double>();
  std::cout << "\nconstraint margins (>= 0 means satisfied):\n";
  for (const auto& r : report["constraint_margins"]) {
    std::cout << "  d=" << r["d"].get<std::string>() << " y=" << r["y"].get<std::string>()
              << " " << r["side"].get<std::string>() << ": " << r["margin"].get<double>()
              << "\n";
  }
  return 0;
}

struct MaterializeArgs {
  DataArgs data;
  std::string weights;
  std::string out;
};

int cmd_materialize(const MaterializeArgs& a) {
  const Dataset ds = a.data.load(false);  // raw values, original schema
  const WeightVector theta = read_weights_csv(a.weights, ds.n());
  if (theta.sum() != ds.n()) {
    throw DataError("weights sum to " + std::to_string(theta.sum()) + ", expected " +
                    std::to_string(ds.n()));
  }
  write_csv(materialize(ds, theta), a.out);
  std::cout << "wrote " << ds.n() << " rows to " << a.out << "\n";
  return 0;
}

struct SynthArgs {
  int n = 2000;
  std::uint64_t seed = 1;
  std::string out = "synth.csv";
};

int cmd_synth(const SynthArgs& a) {
  write_csv(generate_synthetic(a.n, a.seed), a.out);
  std::cout << "wrote " << a.n << " rows to " << a.out << "\n";
  return 0;
}

struct BenchArgs {
  int n_start = 100;
  int n_end = 6400;
  int trials = 5;
  std::uint64_t seed = 1;
  double epsilon = 0.05;
  double gap_tol = 1e-3;
  int max_iters = 500;
  int threads = 0;
  std::string out = "bench.csv";
};

int cmd_bench(const BenchArgs& a) {
  if (a.n_start > a.n_end) throw ConfigError("bench: n-start must be <= n-end");
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + a.out);
  out << "n,trial,compress_s,solve_s,rel_gap,violation\n";

  const int threads = a.threads > 0 ? a.threads : default_thread_count();
  bool all_converged = true;
  for (int n = a.n_start; n <= a.n_end; n *= 2) {
    for (int trial = 0; trial < a.trials; ++trial) {
      const std::uint64_t run_seed =
          a.seed + 1000003ULL * static_cast<std::uint64_t>(trial) +
          static_cast<std::uint64_t>(n);
      const Dataset ds = standardize(generate_synthetic(n, run_seed));
      const GroupIndex gi = group_index(ds);
      const MarginalY py = marginal_y(ds);

      const auto t_compress = Clock::now();
      CompressOptions copts;
      copts.threads = threads;
      const CompressedCost cc = compress(ds, gi, copts);
      const double compress_s = seconds_since(t_compress);

      const ConstraintMatrix cm = build_constraints(gi, py, a.epsilon, true);
      SolverConfig cfg;
      cfg.gap_tol = a.gap_tol;
      cfg.max_iters = a.max_iters;
      cfg.threads = threads;
      const auto t_solve = Clock::now();
      const SolverReport rep = solve(cc, cm, cfg);
      const double solve_s = seconds_since(t_solve);

      double violation = std::numeric_limits<double>::quiet_NaN();
      if (rep.has_primal) {
        try {
          violation = fairness_violation(rep.best_theta.cast<double>(), gi, py, a.epsilon);
        } catch (const EvalError&) {
        }
      }
      if (rep.status != SolveStatus::Converged) all_converged = false;

      std::ostringstream row;
      row << n << ',' << trial << ',' << compress_s << ',' << solve_s << ','
          << rep.rel_gap << ',' << violation;
      out << row.str() << '\n';
      out.flush();
      log(LogLevel::Info, "bench " + row.str() + " status=" + to_string(rep.status) +
                              " iters=" + std::to_string(rep.iterations));
    }
  }
  std::cout << "wrote " << a.out << (all_converged ? "" : " (some runs did not converge)")
            << "\n";
  return all_converged ? 0 : 4;
}

struct OracleArgs {
  DataArgs data;
  std::string mode = "mip";
  double epsilon = 0.05;
  std::string t_csv;
  std::string weights;
};

int cmd_oracle(const OracleArgs& a) {
  const Dataset ds = a.data.load(true);
  const GroupIndex gi = group_index(ds);
  json out;
  if (a.mode == "transport") {
    const WeightVector theta = read_weights_csv(a.weights, ds.n());
    out["objective"] = oracle::transport_cost(ds, theta);
  } else {
    MarginalY t = marginal_y(ds);
    if (!a.t_csv.empty()) {
      std::stringstream ss(a.t_csv);
      std::string cell;
      std::vector<double> vals;
      while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
      if (static_cast<int>(vals.size()) != ds.num_y) {
        throw ConfigError("--t needs " + std::to_string(ds.num_y) + " entries");
      }
      t.probs = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
    }
    const oracle::OracleResult res = a.mode == "pairwise"
                                         ? oracle::brute_pairwise_mip(ds, a.epsilon)
                                         : oracle::brute_mip(ds, t, a.epsilon);
    out["feasible_count"] = res.feasible_count;
    out["objective"] = json_or_null(res.objective);
    if (res.theta) {
      out["theta"] = std::vector<int>(res.theta->weights.data(),
                                      res.theta->weights.data() + res.theta->n());
    } else {
      out["theta"] = nullptr;
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"integer dataset reweighting under demographic-parity constraints"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "solve the marginal-target problem");
  sa.data.attach(solve_cmd);
  solve_cmd->add_option("--epsilon", sa.epsilon, "fairness tolerance");
  solve_cmd->add_option("--gap-tol", sa.gap_tol, "relative duality gap target");
  solve_cmd->add_option("--max-iters", sa.max_iters, "cutting-plane iteration cap");
  solve_cmd->add_option("--lambda-max", sa.lambda_max, "initial box scale");
  solve_cmd->add_option("--threads", sa.threads, "internal parallelism cap");
  solve_cmd->add_option("--out", sa.out, "weights CSV path");
  solve_cmd->add_option("--cost-cache", sa.cost_cache, "binary cost cache path");

  PWArgs pa;
  auto* pw_cmd = app.add_subcommand("solve-pw", "solve the pairwise-parity problem");
  pa.data.attach(pw_cmd);
  pw_cmd->add_option("--epsilon", pa.epsilon, "pairwise fairness tolerance");
  pw_cmd->add_option("--gap-tol", pa.gap_tol, "inner duality gap target");
  pw_cmd->add_option("--max-iters", pa.max_iters, "inner iteration cap");
  pw_cmd->add_option("--nm-max-evals", pa.nm_max_evals, "evaluations per search run");
  pw_cmd->add_option("--restarts", pa.restarts, "perturbed restarts");
  pw_cmd->add_option("--threads", pa.threads, "internal parallelism cap");
  pw_cmd->add_option("--out", pa.out, "weights CSV path");

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "report fairness metrics for weights");
  va.data.attach(verify_cmd);
  verify_cmd->add_option("--weights", va.weights, "weights CSV path, or 'uniform'");
  verify_cmd->add_option("--epsilon", va.epsilon, "fairness tolerance");
  verify_cmd->add_flag("--json", va.as_json, "print JSON instead of text");

  MaterializeArgs ma;
  auto* mat_cmd = app.add_subcommand("materialize", "emit the reweighted dataset");
  ma.data.attach(mat_cmd, false);
  mat_cmd->add_option("--weights", ma.weights, "weights CSV path")->required();
  mat_cmd->add_option("--out", ma.out, "output CSV path")->required();

  SynthArgs ya;
  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic benchmark dataset");
  synth_cmd->add_option("--n", ya.n, "sample count");
  synth_cmd->add_option("--seed", ya.seed, "RNG seed");
  synth_cmd->add_option("--out", ya.out, "output CSV path");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "scaling study on synthetic data");
  bench_cmd->add_option("--n-start", ba.n_start, "first size (doubles upward)");
  bench_cmd->add_option("--n-end", ba.n_end, "last size");
  bench_cmd->add_option("--trials", ba.trials, "trials per size");
  bench_cmd->add_option("--seed", ba.seed, "base RNG seed");
  bench_cmd->add_option("--epsilon", ba.epsilon, "fairness tolerance");
  bench_cmd->add_option("--gap-tol", ba.gap_tol, "relative duality gap target");
  bench_cmd->add_option("--max-iters", ba.max_iters, "cutting-plane iteration cap");
  bench_cmd->add_option("--threads", ba.threads, "internal parallelism cap");
  bench_cmd->add_option("--out", ba.out, "benchmark CSV path");

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force reference solvers");
  oracle_cmd->group("");  // debugging tool, hidden from help
  oa.data.attach(oracle_cmd);
  oracle_cmd->add_option("--mode", oa.mode, "mip | pairwise | transport");
  oracle_cmd->add_option("--epsilon", oa.epsilon, "fairness tolerance");
  oracle_cmd->add_option("--t", oa.t_csv, "target marginal, comma separated");
  oracle_cmd->add_option("--weights", oa.weights, "weights CSV (transport mode)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(sa);
    if (pw_cmd->parsed()) return cmd_solve_pw(pa);
    if (verify_cmd->parsed()) return cmd_verify(va);
    if (mat_cmd->parsed()) return cmd_materialize(ma);
    if (synth_cmd->parsed()) return cmd_synth(ya);
    if (bench_cmd->parsed()) return cmd_bench(ba);
    if (oracle_cmd->parsed()) return cmd_oracle(oa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace fairwasp
