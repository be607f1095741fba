#include "fairwasp/cost.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>
#include <vector>

#include "fairwasp/common.hpp"

namespace fairwasp {

namespace {

// Monotone surrogate for the group-min scan: squared distance for the
// Euclidean metrics, plain sum for L1. Shared by pair_cost and compress so
// stored minima equal recomputed single costs bit for bit.
inline double raw_cost(const Eigen::MatrixXd& x, int i, int j, CostMetric metric) {
  switch (metric) {
    case CostMetric::L1:
      return (x.row(i) - x.row(j)).cwiseAbs().sum();
    default:
      return (x.row(i) - x.row(j)).squaredNorm();
  }
}

inline double finish_cost(double raw, CostMetric metric) {
  return metric == CostMetric::Euclidean ? std::sqrt(raw) : raw;
}

}  // namespace

double pair_cost(const Dataset& ds, int i, int j, CostMetric metric) {
  if (i < 0 || j < 0 || i >= ds.n() || j >= ds.n()) {
    throw std::out_of_range("pair_cost: row index out of range");
  }
  return finish_cost(raw_cost(ds.features, i, j, metric), metric);
}

CompressedCost compress(const Dataset& ds, const GroupIndex& gi,
                        const CompressOptions& opts) {
  const int n = ds.n();
  const int L = gi.size();
  CompressedCost cc;
  cc.n = n;
  cc.L = L;
  cc.row_group_min.resize(n, L);
  cc.row_group_argmin.resize(n, L);

  const Eigen::MatrixXd& x = ds.features;
  const Eigen::VectorXi& group_of = gi.group_of;

  auto process_rows = [&](int begin, int end, double& max_raw_out) {
    std::vector<double> best(L);
    std::vector<int> best_at(L);
    double max_raw = 0.0;
    for (int i = begin; i < end; ++i) {
      for (int l = 0; l < L; ++l) {
        best[l] = std::numeric_limits<double>::infinity();
        best_at[l] = -1;
      }
      // one streamed cost row; ties keep the smallest column index
      for (int j = 0; j < n; ++j) {
        const double c = raw_cost(x, i, j, opts.metric);
        if (c > max_raw) max_raw = c;
        const int l = group_of[j];
        if (c < best[l]) {
          best[l] = c;
          best_at[l] = j;
        }
      }
      for (int l = 0; l < L; ++l) {
        cc.row_group_min(i, l) = finish_cost(best[l], opts.metric);
        cc.row_group_argmin(i, l) = best_at[l];
      }
    }
    max_raw_out = max_raw;
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1 || n < 256) {
    double max_raw = 0.0;
    process_rows(0, n, max_raw);
    cc.max_cost = finish_cost(max_raw, opts.metric);
  } else {
    std::vector<std::thread> pool;
    std::vector<double> max_raws(threads, 0.0);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(process_rows, begin, end, std::ref(max_raws[t]));
    }
    for (auto& th : pool) th.join();
    double max_raw = 0.0;
    for (double v : max_raws) max_raw = std::max(max_raw, v);
    cc.max_cost = finish_cost(max_raw, opts.metric);
  }
  return cc;
}

namespace {

constexpr std::uint32_t kCacheMagic = 0x46574343;  // "FWCC"
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
bool get(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return static_cast<bool>(in);
}

}  // namespace

void save_cost_cache(const CompressedCost& cc, std::uint64_t hash,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open cost cache for writing: " + path);
  put(out, kCacheMagic);
  put(out, kCacheVersion);
  put(out, hash);
  put(out, static_cast<std::uint64_t>(cc.n));
  put(out, static_cast<std::uint64_t>(cc.L));
  put(out, cc.max_cost);
  for (int i = 0; i < cc.n; ++i)
    for (int l = 0; l < cc.L; ++l) put(out, cc.row_group_min(i, l));
  for (int i = 0; i < cc.n; ++i)
    for (int l = 0; l < cc.L; ++l)
      put(out, static_cast<std::uint32_t>(cc.row_group_argmin(i, l)));
}

std::optional<CompressedCost> load_cost_cache(const std::string& path,
                                              std::uint64_t hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::uint32_t magic = 0, version = 0;
  std::uint64_t file_hash = 0, n64 = 0, l64 = 0;
  double max_cost = 0.0;
  if (!get(in, magic) || magic != kCacheMagic) return std::nullopt;
  if (!get(in, version) || version != kCacheVersion) return std::nullopt;
  if (!get(in, file_hash) || file_hash != hash) return std::nullopt;
  if (!get(in, n64) || !get(in, l64) || !get(in, max_cost)) return std::nullopt;

  CompressedCost cc;
  cc.n = static_cast<int>(n64);
  cc.L = static_cast<int>(l64);
  cc.max_cost = max_cost;
  cc.row_group_min.resize(cc.n, cc.L);
  cc.row_group_argmin.resize(cc.n, cc.L);
  for (int i = 0; i < cc.n; ++i)
    for (int l = 0; l < cc.L; ++l) {
      double v;
      if (!get(in, v)) return std::nullopt;
      cc.row_group_min(i, l) = v;
    }
  for (int i = 0; i < cc.n; ++i)
    for (int l = 0; l < cc.L; ++l) {
      std::uint32_t v;
      if (!get(in, v)) return std::nullopt;
      cc.row_group_argmin(i, l) = static_cast<int>(v);
    }
  return cc;
}

}  // namespace fairwasp
