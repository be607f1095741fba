#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

#include "fairwasp/dataset.hpp"

namespace fairwasp {

enum class CostMetric { Euclidean, SqEuclidean, L1 };

// Row-by-group minima of the pairwise transport cost matrix. The full n x n
// matrix is never stored: entry (i, l) is min_{k in G_l} c(z_i, z_k) together
// with the column index attaining it (smallest index on ties).
struct CompressedCost {
  Eigen::MatrixXd row_group_min;     // n x L
  Eigen::MatrixXi row_group_argmin;  // n x L, entry in the corresponding group
  int n = 0;
  int L = 0;
  double max_cost = 0.0;  // largest pairwise cost seen; bounds any transport move
};

struct CompressOptions {
  CostMetric metric = CostMetric::Euclidean;
  int threads = 1;
};

// Transport cost between two rows of an (already standardized) dataset.
double pair_cost(const Dataset& ds, int i, int j,
                 CostMetric metric = CostMetric::Euclidean);

// Streams cost rows one at a time and reduces them to per-group minima:
// O(n^2) work, O(n L) extra memory. Rows are independent, so disjoint row
// ranges may be processed concurrently with identical results.
CompressedCost compress(const Dataset& ds, const GroupIndex& gi,
                        const CompressOptions& opts = CompressOptions{});

// Binary cache keyed by the dataset content hash. Little-endian: magic,
// version, hash, n, L, then row_group_min as f64 row-major, then argmin as
// u32 row-major.
void save_cost_cache(const CompressedCost& cc, std::uint64_t hash,
                     const std::string& path);
std::optional<CompressedCost> load_cost_cache(const std::string& path,
                                              std::uint64_t hash);

}  // namespace fairwasp
