#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wcsplit/cluster.hpp"
#include "wcsplit/core_model.hpp"
#include "wcsplit/kernels.hpp"

namespace wcsplit {

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n_points = 0;
  bool p_approximate = false;  // t-approximation with fewer than 10 points
};

// Spearman rank correlation with tie-averaged ranks. Two-sided p-value from
// t = rho * sqrt((n - 2) / (1 - rho^2)) on n - 2 degrees of freedom.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

// Tie-averaged 1-based ranks.
std::vector<double> average_ranks(std::span<const double> values);

// Equal-size partition of the samples into `clusters` groups by kernel
// k-means: greedy capacity-respecting seeding, then sweeps of pairwise swaps
// against fixed centroids. Sizes differ by at most one.
std::vector<std::size_t> equal_size_labels(const KernelSource& source, std::size_t clusters,
                                           std::uint64_t seed, std::size_t max_sweeps = 25);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> values);

struct ClassCountTrend {
  std::vector<std::size_t> class_counts;
  std::vector<MeanSe> mmd_tv;
  std::vector<MeanSe> mmd_te;  // empty without an evaluation set
  std::vector<MeanSe> mmd_ve;
  MeanSe random_mmd_tv;  // stratified random split on the original labels
  std::size_t repeats = 0;
};

// For each class count c: synthetic equal-size labels from c-way kernel
// k-means, then a cluster split under label-only constraints on those labels.
// Repeats vary the seed.
ClassCountTrend class_count_experiment(const Dataset& dataset,
                                       std::span<const std::size_t> class_counts,
                                       std::size_t repeats, const ClusterRunConfig& cfg,
                                       const std::optional<Dataset>& eval_set = std::nullopt);

}  // namespace wcsplit
