#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wcsplit/assign.hpp"
#include "wcsplit/core_model.hpp"
#include "wcsplit/kernels.hpp"

namespace wcsplit {

struct IterationState {
  std::size_t restart = 0;
  std::size_t iteration = 0;
  double objective = 0.0;
  std::span<const ClusterIndex> membership;
  ClusterIndex val_cluster = ClusterIndex::J1;
};

struct ClusterRunConfig {
  std::size_t max_iters = 100;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  KernelConfig kernel;
  ConstraintSpec constraints;
  // Landmark count for the Nystrom sketch; unset means exact Gram unless the
  // Gram matrix would exceed gram_budget_bytes.
  std::optional<std::size_t> nystrom;
  double nystrom_rank_cutoff = kDefaultRankCutoff;
  std::size_t gram_budget_bytes = kDefaultGramBudgetBytes;
  // Relative Psi decrease below which iteration stops.
  double min_relative_decrease = 1e-12;
  // Optional replacement for the sorting solver (cross-checks only).
  AssignmentSolver solver;
  // Called on every iterate, possibly from several threads at once.
  std::function<void(const IterationState&)> on_iteration;

  void validate() const;
};

struct ClusterResult {
  SplitAssignment assignment;
  SplitReport report;
};

// Feasible random start: each group places val_target uniformly chosen
// members in Val. Deterministic in the seed.
SplitAssignment init_assignment(const Dataset& dataset, const QuotaPlan& plan,
                                std::uint64_t seed);

// Squared RKHS distance of every sample to both cluster centroids.
CostMatrix distance_update(const KernelSource& source, std::span<const ClusterIndex> membership);

// Psi: within-cluster sum of squared RKHS deviations.
double clustering_objective(const KernelSource& source, std::span<const ClusterIndex> membership);

// Builds the kernel source a run would use (exact, or Nystrom when requested
// or when the Gram matrix exceeds the budget).
KernelSource make_kernel_source(const Dataset& dataset, const ClusterRunConfig& cfg,
                                std::vector<std::string>* notes = nullptr);

ClusterResult cluster_split(const Dataset& dataset, const ClusterRunConfig& cfg);
ClusterResult cluster_split(const Dataset& dataset, const ClusterRunConfig& cfg,
                            const KernelSource& source);

}  // namespace wcsplit
