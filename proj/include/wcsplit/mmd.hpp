#pragma once

#include <cstddef>

#include "wcsplit/core_model.hpp"
#include "wcsplit/kernels.hpp"
#include "wcsplit/types.hpp"

namespace wcsplit {

struct MmdEstimate {
  double mmd_squared = 0.0;  // raw value, may be slightly negative from rounding
  double mmd = 0.0;          // sqrt(max(mmd_squared, 0))
  std::size_t n_t = 0;
  std::size_t n_v = 0;
  KernelConfig kernel;
  bool approximate = false;
};

// Biased (V-statistic) estimate of the squared distance between the kernel
// mean embeddings of the two sets. Exactly symmetric in its arguments.
MmdEstimate mmd_squared(const KernelConfig& cfg, const FeatureMatrix& set_t,
                        const FeatureMatrix& set_v);

// Sum of squared RKHS distances of the rows of `set` to their mean embedding.
double ssq(const KernelConfig& cfg, const FeatureMatrix& set);

// Relative residual of MMD^2(T, V) = |S| / (|T||V|) * (ssq(S) - ssq(T) - ssq(V)),
// with the two sides computed independently.
double verify_identity(const KernelConfig& cfg, const Dataset& dataset,
                       const SplitAssignment& assignment);

// MMD between the train and validation rows of a split.
MmdEstimate split_mmd(const KernelConfig& cfg, const Dataset& dataset,
                      const SplitAssignment& assignment);
MmdEstimate split_mmd(const KernelSource& source, const SplitAssignment& assignment);

FeatureMatrix select_rows(const FeatureMatrix& features, std::span<const std::size_t> rows);

}  // namespace wcsplit
