#include "wcsplit/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wcsplit/errors.hpp"
#include "wcsplit/parallel.hpp"

namespace wcsplit {
namespace {

void require_rows(const FeatureMatrix& m, const char* what) {
  if (m.rows() < 1) throw Error(ErrorCode::EmptySet, std::string(what) + " is empty");
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has non-finite values");
  }
}

// sum_i sum_j k(a_i, b_j); row sums are accumulated per i and then added in
// index order, so the result does not depend on the worker count.
double block_sum(const KernelConfig& bound, const FeatureMatrix& a, const FeatureMatrix& b) {
  const auto rows = static_cast<std::size_t>(a.rows());
  std::vector<double> partial(rows, 0.0);
  parallel_for(0, rows, [&](std::size_t i) {
    const auto ai = row_span(a, static_cast<Eigen::Index>(i));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < b.rows(); ++j) acc += detail::kernel_eval_bound(bound, ai, row_span(b, j));
    partial[i] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double diag_sum(const KernelConfig& bound, const FeatureMatrix& a) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    total += detail::kernel_eval_bound(bound, row_span(a, i), row_span(a, i));
  }
  return total;
}

// Strict weak order on matrices used to pick a canonical argument order.
bool precedes(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

MmdEstimate finish(double mmd2, std::size_t nt, std::size_t nv, const KernelConfig& kernel,
                   bool approximate) {
  MmdEstimate est;
  est.mmd_squared = mmd2;
  est.mmd = std::sqrt(std::max(mmd2, 0.0));
  est.n_t = nt;
  est.n_v = nv;
  est.kernel = kernel;
  est.approximate = approximate;
  return est;
}

}  // namespace

FeatureMatrix select_rows(const FeatureMatrix& features, std::span<const std::size_t> rows) {
  FeatureMatrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

MmdEstimate mmd_squared(const KernelConfig& cfg, const FeatureMatrix& set_t,
                        const FeatureMatrix& set_v) {
  require_rows(set_t, "first set");
  require_rows(set_v, "second set");
  if (set_t.cols() != set_v.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "sets differ in feature dimension");
  }
  const KernelConfig bound = cfg.bind(static_cast<std::size_t>(set_t.cols()));

  const bool swap = precedes(set_v, set_t);
  const FeatureMatrix& a = swap ? set_v : set_t;
  const FeatureMatrix& b = swap ? set_t : set_v;
  const auto m = static_cast<double>(a.rows());
  const auto p = static_cast<double>(b.rows());
  const double within_a = block_sum(bound, a, a) / (m * m);
  const double within_b = block_sum(bound, b, b) / (p * p);
  const double cross = block_sum(bound, a, b) / (m * p);
  return finish(within_a + within_b - 2.0 * cross, static_cast<std::size_t>(set_t.rows()),
                static_cast<std::size_t>(set_v.rows()), bound, false);
}

double ssq(const KernelConfig& cfg, const FeatureMatrix& set) {
  require_rows(set, "set");
  const KernelConfig bound = cfg.bind(static_cast<std::size_t>(set.cols()));
  const auto m = static_cast<double>(set.rows());
  return diag_sum(bound, set) - block_sum(bound, set, set) / m;
}

double verify_identity(const KernelConfig& cfg, const Dataset& dataset,
                       const SplitAssignment& assignment) {
  if (assignment.size() != dataset.size()) {
    throw Error(ErrorCode::LengthMismatch, "split length differs from dataset size");
  }
  const auto train = assignment.train_indices();
  const auto val = assignment.val_indices();
  const FeatureMatrix t = select_rows(dataset.features(), train);
  const FeatureMatrix v = select_rows(dataset.features(), val);

  const double lhs = mmd_squared(cfg, t, v).mmd_squared;
  const auto n = static_cast<double>(dataset.size());
  const auto nt = static_cast<double>(train.size());
  const auto nv = static_cast<double>(val.size());
  const double rhs =
      n / (nt * nv) * (ssq(cfg, dataset.features()) - ssq(cfg, t) - ssq(cfg, v));
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

MmdEstimate split_mmd(const KernelConfig& cfg, const Dataset& dataset,
                      const SplitAssignment& assignment) {
  if (assignment.size() != dataset.size()) {
    throw Error(ErrorCode::LengthMismatch, "split length differs from dataset size");
  }
  return mmd_squared(cfg, select_rows(dataset.features(), assignment.train_indices()),
                     select_rows(dataset.features(), assignment.val_indices()));
}

MmdEstimate split_mmd(const KernelSource& source, const SplitAssignment& assignment) {
  if (assignment.size() != source.size()) {
    throw Error(ErrorCode::LengthMismatch, "split length differs from kernel source size");
  }
  std::vector<std::size_t> cluster_of(assignment.size());
  for (std::size_t i = 0; i < cluster_of.size(); ++i) cluster_of[i] = assignment.is_val(i) ? 1 : 0;
  const Eigen::MatrixXd sums = source.cluster_sums(cluster_of, 2);
  double tt = 0.0, vv = 0.0, tv = 0.0;
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    if (cluster_of[i] == 0) {
      tt += sums(i, 0);
      tv += sums(i, 1);
    } else {
      vv += sums(i, 1);
    }
  }
  const auto m = static_cast<double>(assignment.train_count());
  const auto p = static_cast<double>(assignment.val_count());
  return finish(tt / (m * m) + vv / (p * p) - 2.0 * tv / (m * p),
                static_cast<std::size_t>(m), static_cast<std::size_t>(p), source.kernel(),
                source.approximate());
}

}  // namespace wcsplit
