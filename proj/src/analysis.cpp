#include "wcsplit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "wcsplit/errors.hpp"
#include "wcsplit/mmd.hpp"
#include "wcsplit/random.hpp"
#include "wcsplit/splitters.hpp"

namespace wcsplit {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "spearman: inputs differ in length (" +
                                               std::to_string(x.size()) + " vs " +
                                               std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) throw Error(ErrorCode::InvalidArgument, "spearman needs at least 3 points");
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    throw Error(ErrorCode::NonFiniteInput, "spearman: non-finite input");
  }

  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::DegenerateInput, "spearman: constant input, correlation undefined");
  }

  CorrelationResult out;
  out.n_points = x.size();
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.p_approximate = x.size() < 10;
  const double dof = n - 2.0;
  if (std::abs(out.rho) >= 1.0) {
    out.p_value = 0.0;
  } else {
    const double t = out.rho * std::sqrt(dof / (1.0 - out.rho * out.rho));
    const boost::math::students_t dist(dof);
    out.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))),
                             0.0, 1.0);
  }
  return out;
}

std::vector<std::size_t> equal_size_labels(const KernelSource& source, std::size_t clusters,
                                           std::uint64_t seed, std::size_t max_sweeps) {
  const std::size_t n = source.size();
  if (clusters < 1 || clusters > n) {
    throw Error(ErrorCode::InvalidArgument,
                "cluster count must lie in [1, n], got " + std::to_string(clusters));
  }
  std::vector<std::size_t> labels(n, 0);
  if (clusters == 1) return labels;

  std::vector<std::size_t> capacity(clusters, n / clusters);
  for (std::size_t c = 0; c < n % clusters; ++c) ++capacity[c];

  // Greedy seeding: closest (point, seed) pairs first, subject to capacity.
  Rng rng(seed);
  const auto seeds = sample_without_replacement(rng, n, clusters);
  struct Pair {
    double dist;
    std::size_t point;
    std::size_t cluster;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n * clusters);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < clusters; ++c) {
      const std::size_t s = seeds[c];
      pairs.push_back({source.diag(i) - 2.0 * source.entry(i, s) + source.diag(s), i, c});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.point != b.point) return a.point < b.point;
    return a.cluster < b.cluster;
  });
  std::vector<bool> placed(n, false);
  std::vector<std::size_t> filled(clusters, 0);
  for (const auto& p : pairs) {
    if (placed[p.point] || filled[p.cluster] >= capacity[p.cluster]) continue;
    labels[p.point] = p.cluster;
    placed[p.point] = true;
    ++filled[p.cluster];
  }

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::MatrixXd sums = source.cluster_sums(labels, clusters);
    std::vector<double> size(clusters, 0.0), within(clusters, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      size[labels[i]] += 1.0;
      within[labels[i]] += sums(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i]));
    }
    Eigen::MatrixXd dist(n, clusters);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < clusters; ++c) {
        dist(i, c) = source.diag(i) - 2.0 * sums(i, c) / size[c] + within[c] / (size[c] * size[c]);
      }
    }
    // Pairwise swaps keep every cluster size fixed.
    bool swapped = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t a = labels[i];
        const std::size_t b = labels[j];
        if (a == b) continue;
        const double gain = dist(i, a) + dist(j, b) - dist(i, b) - dist(j, a);
        if (gain > 1e-12 * (std::abs(dist(i, a)) + std::abs(dist(j, b)) + 1.0)) {
          labels[i] = b;
          labels[j] = a;
          swapped = true;
        }
      }
    }
    if (!swapped) break;
  }
  return labels;
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  const auto k = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  }
  return out;
}

ClassCountTrend class_count_experiment(const Dataset& dataset,
                                       std::span<const std::size_t> class_counts,
                                       std::size_t repeats, const ClusterRunConfig& cfg,
                                       const std::optional<Dataset>& eval_set) {
  if (class_counts.empty()) throw Error(ErrorCode::InvalidArgument, "no class counts given");
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  for (std::size_t k = 0; k < class_counts.size(); ++k) {
    if (class_counts[k] < 1 || class_counts[k] > dataset.size()) {
      throw Error(ErrorCode::InvalidArgument, "class count out of range");
    }
    if (k > 0 && class_counts[k] <= class_counts[k - 1]) {
      throw Error(ErrorCode::InvalidArgument, "class counts must be strictly ascending");
    }
  }
  if (eval_set && eval_set->dim() != dataset.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "evaluation set differs in feature dimension");
  }
  cfg.validate();

  const KernelSource source = make_kernel_source(dataset, cfg);
  ClusterRunConfig run = cfg;
  run.constraints.mode = ConstraintMode::LabelOnly;
  run.constraints.tolerances.clear();

  ClassCountTrend trend;
  trend.class_counts.assign(class_counts.begin(), class_counts.end());
  trend.repeats = repeats;

  for (const std::size_t count : class_counts) {
    std::vector<double> tv, te, ve;
    for (std::size_t r = 0; r < repeats; ++r) {
      const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, r), count);
      const auto synthetic = equal_size_labels(source, count, seed);
      std::vector<std::string> names(synthetic.size());
      for (std::size_t i = 0; i < names.size(); ++i) names[i] = std::to_string(synthetic[i]);
      const Dataset relabeled = dataset.relabeled(std::move(names));

      run.seed = seed;
      const ClusterResult result = cluster_split(relabeled, run, source);
      tv.push_back(std::sqrt(std::max(result.report.final_mmd_squared_direct, 0.0)));
      if (eval_set) {
        const auto t = select_rows(dataset.features(), result.assignment.train_indices());
        const auto v = select_rows(dataset.features(), result.assignment.val_indices());
        te.push_back(mmd_squared(cfg.kernel, t, eval_set->features()).mmd);
        ve.push_back(mmd_squared(cfg.kernel, v, eval_set->features()).mmd);
      }
    }
    trend.mmd_tv.push_back(mean_se(tv));
    if (eval_set) {
      trend.mmd_te.push_back(mean_se(te));
      trend.mmd_ve.push_back(mean_se(ve));
    }
  }

  std::vector<double> baseline;
  ConstraintSpec label_only = run.constraints;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto split = random_stratified(dataset, label_only, mix_seed(cfg.seed, r));
    baseline.push_back(split_mmd(source, split).mmd);
  }
  trend.random_mmd_tv = mean_se(baseline);
  return trend;
}

}  // namespace wcsplit
