#include "wcsplit/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wcsplit/errors.hpp"
#include "wcsplit/mmd.hpp"
#include "wcsplit/parallel.hpp"
#include "wcsplit/random.hpp"

namespace wcsplit {
namespace {

constexpr std::uint64_t kNystromStream = 0x4e7973;

struct ClusterStats {
  Eigen::MatrixXd sums;  // n x 2
  double size[2] = {0.0, 0.0};
  double within[2] = {0.0, 0.0};
  double diag_sum[2] = {0.0, 0.0};
};

ClusterStats cluster_stats(const KernelSource& source, std::span<const ClusterIndex> membership) {
  if (membership.size() != source.size()) {
    throw Error(ErrorCode::LengthMismatch, "membership length differs from sample count");
  }
  std::vector<std::size_t> cluster_of(membership.size());
  for (std::size_t i = 0; i < membership.size(); ++i) {
    cluster_of[i] = static_cast<std::size_t>(membership[i]);
  }
  ClusterStats st;
  st.sums = source.cluster_sums(cluster_of, 2);
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    const auto c = cluster_of[i];
    st.size[c] += 1.0;
    st.within[c] += st.sums(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    st.diag_sum[c] += source.diag(i);
  }
  if (st.size[0] == 0.0 || st.size[1] == 0.0) {
    throw Error(ErrorCode::EmptyCluster, "distance update needs two non-empty clusters");
  }
  return st;
}

double objective_from(const ClusterStats& st) {
  return (st.diag_sum[0] - st.within[0] / st.size[0]) + (st.diag_sum[1] - st.within[1] / st.size[1]);
}

CostMatrix costs_from(const KernelSource& source, const ClusterStats& st) {
  const auto n = static_cast<Eigen::Index>(source.size());
  CostMatrix d(n, 2);
  for (int c = 0; c < 2; ++c) {
    const double centroid_norm = st.within[c] / (st.size[c] * st.size[c]);
    for (Eigen::Index i = 0; i < n; ++i) {
      d(i, c) = source.diag(static_cast<std::size_t>(i)) - 2.0 * st.sums(i, c) / st.size[c] +
                centroid_norm;
    }
  }
  return d;
}

struct RestartOutcome {
  std::vector<ClusterIndex> membership;
  ClusterIndex branch = ClusterIndex::J1;
  std::vector<double> trace;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

RestartOutcome run_restart(const Dataset& dataset, const ClusterRunConfig& cfg,
                           const KernelSource& source, const QuotaPlan& plan,
                           std::size_t restart) {
  const SplitAssignment start = init_assignment(dataset, plan, mix_seed(cfg.seed, restart));
  RestartOutcome out;
  out.membership.resize(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.membership[i] = start.is_val(i) ? ClusterIndex::J1 : ClusterIndex::J2;
  }
  out.branch = ClusterIndex::J1;

  std::vector<ClusterIndex> previous;
  ClusterIndex previous_branch = out.branch;
  bool evaluated = false;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const ClusterStats st = cluster_stats(source, out.membership);
    const double psi = objective_from(st);
    if (!out.trace.empty()) {
      const double last = out.trace.back();
      if (psi > last) {
        // Rounding-level increase: keep the previous iterate.
        out.membership = std::move(previous);
        out.branch = previous_branch;
        out.objective = last;
        out.converged = true;
        return out;
      }
      if (last - psi <= cfg.min_relative_decrease * std::abs(last)) {
        out.trace.push_back(psi);
        out.objective = psi;
        out.iterations = it + 1;
        out.converged = true;
        if (cfg.on_iteration) cfg.on_iteration({restart, it, psi, out.membership, out.branch});
        return out;
      }
    }
    out.trace.push_back(psi);
    out.objective = psi;
    out.iterations = it + 1;
    evaluated = true;
    if (cfg.on_iteration) cfg.on_iteration({restart, it, psi, out.membership, out.branch});

    const CostMatrix costs = costs_from(source, st);
    DisjunctiveSolution next =
        solve_disjunctive(costs, plan.group_of, plan.quotas, true, cfg.solver);
    if (next.solution.membership == out.membership) {
      out.converged = true;
      return out;
    }
    previous = std::move(out.membership);
    previous_branch = out.branch;
    out.membership = std::move(next.solution.membership);
    out.branch = next.branch;
    evaluated = false;
  }

  // Iteration budget exhausted after an assignment step: score the last
  // assignment, which cannot be worse than the last traced iterate.
  if (!evaluated) {
    const double psi = objective_from(cluster_stats(source, out.membership));
    if (psi > out.trace.back()) {
      out.membership = std::move(previous);
      out.branch = previous_branch;
      out.objective = out.trace.back();
    } else {
      out.objective = psi;
    }
  }
  return out;
}

}  // namespace

void ClusterRunConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
  if (nystrom && *nystrom < 1) {
    throw Error(ErrorCode::InvalidArgument, "Nystrom landmark count must be >= 1");
  }
  kernel.validate();
  constraints.validate();
}

SplitAssignment init_assignment(const Dataset& dataset, const QuotaPlan& plan,
                                std::uint64_t seed) {
  if (plan.group_of.size() != dataset.size()) {
    throw Error(ErrorCode::LengthMismatch, "quota plan does not match dataset");
  }
  std::vector<std::vector<std::size_t>> members(plan.groups());
  for (std::size_t i = 0; i < dataset.size(); ++i) members[plan.group_of[i]].push_back(i);

  Rng rng(seed);
  std::vector<Side> membership(dataset.size(), Side::Train);
  std::vector<std::size_t> taken(plan.groups(), 0);
  std::size_t val_total = 0;
  for (std::size_t g = 0; g < plan.groups(); ++g) {
    const auto& q = plan.quotas[g];
    for (auto pick : sample_without_replacement(rng, members[g].size(), q.val_target)) {
      membership[members[g][pick]] = Side::Val;
    }
    taken[g] = q.val_target;
    val_total += q.val_target;
  }

  // Soft bounds can leave a side empty at the targets; move one random
  // sample within the bounds.
  if (val_total == 0 || val_total == dataset.size()) {
    const bool need_val = val_total == 0;
    std::vector<std::size_t> movable;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto& q = plan.quotas[plan.group_of[i]];
      const std::size_t k = taken[plan.group_of[i]];
      if (need_val ? k < q.val_hi : k > q.val_lo) movable.push_back(i);
    }
    if (movable.empty()) throw Error(ErrorCode::Infeasible, "quota bounds force an empty side");
    const std::size_t i = movable[rng.uniform_index(movable.size())];
    membership[i] = need_val ? Side::Val : Side::Train;
  }
  return SplitAssignment(std::move(membership), SplitMethod::ClusterSplit, seed);
}

CostMatrix distance_update(const KernelSource& source, std::span<const ClusterIndex> membership) {
  return costs_from(source, cluster_stats(source, membership));
}

double clustering_objective(const KernelSource& source, std::span<const ClusterIndex> membership) {
  return objective_from(cluster_stats(source, membership));
}

KernelSource make_kernel_source(const Dataset& dataset, const ClusterRunConfig& cfg,
                                std::vector<std::string>* notes) {
  const std::size_t n = dataset.size();
  std::optional<std::size_t> q = cfg.nystrom;
  if (q && *q > n) {
    if (notes) notes->push_back("nystrom landmark count capped at n=" + std::to_string(n));
    q = n;
  }
  if (!q && !gram_fits(n, cfg.gram_budget_bytes)) {
    q = std::min(n, kDefaultNystromLandmarks);
    if (notes) {
      notes->push_back("Gram matrix exceeds the memory budget; using Nystrom with q=" +
                       std::to_string(*q));
    }
  }
  if (q) {
    return KernelSource::from_sketch(nystrom_embed(cfg.kernel, dataset.features(), *q,
                                                   cfg.nystrom_rank_cutoff,
                                                   mix_seed(cfg.seed, kNystromStream)));
  }
  return KernelSource::exact(cfg.kernel, dataset.features(), cfg.gram_budget_bytes);
}

ClusterResult cluster_split(const Dataset& dataset, const ClusterRunConfig& cfg) {
  cfg.validate();
  std::vector<std::string> notes;
  const KernelSource source = make_kernel_source(dataset, cfg, &notes);
  ClusterResult result = cluster_split(dataset, cfg, source);
  result.report.notes.insert(result.report.notes.begin(), notes.begin(), notes.end());
  return result;
}

ClusterResult cluster_split(const Dataset& dataset, const ClusterRunConfig& cfg,
                            const KernelSource& source) {
  cfg.validate();
  if (source.size() != dataset.size()) {
    throw Error(ErrorCode::LengthMismatch, "kernel source does not match dataset");
  }
  const QuotaPlan plan = plan_quotas(dataset, cfg.constraints);

  std::vector<RestartOutcome> outcomes(cfg.restarts);
  parallel_for(0, cfg.restarts, [&](std::size_t r) {
    outcomes[r] = run_restart(dataset, cfg, source, plan, r);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r) {
    if (outcomes[r].objective < outcomes[best].objective) best = r;
  }
  RestartOutcome& win = outcomes[best];

  std::vector<Side> sides(dataset.size());
  for (std::size_t i = 0; i < sides.size(); ++i) {
    sides[i] = win.membership[i] == win.branch ? Side::Val : Side::Train;
  }
  SplitAssignment assignment(std::move(sides), SplitMethod::ClusterSplit, cfg.seed, win.branch);

  SplitReport report;
  report.objective_trace = std::move(win.trace);
  report.final_objective = win.objective;
  report.iterations = win.iterations;
  report.converged = win.converged;
  report.restart_index = best;
  report.seed = cfg.seed;
  report.kernel = source.kernel();
  report.approximate = source.approximate();
  if (const auto* sk = source.sketch()) {
    report.nystrom_landmarks = sk->landmarks();
    report.nystrom_rank = sk->rank();
  }
  report.quotas = audit_quotas(plan, assignment.membership());

  // MMD^2 through the Psi identity, and directly.
  const ClusterStats st = cluster_stats(source, win.membership);
  const auto n = static_cast<double>(dataset.size());
  const double total_diag = st.diag_sum[0] + st.diag_sum[1];
  const double total_sum = st.sums.sum();
  const double ssq_all = total_diag - total_sum / n;
  const auto nt = static_cast<double>(assignment.train_count());
  const auto nv = static_cast<double>(assignment.val_count());
  report.final_mmd_squared = n / (nt * nv) * (ssq_all - win.objective);
  report.final_mmd = std::sqrt(std::max(report.final_mmd_squared, 0.0));
  const MmdEstimate direct = source.approximate()
                                 ? split_mmd(source, assignment)
                                 : split_mmd(cfg.kernel, dataset, assignment);
  report.final_mmd_squared_direct = direct.mmd_squared;
  report.identity_residual = std::abs(report.final_mmd_squared - direct.mmd_squared) /
                             std::max(1.0, std::abs(direct.mmd_squared));
  return {std::move(assignment), std::move(report)};
}

}  // namespace wcsplit
