#include "wcsplit/assign.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "wcsplit/errors.hpp"

namespace wcsplit {
namespace {

struct Candidate {
  double delta;
  std::size_t index;
};

bool by_delta_then_index(const Candidate& a, const Candidate& b) {
  if (a.delta != b.delta) return a.delta < b.delta;
  return a.index < b.index;
}

void check_problem(const CostMatrix& costs, std::span<const std::size_t> group_of,
                   std::span<const GroupQuota> quotas) {
  if (static_cast<std::size_t>(costs.rows()) != group_of.size()) {
    throw Error(ErrorCode::LengthMismatch, "cost rows differ from group assignments");
  }
  if (!costs.allFinite()) throw Error(ErrorCode::NonFiniteInput, "assignment costs must be finite");
  std::vector<std::size_t> sizes(quotas.size(), 0);
  for (auto g : group_of) {
    if (g >= quotas.size()) throw Error(ErrorCode::InvalidArgument, "sample group has no quota");
    ++sizes[g];
  }
  for (std::size_t g = 0; g < quotas.size(); ++g) {
    const auto& q = quotas[g];
    if (q.total != sizes[g] || q.val_lo > q.val_hi || q.val_hi > q.total) {
      throw Error(ErrorCode::Infeasible, "quota for group '" + q.group.name() +
                                             "' is inconsistent with its member count");
    }
  }
}

AssignmentSolution solve_oriented(const CostMatrix& costs, std::span<const std::size_t> group_of,
                                  std::span<const GroupQuota> quotas, ClusterIndex val_cluster,
                                  bool require_nonempty) {
  check_problem(costs, group_of, quotas);
  const std::size_t n = group_of.size();
  const int vc = static_cast<int>(val_cluster);
  const int oc = 1 - vc;

  // Members of each group, sorted by the cost of moving them into the
  // validation cluster.
  std::vector<std::vector<Candidate>> members(quotas.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    members[group_of[i]].push_back({costs(row, vc) - costs(row, oc), i});
  }

  AssignmentSolution sol;
  sol.membership.assign(n, other(val_cluster));
  sol.per_group_val_counts.assign(quotas.size(), 0);
  std::size_t val_total = 0;
  for (std::size_t g = 0; g < quotas.size(); ++g) {
    auto& list = members[g];
    std::sort(list.begin(), list.end(), by_delta_then_index);
    const auto& q = quotas[g];
    std::size_t take = q.val_target;
    if (!q.hard()) {
      const auto negative = static_cast<std::size_t>(std::count_if(
          list.begin(), list.end(), [](const Candidate& c) { return c.delta < 0.0; }));
      take = std::clamp(negative, q.val_lo, q.val_hi);
    }
    for (std::size_t k = 0; k < take; ++k) sol.membership[list[k].index] = val_cluster;
    sol.per_group_val_counts[g] = take;
    val_total += take;
  }

  if (require_nonempty && (val_total == 0 || val_total == n)) {
    // Only reachable with soft bounds. Every chosen delta is >= 0 (or every
    // unchosen one < 0), so the cheapest single move restores feasibility.
    const bool need_val = val_total == 0;
    std::optional<Candidate> best;
    std::size_t best_group = 0;
    for (std::size_t g = 0; g < quotas.size(); ++g) {
      const auto& q = quotas[g];
      const std::size_t k = sol.per_group_val_counts[g];
      if (need_val ? k >= q.val_hi : k <= q.val_lo) continue;
      // Next member in (or last member out of) the sorted prefix.
      Candidate c = need_val ? members[g][k] : members[g][k - 1];
      if (!need_val) c.delta = -c.delta;  // cost of moving out
      if (!best || by_delta_then_index(c, *best)) {
        best = c;
        best_group = g;
      }
    }
    if (!best) {
      throw Error(ErrorCode::Infeasible, "quota bounds force an empty cluster");
    }
    sol.membership[best->index] = need_val ? val_cluster : other(val_cluster);
    sol.per_group_val_counts[best_group] += need_val ? 1 : -1;
  }

  sol.total_cost = assignment_cost(costs, sol.membership);
  return sol;
}

}  // namespace

double assignment_cost(const CostMatrix& costs, std::span<const ClusterIndex> membership) {
  double total = 0.0;
  for (std::size_t i = 0; i < membership.size(); ++i) {
    total += costs(static_cast<Eigen::Index>(i), static_cast<int>(membership[i]));
  }
  return total;
}

AssignmentSolution solve_assignment(const AssignmentProblem& problem) {
  return solve_oriented(problem.costs, problem.group_of, problem.quotas, problem.val_cluster,
                        problem.require_nonempty);
}

DisjunctiveSolution solve_disjunctive(const CostMatrix& costs,
                                      std::span<const std::size_t> group_of,
                                      std::span<const GroupQuota> quotas,
                                      bool require_nonempty) {
  DisjunctiveSolution j1{solve_oriented(costs, group_of, quotas, ClusterIndex::J1, require_nonempty),
                         ClusterIndex::J1};
  DisjunctiveSolution j2{solve_oriented(costs, group_of, quotas, ClusterIndex::J2, require_nonempty),
                         ClusterIndex::J2};
  return j2.solution.total_cost < j1.solution.total_cost ? std::move(j2) : std::move(j1);
}

DisjunctiveSolution solve_disjunctive(const CostMatrix& costs,
                                      std::span<const std::size_t> group_of,
                                      std::span<const GroupQuota> quotas,
                                      bool require_nonempty, const AssignmentSolver& solver) {
  if (!solver) return solve_disjunctive(costs, group_of, quotas, require_nonempty);
  check_problem(costs, group_of, quotas);
  AssignmentProblem problem{costs, {group_of.begin(), group_of.end()},
                            {quotas.begin(), quotas.end()}, ClusterIndex::J1, require_nonempty};
  DisjunctiveSolution j1{solver(problem), ClusterIndex::J1};
  problem.val_cluster = ClusterIndex::J2;
  DisjunctiveSolution j2{solver(problem), ClusterIndex::J2};
  return j2.solution.total_cost < j1.solution.total_cost ? std::move(j2) : std::move(j1);
}

}  // namespace wcsplit
