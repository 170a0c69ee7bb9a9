#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wcsplit/core_model.hpp"

namespace wcsplit {

// Column 0 is cluster J1, column 1 is J2.
using CostMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct AssignmentProblem {
  CostMatrix costs;
  std::vector<std::size_t> group_of;
  std::vector<GroupQuota> quotas;
  ClusterIndex val_cluster = ClusterIndex::J1;
  // Additionally require both clusters to be non-empty. The clustering loop
  // needs this; the plain LP does not state it.
  bool require_nonempty = true;
};

struct AssignmentSolution {
  std::vector<ClusterIndex> membership;
  double total_cost = 0.0;
  std::vector<std::size_t> per_group_val_counts;
};

// Exact minimiser of the constrained assignment LP for one orientation of the
// quota constraint. The constraints separate by group, so each group is solved
// by sorting its members on the cost difference and taking a prefix; this is
// the integral LP optimum.
AssignmentSolution solve_assignment(const AssignmentProblem& problem);

struct DisjunctiveSolution {
  AssignmentSolution solution;
  ClusterIndex branch = ClusterIndex::J1;  // cluster carrying the validation quotas
};

// Solves both orientations and keeps the cheaper one; J1 wins exact ties.
DisjunctiveSolution solve_disjunctive(const CostMatrix& costs,
                                      std::span<const std::size_t> group_of,
                                      std::span<const GroupQuota> quotas,
                                      bool require_nonempty = true);

// Seam for alternative single-orientation solvers (e.g. an exhaustive search
// used for cross-checking). Must honour the same contract as solve_assignment.
using AssignmentSolver = std::function<AssignmentSolution(const AssignmentProblem&)>;

DisjunctiveSolution solve_disjunctive(const CostMatrix& costs,
                                      std::span<const std::size_t> group_of,
                                      std::span<const GroupQuota> quotas,
                                      bool require_nonempty, const AssignmentSolver& solver);

double assignment_cost(const CostMatrix& costs, std::span<const ClusterIndex> membership);

}  // namespace wcsplit
