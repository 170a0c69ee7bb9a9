#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "wcsplit/core_model.hpp"
#include "wcsplit/errors.hpp"

using namespace wcsplit;

namespace {

Dataset make(std::size_t n, std::vector<std::string> labels,
             std::optional<std::vector<std::string>> domains = std::nullopt) {
  return Dataset(oracle::gaussian(n, 2, 7), std::move(labels), std::move(domains));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("dataset invariants") {
  CHECK(code_of([] { make(1, {"a"}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { make(3, {"a", "b"}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { make(3, {"a", "b", "a"}, std::vector<std::string>{"x"}); }) ==
        ErrorCode::LengthMismatch);
  FeatureMatrix bad = oracle::gaussian(3, 2, 1);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { Dataset(bad, {"a", "b", "c"}); }) == ErrorCode::NonFiniteInput);
  CHECK(code_of([] { make(3, {"a", "b", "a"}).domains(); }) == ErrorCode::MissingDomains);

  const Dataset d = make(4, {"b", "a", "b", "c"});
  CHECK(d.distinct_labels() == std::vector<std::string>{"a", "b", "c"});
  CHECK(d.size() == 4);
  CHECK(d.dim() == 2);
}

TEST_CASE("round half away from zero") {
  CHECK(round_half_away(0.5) == 1);
  CHECK(round_half_away(1.5) == 2);
  CHECK(round_half_away(2.5) == 3);
  CHECK(round_half_away(-0.5) == -1);
  CHECK(round_half_away(0.49) == 0);
  // 0.29 * 50 evaluates to 14.499999999999998; treated as the tie it represents.
  CHECK(round_half_away(0.29 * 50) == 15);
  CHECK(round_half_away(0.2 * 10) == 2);
}

TEST_CASE("compute_quotas examples") {
  ConstraintSpec spec;

  SUBCASE("h=0.2, one class of 10 -> 2") {
    spec.holdout_fraction = 0.2;
    const auto q = compute_quotas(make(10, std::vector<std::string>(10, "a")), spec);
    REQUIRE(q.size() == 1);
    CHECK(q[0].val_target == 2);
    CHECK(q[0].val_lo == 2);
    CHECK(q[0].val_hi == 2);
    CHECK(q[0].hard());
  }
  SUBCASE("h=0.5, singleton group rounds up") {
    spec.holdout_fraction = 0.5;
    const auto q = compute_quotas(make(3, {"a", "b", "b"}), spec);
    REQUIRE(q.size() == 2);
    CHECK(q[0].group.label == "a");
    CHECK(q[0].val_target == 1);
    CHECK(q[1].val_target == 1);
  }
  SUBCASE("soft bounds h=0.2, tau=0.5, size 10 -> (1, 2, 3)") {
    spec.holdout_fraction = 0.2;
    spec.default_tolerance = 0.5;
    const auto q = compute_quotas(make(10, std::vector<std::string>(10, "a")), spec);
    CHECK(q[0].val_lo == 1);
    CHECK(q[0].val_target == 2);
    CHECK(q[0].val_hi == 3);
  }
  SUBCASE("tolerance above 1 clamps the lower bound at zero") {
    spec.holdout_fraction = 0.5;
    spec.default_tolerance = 1.5;
    const auto q = compute_quotas(make(4, std::vector<std::string>(4, "a")), spec);
    CHECK(q[0].val_lo == 0);
    CHECK(q[0].val_hi == 4);
  }
}

TEST_CASE("per-group tolerances and label-domain groups") {
  ConstraintSpec spec;
  spec.holdout_fraction = 0.5;
  spec.mode = ConstraintMode::LabelDomain;
  spec.tolerances["a|x"] = 1.0;
  const Dataset d = make(8, {"a", "a", "a", "a", "b", "b", "b", "b"},
                         std::vector<std::string>{"x", "y", "x", "y", "x", "y", "x", "y"});
  const QuotaPlan plan = plan_quotas(d, spec);
  REQUIRE(plan.groups() == 4);
  CHECK(plan.quotas[0].group.name() == "a|x");
  CHECK(plan.quotas[1].group.name() == "a|y");
  CHECK(plan.quotas[2].group.name() == "b|x");
  CHECK(plan.quotas[0].val_lo == 0);
  CHECK(plan.quotas[0].val_hi == 2);
  CHECK(plan.quotas[1].hard());
  CHECK_FALSE(plan.hard());
  CHECK(plan.group_of[0] == 0);
  CHECK(plan.group_of[1] == 1);
  CHECK(plan.group_of[7] == 3);
}

TEST_CASE("quota errors") {
  ConstraintSpec spec;
  spec.holdout_fraction = 0.01;
  CHECK(code_of([&] { compute_quotas(make(10, oracle::cycle_labels(10, 2)), spec); }) ==
        ErrorCode::EmptyValidation);
  spec.holdout_fraction = 0.99;
  CHECK(code_of([&] { compute_quotas(make(4, {"a", "b", "c", "d"}), spec); }) ==
        ErrorCode::EmptyTraining);
  spec.holdout_fraction = 0.5;
  spec.mode = ConstraintMode::LabelDomain;
  CHECK(code_of([&] { compute_quotas(make(4, {"a", "b", "c", "d"}), spec); }) ==
        ErrorCode::MissingDomains);
  spec.mode = ConstraintMode::LabelOnly;
  spec.holdout_fraction = 1.0;
  CHECK(code_of([&] { compute_quotas(make(4, {"a", "b", "c", "d"}), spec); }) ==
        ErrorCode::InvalidArgument);
  spec.holdout_fraction = 0.5;
  spec.default_tolerance = -0.1;
  CHECK(code_of([&] { compute_quotas(make(4, {"a", "b", "c", "d"}), spec); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("zero quota for one group is allowed") {
  ConstraintSpec spec;
  spec.holdout_fraction = 0.3;
  // group "a" has 1 member: round(0.3) = 0
  const auto q = compute_quotas(make(11, {"a", "b", "b", "b", "b", "b", "b", "b", "b", "b", "b"}), spec);
  CHECK(q[0].val_target == 0);
  CHECK(q[1].val_target == 3);
}

TEST_CASE("quotas partition the samples and ignore sample order") {
  wcsplit::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng.uniform_index(40);
    std::vector<std::string> labels(n), domains(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = "L" + std::to_string(rng.uniform_index(4));
      domains[i] = "D" + std::to_string(rng.uniform_index(3));
    }
    ConstraintSpec spec;
    spec.holdout_fraction = 0.3;
    spec.mode = ConstraintMode::LabelDomain;
    const Dataset d(oracle::gaussian(n, 2, trial), labels, domains);
    const auto q = compute_quotas(d, spec);
    std::size_t total = 0;
    for (const auto& g : q) total += g.total;
    CHECK(total == n);
    CHECK(std::is_sorted(q.begin(), q.end(),
                         [](const GroupQuota& a, const GroupQuota& b) { return a.group < b.group; }));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    const auto q2 = compute_quotas(d.subset(perm), spec);
    REQUIRE(q2.size() == q.size());
    for (std::size_t g = 0; g < q.size(); ++g) {
      CHECK(q2[g].group == q[g].group);
      CHECK(q2[g].total == q[g].total);
      CHECK(q2[g].val_target == q[g].val_target);
    }
  }
}

TEST_CASE("split assignment requires both sides") {
  CHECK(code_of([] { SplitAssignment({Side::Train, Side::Train}, SplitMethod::RandomStratified, 0); }) ==
        ErrorCode::EmptyValidation);
  CHECK(code_of([] { SplitAssignment({Side::Val, Side::Val}, SplitMethod::RandomStratified, 0); }) ==
        ErrorCode::EmptyTraining);
  const SplitAssignment s({Side::Val, Side::Train, Side::Train}, SplitMethod::ClusterSplit, 3,
                          ClusterIndex::J2);
  CHECK(s.val_count() == 1);
  CHECK(s.train_indices() == std::vector<std::size_t>{1, 2});
  CHECK(s.cluster_branch() == ClusterIndex::J2);
}
