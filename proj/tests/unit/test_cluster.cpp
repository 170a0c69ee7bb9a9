#include "doctest.h"

#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "oracles.hpp"
#include "wcsplit/cluster.hpp"
#include "wcsplit/errors.hpp"
#include "wcsplit/mmd.hpp"
#include "wcsplit/parallel.hpp"

using namespace wcsplit;

namespace {

std::vector<ClusterIndex> clusters_of(const SplitAssignment& s) {
  std::vector<ClusterIndex> m(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) m[i] = s.is_val(i) ? ClusterIndex::J1 : ClusterIndex::J2;
  return m;
}

std::vector<bool> val_mask(const SplitAssignment& s) {
  std::vector<bool> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s.is_val(i);
  return v;
}

// Two tight blobs far apart; labels alternate so each blob holds half of each class.
Dataset blobs(std::size_t per_blob, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix f(static_cast<Eigen::Index>(2 * per_blob), 2);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double cx = i < static_cast<Eigen::Index>(per_blob) ? -50.0 : 50.0;
    f(i, 0) = cx + 0.1 * rng.normal();
    f(i, 1) = 0.1 * rng.normal();
  }
  return Dataset(f, oracle::cycle_labels(2 * per_blob, 2));
}

}  // namespace

TEST_CASE("init_assignment") {
  const Dataset d(oracle::gaussian(4, 2, 1), std::vector<std::string>(4, "a"));
  ConstraintSpec spec;
  spec.holdout_fraction = 0.5;
  const auto plan = plan_quotas(d, spec);

  SUBCASE("forced count and determinism") {
    const auto a = init_assignment(d, plan, 9);
    CHECK(a.val_count() == 2);
    CHECK(a.membership() == init_assignment(d, plan, 9).membership());
  }

  SUBCASE("pairs are uniform over 1000 draws") {
    std::map<std::vector<std::size_t>, int> freq;
    for (std::uint64_t s = 0; s < 1000; ++s) ++freq[init_assignment(d, plan, mix_seed(123, s)).val_indices()];
    CHECK(freq.size() == 6);
    const double p = 1.0 / 6.0;
    const double sigma = std::sqrt(1000 * p * (1 - p));
    for (const auto& [pair, count] : freq) CHECK(std::abs(count - 1000 * p) <= 4 * sigma);
  }

  SUBCASE("soft bounds with zero targets still give two sides") {
    const Dataset big(oracle::gaussian(6, 1, 2), oracle::cycle_labels(6, 3));
    ConstraintSpec soft;
    soft.holdout_fraction = 0.2;  // round(0.4) = 0 per class
    soft.default_tolerance = 1.0;
    soft.tolerances["c0"] = 1.0;
    const auto p = plan_quotas(big, soft);
    const auto a = init_assignment(big, p, 4);
    CHECK(a.val_count() >= 1);
  }
}

TEST_CASE("distance_update") {
  SUBCASE("singleton cluster has zero distance to its own centroid") {
    const auto f = oracle::gaussian(5, 3, 6);
    for (KernelConfig k : {KernelConfig{}, KernelConfig{KernelFamily::Linear}}) {
      const auto src = KernelSource::exact(k, f);
      std::vector<ClusterIndex> m(5, ClusterIndex::J2);
      m[3] = ClusterIndex::J1;
      CHECK(std::abs(distance_update(src, m)(3, 0)) <= 1e-12);
    }
  }
  SUBCASE("linear kernel matches coordinate distances") {
    const auto f = oracle::gaussian(14, 3, 8);
    const auto src = KernelSource::exact(KernelConfig{KernelFamily::Linear}, f);
    std::vector<ClusterIndex> m(14);
    for (std::size_t i = 0; i < 14; ++i) m[i] = i % 3 ? ClusterIndex::J2 : ClusterIndex::J1;
    const auto d = distance_update(src, m);
    Eigen::RowVectorXd mean[2] = {Eigen::RowVectorXd::Zero(3), Eigen::RowVectorXd::Zero(3)};
    int count[2] = {0, 0};
    for (std::size_t i = 0; i < 14; ++i) {
      mean[static_cast<int>(m[i])] += f.row(static_cast<Eigen::Index>(i));
      ++count[static_cast<int>(m[i])];
    }
    for (int c = 0; c < 2; ++c) mean[c] /= count[c];
    for (Eigen::Index i = 0; i < 14; ++i)
      for (int c = 0; c < 2; ++c) CHECK(std::abs(d(i, c) - (f.row(i) - mean[c]).squaredNorm()) <= 1e-10);
  }
  SUBCASE("duplicate points get identical rows") {
    auto f = oracle::gaussian(8, 2, 9);
    f.row(5) = f.row(1);
    const auto src = KernelSource::exact(KernelConfig{}, f);
    std::vector<ClusterIndex> m{ClusterIndex::J1, ClusterIndex::J1, ClusterIndex::J2, ClusterIndex::J2,
                                ClusterIndex::J1, ClusterIndex::J2, ClusterIndex::J2, ClusterIndex::J1};
    const auto d = distance_update(src, m);
    CHECK(d(1, 0) == doctest::Approx(d(5, 0)).epsilon(1e-14));
    CHECK(d(1, 1) == doctest::Approx(d(5, 1)).epsilon(1e-14));
  }
  SUBCASE("empty cluster") {
    const auto src = KernelSource::exact(KernelConfig{}, oracle::gaussian(3, 1, 1));
    std::vector<ClusterIndex> m(3, ClusterIndex::J1);
    CHECK_THROWS_AS(distance_update(src, m), Error);
  }
}

TEST_CASE("objective equals the sum of within-set sums of squares") {
  const auto f = oracle::gaussian(20, 2, 12);
  KernelConfig k;
  k.gamma = 0.5;
  std::vector<ClusterIndex> m(20);
  std::vector<bool> val(20);
  for (std::size_t i = 0; i < 20; ++i) {
    val[i] = i % 4 == 0;
    m[i] = val[i] ? ClusterIndex::J1 : ClusterIndex::J2;
  }
  CHECK(std::abs(clustering_objective(KernelSource::exact(k, f), m) - oracle::psi(k, f, val)) <= 1e-10);
}

TEST_CASE("cluster_split separates far blobs") {
  const Dataset d = blobs(10, 3);
  ClusterRunConfig cfg;
  cfg.kernel.family = KernelFamily::Linear;
  cfg.constraints.holdout_fraction = 0.5;
  cfg.seed = 1;
  const auto r = cluster_split(d, cfg);
  std::vector<bool> blob(20);
  for (std::size_t i = 0; i < 20; ++i) blob[i] = i >= 10;
  const auto val = val_mask(r.assignment);
  const bool same = val == blob;
  std::vector<bool> flipped(blob);
  flipped.flip();
  CHECK((same || val == flipped));
  CHECK(std::abs(r.report.final_objective - oracle::psi(cfg.kernel, d.features(), blob)) <= 1e-9);
  CHECK(r.report.converged);
  CHECK(r.report.identity_residual <= 1e-9);
  CHECK(quotas_satisfied(r.report.quotas));
}

TEST_CASE("best of 20 restarts reaches the exhaustive minimum for n = 10") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset d(oracle::gaussian(10, 2, 40 + seed), oracle::cycle_labels(10, 2));
    ClusterRunConfig cfg;
    cfg.restarts = 20;
    cfg.seed = seed;
    cfg.constraints.holdout_fraction = 0.4;
    const auto r = cluster_split(d, cfg);
    const auto plan = plan_quotas(d, cfg.constraints);
    const double best = oracle::brute_min_psi(cfg.kernel, d.features(), plan.group_of, plan.quotas);
    CHECK(std::abs(r.report.final_objective - best) <= 1e-9);
    CHECK(std::abs(oracle::psi(cfg.kernel, d.features(), val_mask(r.assignment)) - best) <= 1e-9);
  }
}

TEST_CASE("every iterate satisfies the quotas and the trace never rises") {
  const Dataset d(oracle::gaussian(60, 3, 5), oracle::cycle_labels(60, 3));
  for (double tau : {0.0, 0.5}) {
    ClusterRunConfig cfg;
    cfg.restarts = 4;
    cfg.max_iters = 7;
    cfg.seed = 21;
    cfg.constraints.holdout_fraction = 0.25;
    cfg.constraints.default_tolerance = tau;
    const auto plan = plan_quotas(d, cfg.constraints);
    std::mutex mu;
    std::map<std::size_t, std::vector<double>> traces;
    bool all_ok = true;
    cfg.on_iteration = [&](const IterationState& s) {
      std::vector<Side> sides(s.membership.size());
      for (std::size_t i = 0; i < sides.size(); ++i)
        sides[i] = s.membership[i] == s.val_cluster ? Side::Val : Side::Train;
      const bool ok = quotas_satisfied(audit_quotas(plan, sides));
      std::lock_guard lock(mu);
      all_ok = all_ok && ok;
      traces[s.restart].push_back(s.objective);
    };
    const auto r = cluster_split(d, cfg);
    CHECK(all_ok);
    CHECK(traces.size() == 4);
    for (const auto& [restart, t] : traces)
      for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] <= t[i - 1]);
    const auto& trace = r.report.objective_trace;
    CHECK(trace.size() <= cfg.max_iters);
    CHECK(trace.size() == traces[r.report.restart_index].size());
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
    CHECK(r.report.final_objective <= trace.back());
    CHECK(quotas_satisfied(r.report.quotas));
  }
}

TEST_CASE("cluster_split is deterministic across runs and thread counts") {
  const Dataset d(oracle::gaussian(80, 4, 14), oracle::cycle_labels(80, 4));
  ClusterRunConfig cfg;
  cfg.restarts = 6;
  cfg.seed = 99;
  const auto a = cluster_split(d, cfg);
  const auto b = cluster_split(d, cfg);
  CHECK(a.assignment.membership() == b.assignment.membership());
  set_worker_count(1);
  const auto c = cluster_split(d, cfg);
  set_worker_count(4);
  const auto e = cluster_split(d, cfg);
  set_worker_count(0);
  CHECK(a.assignment.membership() == c.assignment.membership());
  CHECK(a.assignment.membership() == e.assignment.membership());
  CHECK(a.report.final_objective == c.report.final_objective);
  CHECK(a.report.objective_trace == e.report.objective_trace);
}

TEST_CASE("solver seam reproduces the sorting solver") {
  const Dataset d(oracle::gaussian(12, 2, 31), oracle::cycle_labels(12, 2));
  ClusterRunConfig cfg;
  cfg.restarts = 3;
  cfg.seed = 5;
  cfg.constraints.holdout_fraction = 0.34;
  const auto fast = cluster_split(d, cfg);
  cfg.solver = oracle::brute_solver;
  const auto brute = cluster_split(d, cfg);
  CHECK(brute.report.final_objective == doctest::Approx(fast.report.final_objective).epsilon(1e-12));
}

TEST_CASE("cluster_split with a Nystrom sketch") {
  const Dataset d(oracle::gaussian(50, 3, 2), oracle::cycle_labels(50, 2));
  ClusterRunConfig cfg;
  cfg.restarts = 3;
  cfg.nystrom = 50;
  const auto r = cluster_split(d, cfg);
  CHECK(r.report.approximate);
  CHECK(r.report.nystrom_landmarks == std::optional<std::size_t>(50));
  CHECK(r.report.identity_residual <= 1e-9);
  CHECK(quotas_satisfied(r.report.quotas));
  const double exact = split_mmd(cfg.kernel, d, r.assignment).mmd_squared;
  CHECK(std::abs(exact - r.report.final_mmd_squared_direct) <= 1e-6);

  SUBCASE("budget fallback") {
    ClusterRunConfig small;
    small.restarts = 1;
    small.gram_budget_bytes = 1024;
    const auto s = cluster_split(d, small);
    CHECK(s.report.approximate);
    REQUIRE_FALSE(s.report.notes.empty());
    CHECK(s.report.notes.front().find("budget") != std::string::npos);
  }
  SUBCASE("landmark count above n is capped") {
    cfg.nystrom = 500;
    const auto s = cluster_split(d, cfg);
    CHECK(s.report.nystrom_landmarks == std::optional<std::size_t>(50));
  }
}

TEST_CASE("soft constraints stay within their bounds") {
  const Dataset d(oracle::gaussian(40, 2, 8, 0.0), oracle::cycle_labels(40, 2));
  ClusterRunConfig cfg;
  cfg.restarts = 5;
  cfg.seed = 3;
  const auto hard = cluster_split(d, cfg);
  cfg.constraints.default_tolerance = 0.5;
  const auto soft = cluster_split(d, cfg);
  CHECK(quotas_satisfied(soft.report.quotas));
  for (const auto& a : soft.report.quotas) CHECK_FALSE(a.quota.hard());
  CHECK(hard.report.identity_residual <= 1e-9);
  CHECK(soft.report.identity_residual <= 1e-9);
}

TEST_CASE("run config validation") {
  const Dataset d(oracle::gaussian(4, 1, 1), oracle::cycle_labels(4, 1));
  ClusterRunConfig cfg;
  cfg.restarts = 0;
  CHECK_THROWS_AS(cluster_split(d, cfg), Error);
  cfg.restarts = 1;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cluster_split(d, cfg), Error);
  cfg.max_iters = 5;
  cfg.constraints.holdout_fraction = 1.5;
  CHECK_THROWS_AS(cluster_split(d, cfg), Error);
}
