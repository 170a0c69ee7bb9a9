#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "wcsplit/analysis.hpp"
#include "wcsplit/cluster.hpp"
#include "wcsplit/errors.hpp"

using namespace wcsplit;

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  CHECK(spearman(x, x).rho == 1.0);
  CHECK(spearman(x, neg).rho == -1.0);

  const std::vector<double> y{1, 3, 2, 5, 4};
  const auto r = spearman(x, y);
  CHECK(r.rho == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(r.n_points == 5);
  CHECK(r.p_approximate);
  // scipy.stats.spearmanr reference values.
  CHECK(r.p_value == doctest::Approx(0.10408803866182788).epsilon(1e-10));
}

TEST_CASE("spearman reference p-values") {
  std::vector<double> x(12), y{2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11};
  for (int i = 0; i < 12; ++i) x[i] = i;
  const auto r = spearman(x, y);
  CHECK(r.rho == doctest::Approx(0.9580419580419581).epsilon(1e-13));
  CHECK(r.p_value == doctest::Approx(9.5435818268384e-07).epsilon(1e-8));
  CHECK_FALSE(r.p_approximate);

  const std::vector<double> tx{1, 2, 2, 3, 4}, ty{10, 20, 30, 30, 50};
  const auto t = spearman(tx, ty);
  CHECK(t.rho == doctest::Approx(0.9210526315789475).epsilon(1e-13));
  CHECK(t.p_value == doctest::Approx(0.026310519685577894).epsilon(1e-9));
}

TEST_CASE("spearman is invariant under monotone transforms") {
  Rng rng(3);
  std::vector<double> x(30), y(30), fx(30), gy(30);
  for (int i = 0; i < 30; ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + rng.normal();
    fx[i] = std::exp(x[i]);
    gy[i] = y[i] * y[i] * y[i] + 5.0;
  }
  CHECK(spearman(fx, gy).rho == doctest::Approx(spearman(x, y).rho).epsilon(1e-14));
  CHECK(spearman(x, y).rho == doctest::Approx(spearman(y, x).rho).epsilon(1e-14));
}

TEST_CASE("spearman errors") {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, flat{4, 4, 4};
  CHECK_THROWS_AS(spearman(a, b), Error);
  try {
    spearman(a, flat);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
}

TEST_CASE("average_ranks") {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0};
  CHECK(average_ranks(v) == std::vector<double>{3.5, 1.0, 3.5, 2.0});
}

TEST_CASE("mean_se") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto m = mean_se(v);
  CHECK(m.mean == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  const std::vector<double> one{7};
  CHECK(mean_se(one).se == 0.0);
}

TEST_CASE("equal_size_labels") {
  const auto f = oracle::gaussian(23, 2, 6);
  const auto src = KernelSource::exact(KernelConfig{}, f);
  for (std::size_t c : {1u, 2u, 5u, 23u}) {
    const auto labels = equal_size_labels(src, c, 4);
    std::vector<std::size_t> sizes(c, 0);
    for (auto l : labels) ++sizes.at(l);
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
    CHECK(labels == equal_size_labels(src, c, 4));
  }
  CHECK_THROWS_AS(equal_size_labels(src, 0, 1), Error);
  CHECK_THROWS_AS(equal_size_labels(src, 24, 1), Error);
}

TEST_CASE("equal_size_labels finds well separated groups") {
  FeatureMatrix f(30, 2);
  Rng rng(2);
  for (int i = 0; i < 30; ++i) {
    f(i, 0) = 20.0 * (i % 3) + 0.1 * rng.normal();
    f(i, 1) = 0.1 * rng.normal();
  }
  const auto labels = equal_size_labels(KernelSource::exact(KernelConfig{KernelFamily::Linear}, f), 3, 1);
  for (int i = 3; i < 30; ++i) CHECK(labels[i] == labels[i % 3]);
}

TEST_CASE("class_count_experiment") {
  // Four blobs so that few classes leave room for a strongly shifted split.
  Rng rng(12);
  const std::size_t n = 120;
  FeatureMatrix f(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = (i % 4 < 2) ? -3.0 : 3.0;
    const double cy = (i % 2) ? -3.0 : 3.0;
    f(static_cast<Eigen::Index>(i), 0) = cx + rng.normal();
    f(static_cast<Eigen::Index>(i), 1) = cy + rng.normal();
  }
  const Dataset d(f, std::vector<std::string>(n, "a"));
  ClusterRunConfig cfg;
  cfg.restarts = 2;
  cfg.kernel.gamma_mode = GammaMode::InverseDim;
  cfg.constraints.holdout_fraction = 0.5;
  const std::vector<std::size_t> counts{1, 4, 60};
  const auto eval = Dataset(oracle::gaussian(20, 2, 3), std::vector<std::string>(20, "a"));
  const auto trend = class_count_experiment(d, counts, 2, cfg, eval);
  REQUIRE(trend.mmd_tv.size() == 3);
  CHECK(trend.mmd_te.size() == 3);
  CHECK(trend.mmd_tv[0].mean > trend.mmd_tv[1].mean);
  CHECK(trend.mmd_tv[1].mean > trend.mmd_tv[2].mean);
  // Two samples per class: close to a random split.
  CHECK(trend.mmd_tv[2].mean <= 2.0 * trend.random_mmd_tv.mean);

  const std::vector<std::size_t> unordered{4, 1};
  CHECK_THROWS_AS(class_count_experiment(d, unordered, 1, cfg), Error);
  const std::vector<std::size_t> too_many{500};
  CHECK_THROWS_AS(class_count_experiment(d, too_many, 1, cfg), Error);
}
