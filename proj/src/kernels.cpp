#include "wcsplit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wcsplit/errors.hpp"
#include "wcsplit/parallel.hpp"
#include "wcsplit/random.hpp"

namespace wcsplit {
namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    acc += diff * diff;
  }
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
  return acc;
}

inline double eval_bound(const KernelConfig& cfg, std::span<const double> x,
                         std::span<const double> y) {
  if (cfg.family == KernelFamily::Linear) return dot(x, y);
  return std::exp(-cfg.gamma * squared_distance(x, y));
}

void require_finite(const FeatureMatrix& features) {
  if (!features.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, "feature matrix has non-finite values");
  }
}

// Rows i of `rows` against rows of `cols`, evaluated in parallel over i.
Eigen::MatrixXd cross_kernel(const KernelConfig& bound,
                             const FeatureMatrix& features,
                             std::span<const std::size_t> cols) {
  const auto n = static_cast<std::size_t>(features.rows());
  Eigen::MatrixXd out(n, cols.size());
  parallel_for(0, n, [&](std::size_t i) {
    const auto xi = row_span(features, static_cast<Eigen::Index>(i));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(i, c) = eval_bound(bound, xi,
                             row_span(features, static_cast<Eigen::Index>(cols[c])));
    }
  });
  return out;
}

}  // namespace

std::string_view to_string(KernelFamily family) noexcept {
  return family == KernelFamily::Rbf ? "rbf" : "linear";
}

std::string_view to_string(GammaMode mode) noexcept {
  return mode == GammaMode::Fixed ? "fixed" : "inverse-dim";
}

void KernelConfig::validate() const {
  if (family == KernelFamily::Rbf && gamma_mode == GammaMode::Fixed &&
      !(gamma > 0.0 && std::isfinite(gamma))) {
    throw Error(ErrorCode::InvalidArgument,
                "RBF gamma must be positive and finite, got " + std::to_string(gamma));
  }
}

double KernelConfig::effective_gamma(std::size_t dim) const {
  if (gamma_mode == GammaMode::InverseDim) {
    if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "zero feature dimension");
    return 1.0 / static_cast<double>(dim);
  }
  return gamma;
}

KernelConfig KernelConfig::bind(std::size_t dim) const {
  validate();
  KernelConfig out = *this;
  out.gamma = effective_gamma(dim);
  out.gamma_mode = GammaMode::Fixed;
  return out;
}

double detail::kernel_eval_bound(const KernelConfig& bound, std::span<const double> x,
                                 std::span<const double> y) noexcept {
  return eval_bound(bound, x, y);
}

double kernel_eval(const KernelConfig& cfg, std::span<const double> x,
                   std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel arguments differ in dimension");
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) ||
      !std::all_of(y.begin(), y.end(), finite)) {
    throw Error(ErrorCode::NonFiniteInput, "kernel argument has non-finite values");
  }
  return eval_bound(cfg.bind(x.size()), x, y);
}

bool gram_fits(std::size_t n, std::size_t budget_bytes) noexcept {
  const long double bytes = static_cast<long double>(n) * n * sizeof(double);
  return bytes <= static_cast<long double>(budget_bytes);
}

Eigen::MatrixXd gram_matrix(const KernelConfig& cfg,
                            const FeatureMatrix& features,
                            std::size_t budget_bytes) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (!gram_fits(n, budget_bytes)) {
    throw Error(ErrorCode::BudgetExceeded,
                "Gram matrix for n=" + std::to_string(n) +
                    " exceeds the memory budget; use Nystrom mode");
  }
  require_finite(features);
  const KernelConfig bound = cfg.bind(static_cast<std::size_t>(features.cols()));

  Eigen::MatrixXd gram(n, n);
  parallel_for(0, n, [&](std::size_t i) {
    const auto xi = row_span(features, static_cast<Eigen::Index>(i));
    for (std::size_t j = i; j < n; ++j) {
      gram(i, j) = eval_bound(bound, xi, row_span(features, static_cast<Eigen::Index>(j)));
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
  }
  return gram;
}

NystromSketch nystrom_embed(const KernelConfig& cfg,
                            const FeatureMatrix& features, std::size_t q,
                            double rank_cutoff, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (q < 1 || q > n) {
    throw Error(ErrorCode::InvalidArgument,
                "Nystrom landmark count must lie in [1, n], got " + std::to_string(q));
  }
  if (!(rank_cutoff >= 0.0) || !std::isfinite(rank_cutoff)) {
    throw Error(ErrorCode::InvalidArgument, "rank cutoff must be finite and >= 0");
  }
  require_finite(features);
  const KernelConfig bound = cfg.bind(static_cast<std::size_t>(features.cols()));

  NystromSketch sketch;
  sketch.kernel = bound;
  sketch.rank_cutoff = rank_cutoff;
  Rng rng(seed);
  sketch.landmark_ids = sample_without_replacement(rng, n, q);
  std::sort(sketch.landmark_ids.begin(), sketch.landmark_ids.end());

  const Eigen::MatrixXd k_nq = cross_kernel(bound, features, sketch.landmark_ids);
  Eigen::MatrixXd w(q, q);
  for (std::size_t a = 0; a < q; ++a) w.row(a) = k_nq.row(sketch.landmark_ids[a]);
  w = 0.5 * (w + w.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateLandmarks, "landmark Gram eigendecomposition failed");
  }
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  // Eigenvalues within rounding distance of zero carry no signal; drop them
  // even when the caller asks for a zero cutoff.
  const double floor_rel = std::max(
      rank_cutoff, static_cast<double>(q) * std::numeric_limits<double>::epsilon());
  const double threshold = floor_rel * lambda_max;

  std::vector<Eigen::Index> kept;
  if (lambda_max > 0.0) {
    for (Eigen::Index k = lambda.size() - 1; k >= 0; --k) {
      if (lambda(k) > 0.0 && lambda(k) >= threshold) kept.push_back(k);
    }
  }
  if (kept.empty()) {
    throw Error(ErrorCode::DegenerateLandmarks,
                "all landmark Gram eigenvalues fall below the rank cutoff");
  }

  Eigen::MatrixXd inv_sqrt(q, kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c) {
    inv_sqrt.col(c) = eig.eigenvectors().col(kept[c]) / std::sqrt(lambda(kept[c]));
  }
  sketch.embedding = k_nq * inv_sqrt;

  double err = 0.0;
  for (std::size_t a = 0; a < q; ++a) {
    const auto ia = sketch.landmark_ids[a];
    for (std::size_t b = a; b < q; ++b) {
      const auto ib = sketch.landmark_ids[b];
      const double approx = sketch.embedding.row(ia).dot(sketch.embedding.row(ib));
      err = std::max(err, std::abs(approx - w(a, b)));
    }
  }
  sketch.reconstruction_error = err;
  return sketch;
}

KernelSource KernelSource::exact(const KernelConfig& cfg,
                                 const FeatureMatrix& features,
                                 std::size_t budget_bytes) {
  return from_gram(gram_matrix(cfg, features, budget_bytes),
                   cfg.bind(static_cast<std::size_t>(features.cols())));
}

KernelSource KernelSource::from_gram(Eigen::MatrixXd gram, const KernelConfig& cfg) {
  if (gram.rows() != gram.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "Gram matrix must be square");
  }
  KernelSource src;
  src.n_ = static_cast<std::size_t>(gram.rows());
  src.kernel_ = cfg;
  src.diag_.resize(src.n_);
  for (std::size_t i = 0; i < src.n_; ++i) src.diag_[i] = gram(i, i);
  src.gram_ = std::make_shared<const Eigen::MatrixXd>(std::move(gram));
  return src;
}

KernelSource KernelSource::from_sketch(NystromSketch sketch) {
  KernelSource src;
  src.n_ = static_cast<std::size_t>(sketch.embedding.rows());
  src.kernel_ = sketch.kernel;
  src.diag_.resize(src.n_);
  for (std::size_t i = 0; i < src.n_; ++i) {
    src.diag_[i] = sketch.embedding.row(i).squaredNorm();
  }
  src.sketch_ = std::make_shared<const NystromSketch>(std::move(sketch));
  return src;
}

double KernelSource::entry(std::size_t i, std::size_t j) const {
  if (gram_) return (*gram_)(i, j);
  return sketch_->embedding.row(i).dot(sketch_->embedding.row(j));
}

Eigen::MatrixXd KernelSource::cluster_sums(std::span<const std::size_t> cluster_of,
                                           std::size_t clusters) const {
  if (cluster_of.size() != n_) {
    throw Error(ErrorCode::LengthMismatch, "cluster labels do not match sample count");
  }
  for (auto c : cluster_of) {
    if (c >= clusters) throw Error(ErrorCode::InvalidArgument, "cluster label out of range");
  }
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_, clusters);
  if (gram_) {
    const Eigen::MatrixXd& k = *gram_;
    parallel_for(0, n_, [&](std::size_t i) {
      // Gram is symmetric; column i is contiguous in column-major storage.
      const double* col = k.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) sums(i, cluster_of[j]) += col[j];
    });
    return sums;
  }
  const Eigen::MatrixXd& z = sketch_->embedding;
  Eigen::MatrixXd centroid_sums = Eigen::MatrixXd::Zero(clusters, z.cols());
  for (std::size_t j = 0; j < n_; ++j) centroid_sums.row(cluster_of[j]) += z.row(j);
  parallel_for(0, n_, [&](std::size_t i) {
    for (std::size_t c = 0; c < clusters; ++c) {
      sums(i, c) = z.row(i).dot(centroid_sums.row(c));
    }
  });
  return sums;
}

}  // namespace wcsplit
