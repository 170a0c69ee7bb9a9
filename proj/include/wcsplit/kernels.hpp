#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "wcsplit/types.hpp"

namespace wcsplit {

enum class KernelFamily { Rbf, Linear };
enum class GammaMode { Fixed, InverseDim };

std::string_view to_string(KernelFamily family) noexcept;
std::string_view to_string(GammaMode mode) noexcept;

// RBF: exp(-gamma * |x - y|^2). Linear: x . y.
// With GammaMode::InverseDim the bandwidth is 1 / dimension, resolved when
// the kernel is bound to data of a known dimension.
struct KernelConfig {
  KernelFamily family = KernelFamily::Rbf;
  double gamma = 1.0;
  GammaMode gamma_mode = GammaMode::Fixed;

  void validate() const;
  double effective_gamma(std::size_t dim) const;
  // Copy with gamma resolved for `dim` and gamma_mode set to Fixed.
  KernelConfig bind(std::size_t dim) const;

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

inline constexpr std::size_t kDefaultGramBudgetBytes = std::size_t{2} << 30;
inline constexpr double kDefaultRankCutoff = 1e-12;
inline constexpr std::size_t kDefaultNystromLandmarks = 2000;

double kernel_eval(const KernelConfig& cfg, std::span<const double> x,
                   std::span<const double> y);

namespace detail {
// No validation; `bound` must come from KernelConfig::bind.
double kernel_eval_bound(const KernelConfig& bound, std::span<const double> x,
                         std::span<const double> y) noexcept;
}  // namespace detail

// Throws BudgetExceeded when n*n doubles exceed budget_bytes.
Eigen::MatrixXd gram_matrix(const KernelConfig& cfg,
                            const FeatureMatrix& features,
                            std::size_t budget_bytes = kDefaultGramBudgetBytes);

bool gram_fits(std::size_t n, std::size_t budget_bytes) noexcept;

struct NystromSketch {
  std::vector<std::size_t> landmark_ids;  // sorted ascending
  Eigen::MatrixXd embedding;              // n x r, r <= q
  double rank_cutoff = kDefaultRankCutoff;
  // max |<z_i, z_j> - k(x_i, x_j)| over landmark pairs
  double reconstruction_error = 0.0;
  KernelConfig kernel;

  std::size_t landmarks() const { return landmark_ids.size(); }
  std::size_t rank() const { return static_cast<std::size_t>(embedding.cols()); }
};

// Column-sampling Nystrom: embedding = K(n, q) * W^{-1/2}, where W is the
// landmark Gram and eigenvalues below rank_cutoff * lambda_max are dropped.
NystromSketch nystrom_embed(const KernelConfig& cfg,
                            const FeatureMatrix& features, std::size_t q,
                            double rank_cutoff, std::uint64_t seed);

// Kernel values over a fixed sample set, backed either by the exact Gram
// matrix or by a Nystrom embedding. This is what the clustering loop and the
// split-level MMD computations consume.
class KernelSource {
 public:
  static KernelSource exact(const KernelConfig& cfg,
                            const FeatureMatrix& features,
                            std::size_t budget_bytes = kDefaultGramBudgetBytes);
  static KernelSource from_gram(Eigen::MatrixXd gram, const KernelConfig& cfg);
  static KernelSource from_sketch(NystromSketch sketch);

  std::size_t size() const noexcept { return n_; }
  bool approximate() const noexcept { return sketch_ != nullptr; }
  const KernelConfig& kernel() const noexcept { return kernel_; }
  const NystromSketch* sketch() const noexcept { return sketch_.get(); }

  double diag(std::size_t i) const { return diag_[i]; }
  std::span<const double> diagonal() const { return diag_; }
  double entry(std::size_t i, std::size_t j) const;

  // sums(i, c) = sum over j with cluster_of[j] == c of k(x_i, x_j).
  Eigen::MatrixXd cluster_sums(std::span<const std::size_t> cluster_of,
                               std::size_t clusters) const;

 private:
  KernelSource() = default;

  std::size_t n_ = 0;
  KernelConfig kernel_;
  std::vector<double> diag_;
  std::shared_ptr<const Eigen::MatrixXd> gram_;
  std::shared_ptr<const NystromSketch> sketch_;
};

}  // namespace wcsplit
