#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wcsplit/kernels.hpp"
#include "wcsplit/types.hpp"

namespace wcsplit {

// Features, class labels and optional domain labels of the set being split.
// Sample ids are row indices 0..n-1. Immutable once constructed; copies share
// the feature storage.
class Dataset {
 public:
  Dataset(FeatureMatrix features, std::vector<std::string> labels,
          std::optional<std::vector<std::string>> domains = std::nullopt);

  std::size_t size() const noexcept { return static_cast<std::size_t>(features_->rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_->cols()); }
  const FeatureMatrix& features() const noexcept { return *features_; }
  std::span<const double> row(std::size_t i) const {
    return row_span(*features_, static_cast<Eigen::Index>(i));
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  bool has_domains() const noexcept { return domains_.has_value(); }
  const std::vector<std::string>& domains() const;

  std::vector<std::string> distinct_labels() const;
  std::vector<std::string> distinct_domains() const;

  // Same features, different class labels.
  Dataset relabeled(std::vector<std::string> labels) const;
  // Rows selected by index, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::shared_ptr<const FeatureMatrix> features_;
  std::vector<std::string> labels_;
  std::optional<std::vector<std::string>> domains_;
};

enum class ConstraintMode { LabelOnly, LabelDomain };
std::string_view to_string(ConstraintMode mode) noexcept;

// A constraint group: a class, or a (class, domain) pair.
struct GroupKey {
  std::string label;
  std::optional<std::string> domain;

  // "label" or "label|domain"; used for per-group tolerance files and reports.
  std::string name() const;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
  friend bool operator==(const GroupKey&, const GroupKey&) = default;
};

struct ConstraintSpec {
  double holdout_fraction = 0.2;
  ConstraintMode mode = ConstraintMode::LabelOnly;
  // Relative tolerance applied to groups without an explicit entry.
  // 0 means hard constraints.
  double default_tolerance = 0.0;
  std::map<std::string, double> tolerances;  // keyed by GroupKey::name()

  double tolerance_for(const GroupKey& group) const;
  void validate() const;
  void validate(const Dataset& dataset) const;
};

struct GroupQuota {
  GroupKey group;
  std::size_t total = 0;
  std::size_t val_target = 0;
  std::size_t val_lo = 0;
  std::size_t val_hi = 0;
  double tolerance = 0.0;

  bool hard() const noexcept { return val_lo == val_hi; }
};

// Quotas in canonical group order plus the group index of every sample.
struct QuotaPlan {
  std::vector<GroupQuota> quotas;
  std::vector<std::size_t> group_of;

  std::size_t groups() const noexcept { return quotas.size(); }
  bool hard() const noexcept;
};

// round(x) with ties away from zero. Products like h * |S_g| are nudged by a
// few ulps first so that 0.29 * 50 rounds as the exact 14.5 would.
std::int64_t round_half_away(double x) noexcept;

std::vector<GroupQuota> compute_quotas(const Dataset& dataset, const ConstraintSpec& spec);
QuotaPlan plan_quotas(const Dataset& dataset, const ConstraintSpec& spec);

enum class Side : std::uint8_t { Train, Val };
enum class SplitMethod { ClusterSplit, RandomStratified, LeaveOneDomainOut };
enum class ClusterIndex : std::uint8_t { J1 = 0, J2 = 1 };

std::string_view to_string(SplitMethod method) noexcept;
std::string_view to_string(ClusterIndex cluster) noexcept;

inline ClusterIndex other(ClusterIndex c) noexcept {
  return c == ClusterIndex::J1 ? ClusterIndex::J2 : ClusterIndex::J1;
}

class SplitAssignment {
 public:
  // Throws EmptyValidation / EmptyTraining if either side is empty.
  SplitAssignment(std::vector<Side> membership, SplitMethod method, std::uint64_t seed,
                  std::optional<ClusterIndex> cluster_branch = std::nullopt);

  const std::vector<Side>& membership() const noexcept { return membership_; }
  SplitMethod method() const noexcept { return method_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::optional<ClusterIndex> cluster_branch() const noexcept { return branch_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string warning) { warnings_.push_back(std::move(warning)); }

  std::size_t size() const noexcept { return membership_.size(); }
  std::size_t val_count() const noexcept;
  std::size_t train_count() const noexcept { return size() - val_count(); }
  bool is_val(std::size_t i) const { return membership_[i] == Side::Val; }

  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> val_indices() const;

 private:
  std::vector<Side> membership_;
  SplitMethod method_;
  std::uint64_t seed_;
  std::optional<ClusterIndex> branch_;
  std::vector<std::string> warnings_;
};

struct QuotaAudit {
  GroupQuota quota;
  std::size_t achieved = 0;

  bool satisfied() const noexcept {
    return achieved >= quota.val_lo && achieved <= quota.val_hi;
  }
};

std::vector<QuotaAudit> audit_quotas(const QuotaPlan& plan, std::span<const Side> membership);
bool quotas_satisfied(std::span<const QuotaAudit> audit) noexcept;

struct SplitReport {
  std::vector<double> objective_trace;  // Psi per iteration, non-increasing
  double final_objective = 0.0;
  double final_mmd_squared = 0.0;         // through the Psi identity
  double final_mmd_squared_direct = 0.0;  // direct mean-map estimator
  double final_mmd = 0.0;
  double identity_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<QuotaAudit> quotas;
  KernelConfig kernel;
  std::size_t restart_index = 0;
  std::uint64_t seed = 0;
  bool approximate = false;
  std::optional<std::size_t> nystrom_landmarks;
  std::optional<std::size_t> nystrom_rank;
  std::vector<std::string> notes;
};

}  // namespace wcsplit
