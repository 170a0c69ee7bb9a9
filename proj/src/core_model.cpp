#include "wcsplit/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "wcsplit/errors.hpp"

namespace wcsplit {
namespace {

std::vector<std::string> sorted_unique(const std::vector<std::string>& values) {
  std::set<std::string> uniq(values.begin(), values.end());
  return {uniq.begin(), uniq.end()};
}

}  // namespace

Dataset::Dataset(FeatureMatrix features, std::vector<std::string> labels,
                 std::optional<std::vector<std::string>> domains)
    : labels_(std::move(labels)), domains_(std::move(domains)) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no samples");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "dataset needs at least 2 samples");
  if (features.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "dataset needs at least one feature column");
  }
  if (labels_.size() != n) {
    throw Error(ErrorCode::LengthMismatch,
                "labels: expected " + std::to_string(n) + " entries, got " +
                    std::to_string(labels_.size()));
  }
  if (domains_ && domains_->size() != n) {
    throw Error(ErrorCode::LengthMismatch,
                "domains: expected " + std::to_string(n) + " entries, got " +
                    std::to_string(domains_->size()));
  }
  if (!features.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, "features contain non-finite values");
  }
  features_ = std::make_shared<const FeatureMatrix>(std::move(features));
}

const std::vector<std::string>& Dataset::domains() const {
  if (!domains_) throw Error(ErrorCode::MissingDomains, "dataset has no domain labels");
  return *domains_;
}

std::vector<std::string> Dataset::distinct_labels() const { return sorted_unique(labels_); }

std::vector<std::string> Dataset::distinct_domains() const {
  return sorted_unique(domains());
}

Dataset Dataset::relabeled(std::vector<std::string> labels) const {
  if (labels.size() != size()) {
    throw Error(ErrorCode::LengthMismatch, "relabel: label count differs from sample count");
  }
  Dataset copy = *this;
  copy.labels_ = std::move(labels);
  return copy;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  FeatureMatrix sub(static_cast<Eigen::Index>(rows.size()), features_->cols());
  std::vector<std::string> labels;
  std::optional<std::vector<std::string>> domains;
  if (domains_) domains.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= size()) throw Error(ErrorCode::InvalidArgument, "subset row out of range");
    sub.row(static_cast<Eigen::Index>(r)) = features_->row(static_cast<Eigen::Index>(rows[r]));
    labels.push_back(labels_[rows[r]]);
    if (domains_) domains->push_back((*domains_)[rows[r]]);
  }
  return Dataset(std::move(sub), std::move(labels), std::move(domains));
}

std::string_view to_string(ConstraintMode mode) noexcept {
  return mode == ConstraintMode::LabelOnly ? "label" : "label-domain";
}

std::string GroupKey::name() const {
  return domain ? label + "|" + *domain : label;
}

double ConstraintSpec::tolerance_for(const GroupKey& group) const {
  auto it = tolerances.find(group.name());
  return it == tolerances.end() ? default_tolerance : it->second;
}

void ConstraintSpec::validate() const {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "holdout fraction must lie strictly between 0 and 1, got " +
                    std::to_string(holdout_fraction));
  }
  if (!(default_tolerance >= 0.0) || !std::isfinite(default_tolerance)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be finite and >= 0");
  }
  for (const auto& [group, tol] : tolerances) {
    if (!(tol >= 0.0) || !std::isfinite(tol)) {
      throw Error(ErrorCode::InvalidArgument,
                  "tolerance for group '" + group + "' must be finite and >= 0");
    }
  }
}

void ConstraintSpec::validate(const Dataset& dataset) const {
  validate();
  if (mode == ConstraintMode::LabelDomain && !dataset.has_domains()) {
    throw Error(ErrorCode::MissingDomains,
                "label-domain constraints require domain labels");
  }
}

bool QuotaPlan::hard() const noexcept {
  return std::all_of(quotas.begin(), quotas.end(),
                     [](const GroupQuota& q) { return q.hard(); });
}

std::int64_t round_half_away(double x) noexcept {
  const double mag = std::abs(x);
  const double nudged = mag + 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, mag);
  const auto r = static_cast<std::int64_t>(std::floor(nudged + 0.5));
  return x < 0.0 ? -r : r;
}

QuotaPlan plan_quotas(const Dataset& dataset, const ConstraintSpec& spec) {
  spec.validate(dataset);
  const std::size_t n = dataset.size();
  const bool with_domain = spec.mode == ConstraintMode::LabelDomain;

  std::map<GroupKey, std::size_t> counts;
  std::vector<GroupKey> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i].label = dataset.labels()[i];
    if (with_domain) keys[i].domain = dataset.domains()[i];
    ++counts[keys[i]];
  }

  QuotaPlan plan;
  std::map<GroupKey, std::size_t> index;
  const double h = spec.holdout_fraction;
  for (const auto& [key, total] : counts) {
    GroupQuota q;
    q.group = key;
    q.total = total;
    q.tolerance = spec.tolerance_for(key);
    const auto size = static_cast<double>(total);
    const auto clamp_count = [total](std::int64_t v) {
      return static_cast<std::size_t>(std::clamp<std::int64_t>(v, 0, static_cast<std::int64_t>(total)));
    };
    q.val_target = clamp_count(round_half_away(h * size));
    q.val_lo = std::min(q.val_target, clamp_count(round_half_away(h * (1.0 - q.tolerance) * size)));
    q.val_hi = std::max(q.val_target, clamp_count(round_half_away(h * (1.0 + q.tolerance) * size)));
    if (q.tolerance == 0.0) q.val_lo = q.val_hi = q.val_target;
    index[key] = plan.quotas.size();
    plan.quotas.push_back(std::move(q));
  }
  plan.group_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) plan.group_of[i] = index.at(keys[i]);

  std::size_t max_val = 0;
  std::size_t max_train = 0;
  for (const auto& q : plan.quotas) {
    max_val += q.val_hi;
    max_train += q.total - q.val_lo;
  }
  if (max_val == 0) {
    throw Error(ErrorCode::EmptyValidation,
                "every group has a validation quota of zero; increase the holdout fraction");
  }
  if (max_train == 0) {
    throw Error(ErrorCode::EmptyTraining,
                "every sample is forced into validation; decrease the holdout fraction");
  }
  return plan;
}

std::vector<GroupQuota> compute_quotas(const Dataset& dataset, const ConstraintSpec& spec) {
  return plan_quotas(dataset, spec).quotas;
}

std::string_view to_string(SplitMethod method) noexcept {
  switch (method) {
    case SplitMethod::ClusterSplit: return "cluster";
    case SplitMethod::RandomStratified: return "random";
    case SplitMethod::LeaveOneDomainOut: return "lodo";
  }
  return "unknown";
}

std::string_view to_string(ClusterIndex cluster) noexcept {
  return cluster == ClusterIndex::J1 ? "J1" : "J2";
}

SplitAssignment::SplitAssignment(std::vector<Side> membership, SplitMethod method,
                                 std::uint64_t seed, std::optional<ClusterIndex> cluster_branch)
    : membership_(std::move(membership)), method_(method), seed_(seed), branch_(cluster_branch) {
  const std::size_t val = val_count();
  if (val == 0) throw Error(ErrorCode::EmptyValidation, "split has an empty validation set");
  if (val == membership_.size()) {
    throw Error(ErrorCode::EmptyTraining, "split has an empty training set");
  }
}

std::size_t SplitAssignment::val_count() const noexcept {
  return static_cast<std::size_t>(std::count(membership_.begin(), membership_.end(), Side::Val));
}

std::vector<std::size_t> SplitAssignment::train_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < membership_.size(); ++i) {
    if (membership_[i] == Side::Train) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitAssignment::val_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < membership_.size(); ++i) {
    if (membership_[i] == Side::Val) out.push_back(i);
  }
  return out;
}

std::vector<QuotaAudit> audit_quotas(const QuotaPlan& plan, std::span<const Side> membership) {
  if (membership.size() != plan.group_of.size()) {
    throw Error(ErrorCode::LengthMismatch, "membership length differs from quota plan");
  }
  std::vector<QuotaAudit> audit;
  audit.reserve(plan.quotas.size());
  for (const auto& q : plan.quotas) audit.push_back({q, 0});
  for (std::size_t i = 0; i < membership.size(); ++i) {
    if (membership[i] == Side::Val) ++audit[plan.group_of[i]].achieved;
  }
  return audit;
}

bool quotas_satisfied(std::span<const QuotaAudit> audit) noexcept {
  return std::all_of(audit.begin(), audit.end(),
                     [](const QuotaAudit& a) { return a.satisfied(); });
}

}  // namespace wcsplit
