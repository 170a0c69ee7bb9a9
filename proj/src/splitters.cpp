#include "wcsplit/splitters.hpp"

#include <algorithm>
#include <set>

#include "wcsplit/cluster.hpp"
#include "wcsplit/errors.hpp"

namespace wcsplit {

SplitAssignment random_stratified(const Dataset& dataset, const ConstraintSpec& spec,
                                  std::uint64_t seed) {
  ConstraintSpec hard = spec;
  hard.default_tolerance = 0.0;
  hard.tolerances.clear();
  const QuotaPlan plan = plan_quotas(dataset, hard);
  const SplitAssignment drawn = init_assignment(dataset, plan, seed);
  return SplitAssignment(drawn.membership(), SplitMethod::RandomStratified, seed);
}

SplitAssignment leave_one_domain_out(const Dataset& dataset, const std::string& holdout_domain) {
  if (!dataset.has_domains()) {
    throw Error(ErrorCode::MissingDomains, "leave-one-domain-out needs domain labels");
  }
  const auto distinct = dataset.distinct_domains();
  if (std::find(distinct.begin(), distinct.end(), holdout_domain) == distinct.end()) {
    throw Error(ErrorCode::UnknownDomain, "unknown domain '" + holdout_domain + "'");
  }
  if (distinct.size() < 2) {
    throw Error(ErrorCode::SingleDomainDataset,
                "leave-one-domain-out needs at least two domains");
  }

  const auto& domains = dataset.domains();
  std::vector<Side> membership(dataset.size(), Side::Train);
  std::set<std::string> train_classes;
  std::set<std::string> val_classes;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (domains[i] == holdout_domain) {
      membership[i] = Side::Val;
      val_classes.insert(dataset.labels()[i]);
    } else {
      train_classes.insert(dataset.labels()[i]);
    }
  }
  SplitAssignment split(std::move(membership), SplitMethod::LeaveOneDomainOut, 0);
  for (const auto& label : val_classes) {
    if (!train_classes.contains(label)) {
      split.add_warning("class coverage broken: class '" + label +
                        "' appears only in held-out domain '" + holdout_domain + "'");
    }
  }
  return split;
}

}  // namespace wcsplit
