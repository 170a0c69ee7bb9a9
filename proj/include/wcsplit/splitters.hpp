#pragma once

#include <cstdint>
#include <string>

#include "wcsplit/core_model.hpp"

namespace wcsplit {

// Stratified random split: each group (per the constraint mode) sends exactly
// val_target uniformly chosen members to validation. Tolerances are ignored.
SplitAssignment random_stratified(const Dataset& dataset, const ConstraintSpec& spec,
                                  std::uint64_t seed);

// Validation is every sample of `holdout_domain`. A class that only occurs in
// the held-out domain is reported through a warning on the assignment.
SplitAssignment leave_one_domain_out(const Dataset& dataset, const std::string& holdout_domain);

}  // namespace wcsplit
