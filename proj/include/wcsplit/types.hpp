#pragma once

#include <Eigen/Dense>

#include <span>

namespace wcsplit {

// One sample per row. Row-major so each sample is a contiguous span.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const FeatureMatrix& m,
                                        Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace wcsplit
