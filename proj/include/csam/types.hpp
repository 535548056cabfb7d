#pragma once

#include <Eigen/Core>

#include "csam/errors.hpp"

namespace csam {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Norm used for the per-feature coefficient blocks in the sparsity penalty.
enum class PenaltyNorm : int { l1 = 1, l2 = 2 };

inline PenaltyNorm penalty_norm_from_int(int q) {
  if (q == 1) return PenaltyNorm::l1;
  if (q == 2) return PenaltyNorm::l2;
  throw ConfigError("q must be 1 or 2, got " + std::to_string(q));
}

// A binary-classification sample: n rows of p raw features plus labels
// restricted to {-1, +1}.
struct FeatureMatrix {
  Matrix values;  // n x p
  Vector labels;  // n, entries exactly -1.0 or +1.0

  Index n() const { return values.rows(); }
  Index p() const { return values.cols(); }

  void validate() const {
    if (values.rows() < 1 || values.cols() < 1)
      throw DataError("feature matrix must have at least one row and column");
    if (labels.size() != values.rows())
      throw DimensionError("label count " + std::to_string(labels.size()) +
                           " does not match row count " +
                           std::to_string(values.rows()));
    if (!values.allFinite())
      throw DataError("feature matrix contains non-finite values");
    for (Index i = 0; i < labels.size(); ++i) {
      if (labels[i] != 1.0 && labels[i] != -1.0)
        throw DataError("label at row " + std::to_string(i) +
                        " is not -1 or +1");
    }
  }
};

}  // namespace csam
