#pragma once

#include <Eigen/Core>

#include "csam/types.hpp"

namespace csam {

enum class BasisFamily { bspline, trig };

// Configuration of the shared per-feature function basis on [0, 1].
struct BasisConfig {
  BasisFamily family = BasisFamily::bspline;
  Index dimension = 8;     // functions per feature (d)
  Index spline_order = 4;  // bspline only; 4 = cubic

  void validate() const;
};

// Per-feature min/max frozen at fit time. Columns with min == max are
// constant; apply_normalizer maps them to the midpoint 0.5.
struct NormalizationStats {
  Vector min;
  Vector max;

  Index num_features() const { return min.size(); }
  bool is_constant(Index j) const { return min[j] == max[j]; }
};

// Column-wise ranges of X. Errors on empty or non-finite input.
NormalizationStats fit_normalizer(const Eigen::Ref<const Matrix>& X);

// Scalar min-max rule: (x - min) / (max - min), clamped to [0, 1];
// constant columns map to 0.5 regardless of x.
double normalize_value(double x, double min, double max);

// Applies the frozen stats column by column; never refits.
Matrix apply_normalizer(const Eigen::Ref<const Matrix>& X,
                        const NormalizationStats& stats);

// Values of all basis functions at one normalized coordinate x in [0, 1].
// bspline: clamped uniform knots, Cox-de Boor recursion, partition of unity.
// trig: 1, then sqrt(2)*cos(2*pi*m*x) / sqrt(2)*sin(2*pi*m*x) interleaved;
// orthonormal in L2([0,1]).
Vector basis_eval(const BasisConfig& config, double x);

// Row-wise basis expansion of a normalized feature matrix. Columns are laid
// out feature-major: block j occupies columns [j*d, (j+1)*d).
struct DesignMatrix {
  Matrix phi;  // n x (d*p)
  BasisConfig basis;
  Index num_features = 0;  // p

  Index n() const { return phi.rows(); }
  Index block_size() const { return basis.dimension; }
  auto block(Index j) const {
    return phi.middleCols(j * basis.dimension, basis.dimension);
  }
};

DesignMatrix expand(const Eigen::Ref<const Matrix>& Xnorm,
                    const BasisConfig& config);

}  // namespace csam
