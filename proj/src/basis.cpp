#include "csam/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace csam {

void BasisConfig::validate() const {
  if (dimension < 1)
    throw ConfigError("basis dimension must be at least 1, got " +
                      std::to_string(dimension));
  if (family == BasisFamily::bspline) {
    if (spline_order < 1)
      throw ConfigError("spline order must be at least 1, got " +
                        std::to_string(spline_order));
    if (dimension < spline_order)
      throw ConfigError("basis dimension " + std::to_string(dimension) +
                        " must be at least the spline order " +
                        std::to_string(spline_order));
  }
}

NormalizationStats fit_normalizer(const Eigen::Ref<const Matrix>& X) {
  if (X.rows() < 1 || X.cols() < 1)
    throw DataError("cannot fit normalizer on an empty matrix");
  if (!X.allFinite())
    throw DataError("cannot fit normalizer: input contains non-finite values");
  NormalizationStats stats;
  stats.min = X.colwise().minCoeff();
  stats.max = X.colwise().maxCoeff();
  return stats;
}

double normalize_value(double x, double min, double max) {
  if (min == max) return 0.5;
  if (x <= min) return 0.0;
  if (x >= max) return 1.0;
  return (x - min) / (max - min);
}

Matrix apply_normalizer(const Eigen::Ref<const Matrix>& X,
                        const NormalizationStats& stats) {
  if (X.cols() != stats.num_features())
    throw DimensionError("normalizer was fit on " +
                         std::to_string(stats.num_features()) +
                         " features but input has " + std::to_string(X.cols()));
  Matrix out(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j)
    for (Index i = 0; i < X.rows(); ++i)
      out(i, j) = normalize_value(X(i, j), stats.min[j], stats.max[j]);
  return out;
}

namespace {

// All d clamped-uniform-knot B-spline values at x via the Cox-de Boor
// recursion. Knots: `order` copies of 0, d-order uniform interior knots,
// `order` copies of 1. Only `order` entries are nonzero; they sum to 1.
Vector bspline_eval(Index d, Index order, double x) {
  const Index segments = d - order + 1;  // interior spans
  auto knot = [&](Index i) -> double {
    if (i < order) return 0.0;
    if (i >= d) return 1.0;
    return static_cast<double>(i - order + 1) / static_cast<double>(segments);
  };

  // Span s: largest index with knot(s) <= x < knot(s+1); x == 1 uses the
  // final span so the right endpoint is handled exactly.
  Index span;
  if (x >= 1.0) {
    span = d - 1;
  } else {
    span = order - 1 +
           static_cast<Index>(std::floor(x * static_cast<double>(segments)));
    if (span > d - 1) span = d - 1;
    while (span > order - 1 && x < knot(span)) --span;
    while (span < d - 1 && x >= knot(span + 1)) ++span;
  }

  Vector left(order), right(order), vals(order);
  vals[0] = 1.0;
  for (Index j = 1; j < order; ++j) {
    left[j] = x - knot(span + 1 - j);
    right[j] = knot(span + j) - x;
    double saved = 0.0;
    for (Index r = 0; r < j; ++r) {
      const double tmp = vals[r] / (right[r + 1] + left[j - r]);
      vals[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    vals[j] = saved;
  }

  Vector out = Vector::Zero(d);
  out.segment(span - order + 1, order) = vals;
  return out;
}

// 1, sqrt(2)cos(2*pi*x), sqrt(2)sin(2*pi*x), sqrt(2)cos(4*pi*x), ...
// Pairwise orthonormal in L2([0,1]) at any truncation length.
Vector trig_eval(Index d, double x) {
  Vector out(d);
  out[0] = 1.0;
  for (Index k = 1; k < d; ++k) {
    const auto m = static_cast<double>((k + 1) / 2);
    const double arg = 2.0 * std::numbers::pi * m * x;
    out[k] = std::numbers::sqrt2 * (k % 2 == 1 ? std::cos(arg) : std::sin(arg));
  }
  return out;
}

}  // namespace

Vector basis_eval(const BasisConfig& config, double x) {
  config.validate();
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("basis argument " + std::to_string(x) +
                      " is outside [0, 1]; normalize inputs first");
  return config.family == BasisFamily::bspline
             ? bspline_eval(config.dimension, config.spline_order, x)
             : trig_eval(config.dimension, x);
}

DesignMatrix expand(const Eigen::Ref<const Matrix>& Xnorm,
                    const BasisConfig& config) {
  config.validate();
  const Index n = Xnorm.rows();
  const Index p = Xnorm.cols();
  const Index d = config.dimension;
  if (n < 1 || p < 1)
    throw DataError("cannot expand an empty matrix");

  DesignMatrix design;
  design.basis = config;
  design.num_features = p;
  design.phi.resize(n, d * p);
  const bool spline = config.family == BasisFamily::bspline;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double x = Xnorm(i, j);
      if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("normalized value " + std::to_string(x) + " at row " +
                          std::to_string(i) + ", feature " + std::to_string(j) +
                          " is outside [0, 1]");
      design.phi.block(i, j * d, 1, d) =
          (spline ? bspline_eval(d, config.spline_order, x) : trig_eval(d, x))
              .transpose();
    }
  }
  return design;
}

}  // namespace csam
