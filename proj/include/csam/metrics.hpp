#pragma once

#include "csam/types.hpp"

namespace csam {

// Fraction of positions where the two {-1,+1} label vectors agree.
double accuracy(const Eigen::Ref<const Vector>& predicted,
                const Eigen::Ref<const Vector>& truth);

// Mean, over the positive examples taken in descending-score order, of the
// precision at each positive's rank. Ties keep their input order (stable
// sort). Errors when there is no positive example.
double average_precision(const Eigen::Ref<const Vector>& scores,
                         const Eigen::Ref<const Vector>& labels);

// sum_x P(x) * log(P(x) / Q(x)) in nats. Both arguments must be
// distributions (non-negative, summing to 1 within 1e-9); zero P entries
// contribute zero; Q must be positive wherever P is positive.
double kl_divergence(const Eigen::Ref<const Vector>& p,
                     const Eigen::Ref<const Vector>& q);

}  // namespace csam
