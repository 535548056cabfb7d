#include "csam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace csam {

namespace {

void check_labels(const Eigen::Ref<const Vector>& labels, const char* what) {
  for (Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw DataError(std::string(what) + " at index " + std::to_string(i) +
                      " is not -1 or +1");
}

}  // namespace

double accuracy(const Eigen::Ref<const Vector>& predicted,
                const Eigen::Ref<const Vector>& truth) {
  if (predicted.size() != truth.size())
    throw DimensionError("predicted and truth lengths differ: " +
                         std::to_string(predicted.size()) + " vs " +
                         std::to_string(truth.size()));
  if (predicted.size() == 0)
    throw DimensionError("accuracy needs at least one example");
  check_labels(predicted, "predicted label");
  check_labels(truth, "truth label");
  Index agree = 0;
  for (Index i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++agree;
  return static_cast<double>(agree) / static_cast<double>(predicted.size());
}

double average_precision(const Eigen::Ref<const Vector>& scores,
                         const Eigen::Ref<const Vector>& labels) {
  if (scores.size() != labels.size())
    throw DimensionError("score and label lengths differ: " +
                         std::to_string(scores.size()) + " vs " +
                         std::to_string(labels.size()));
  if (scores.size() == 0)
    throw DimensionError("average precision needs at least one example");
  if (!scores.allFinite())
    throw DataError("scores contain non-finite values");
  check_labels(labels, "label");

  const Index m = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  // Stable sort: equal scores keep their input order.
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores[a] > scores[b]; });

  Index positives = 0;
  double sum_precision = 0.0;
  for (Index rank = 0; rank < m; ++rank) {
    if (labels[order[static_cast<std::size_t>(rank)]] == 1.0) {
      ++positives;
      sum_precision += static_cast<double>(positives) /
                       static_cast<double>(rank + 1);
    }
  }
  if (positives == 0)
    throw UndefinedMetricError(
        "average precision is undefined without positive examples");
  return sum_precision / static_cast<double>(positives);
}

double kl_divergence(const Eigen::Ref<const Vector>& p,
                     const Eigen::Ref<const Vector>& q) {
  if (p.size() != q.size())
    throw DimensionError("distributions have different support sizes: " +
                         std::to_string(p.size()) + " vs " +
                         std::to_string(q.size()));
  if (p.size() == 0) throw DimensionError("distributions must not be empty");

  double p_total = 0.0;
  double q_total = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i]))
      throw DataError("P has an invalid mass at index " + std::to_string(i));
    if (!(q[i] >= 0.0) || !std::isfinite(q[i]))
      throw DataError("Q has an invalid mass at index " + std::to_string(i));
    p_total += p[i];
    q_total += q[i];
  }
  if (std::abs(p_total - 1.0) > 1e-9)
    throw DataError("P sums to " + std::to_string(p_total) + ", not 1");
  if (std::abs(q_total - 1.0) > 1e-9)
    throw DataError("Q sums to " + std::to_string(q_total) + ", not 1");

  double kl = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;  // 0 * log(0/q) = 0
    if (q[i] == 0.0)
      throw DataError("Q is zero at index " + std::to_string(i) +
                      " where P is positive");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

}  // namespace csam
