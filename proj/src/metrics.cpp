#include "bayesnam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bayesnam {

double auc(const Vec& scores, const Vec& labels) {
  const Index n = scores.size();
  if (n != labels.size()) throw std::invalid_argument("auc: size mismatch");
  if (n == 0) throw std::invalid_argument("auc: empty input");
  Index n_pos = 0;
  for (Index i = 0; i < n; ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0)
      throw std::invalid_argument("auc: labels must be in {0, 1}");
    if (labels(i) == 1.0) ++n_pos;
  }
  const Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auc: undefined with a single class");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return scores(a) < scores(b); });

  // Average ranks over tie groups, then sum the ranks of the positives.
  double rank_sum_pos = 0.0;
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && scores(order[j + 1]) == scores(order[i])) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
    for (Index t = i; t <= j; ++t)
      if (labels(order[t]) == 1.0) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double rmse(const Vec& preds, const Vec& targets) {
  if (preds.size() != targets.size()) throw std::invalid_argument("rmse: size mismatch");
  if (preds.size() == 0) throw std::invalid_argument("rmse: empty input");
  return std::sqrt((preds - targets).squaredNorm() / static_cast<double>(preds.size()));
}

double accuracy(const Vec& scores, const Vec& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("accuracy: size mismatch");
  if (scores.size() == 0) throw std::invalid_argument("accuracy: empty input");
  Index hits = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    const double pred = scores(i) > 0.5 ? 1.0 : 0.0;
    if (pred == labels(i)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace bayesnam
