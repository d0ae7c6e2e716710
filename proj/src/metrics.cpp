#include "retscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "retscreen/common.hpp"

namespace retscreen {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    fail(Errc::shape_mismatch, "scores and labels differ in length");
  const size_t n = scores.size();
  int64_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) fail(Errc::bad_enum, "labels must be 0 or 1");
    n_pos += y;
  }
  const int64_t n_neg = static_cast<int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(Errc::one_class_only, "need both classes for ROC-AUC");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // rank2[i] = twice the average 1-based rank; integral, so the rank-sum form
  // of the Mann-Whitney statistic stays exact under ties
  int64_t rank2_sum_pos = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const int64_t rank2 = static_cast<int64_t>(i) + static_cast<int64_t>(j) + 1;
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank2_sum_pos += rank2;
    }
    i = j;
  }
  const int64_t u2 = rank2_sum_pos - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / static_cast<double>(2 * n_pos * n_neg);
}

double roc_auc(const ScoredSet& set) { return roc_auc(set.scores, set.labels); }

std::pair<double, double> bootstrap_ci(const ScoredSet& set, int n_boot, double level,
                                       uint64_t seed) {
  if (n_boot < 100) fail(Errc::invalid_config, "n_boot must be >= 100");
  if (!(level > 0.0 && level < 1.0)) fail(Errc::invalid_config, "level must be in (0, 1)");
  const size_t n = set.scores.size();
  roc_auc(set);  // validates the set up front

  Rng rng(seed);
  std::vector<double> aucs;
  aucs.reserve(static_cast<size_t>(n_boot));
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (int b = 0; b < n_boot; ++b) {
    while (true) {
      int64_t pos = 0;
      for (size_t k = 0; k < n; ++k) {
        const size_t idx = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(n) - 1));
        scores[k] = set.scores[idx];
        labels[k] = set.labels[idx];
        pos += labels[k];
      }
      if (pos > 0 && pos < static_cast<int64_t>(n)) break;  // redraw one-class resamples
    }
    aucs.push_back(roc_auc(scores, labels));
  }
  std::sort(aucs.begin(), aucs.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(aucs.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, aucs.size() - 1);
    const double frac = pos - std::floor(pos);
    return aucs[lo] * (1.0 - frac) + aucs[hi] * frac;
  };
  const double alpha = 1.0 - level;
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

std::pair<double, double> summarize_seeds(std::span<const double> values) {
  if (values.empty()) fail(Errc::empty_input, "no values to summarize");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

}  // namespace retscreen
