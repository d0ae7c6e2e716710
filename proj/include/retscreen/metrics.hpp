#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace retscreen {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // aligned, each 0 or 1
};

// Mann-Whitney AUC: fraction of (positive, negative) pairs with
// score_pos > score_neg, ties counted 0.5. Computed via rank sums kept in
// integer doubled-rank form, so it equals the pair-count definition exactly.
double roc_auc(std::span<const double> scores, std::span<const int> labels);
double roc_auc(const ScoredSet& set);

// Percentile bootstrap over resampled (score, label) pairs; resamples lacking
// a class are redrawn. Quantiles by linear interpolation.
std::pair<double, double> bootstrap_ci(const ScoredSet& set, int n_boot, double level,
                                       uint64_t seed);

// (mean, sample std). Sample std divides by n-1 and is 0 for a single value.
std::pair<double, double> summarize_seeds(std::span<const double> values);

}  // namespace retscreen
