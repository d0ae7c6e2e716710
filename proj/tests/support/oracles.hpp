#pragma once

// Independent test oracles. Everything here recomputes expectations from
// first principles and must stay decoupled from the library code paths it
// checks.

#include <cstdint>
#include <span>
#include <vector>

#include "retscreen/common.hpp"
#include "retscreen/model.hpp"

namespace retscreen::testing {

// O(n^2) pair enumeration, ties worth half. Numerator kept in half-pair
// units so the division matches the rank-based implementation bit for bit.
inline double brute_force_auc(std::span<const double> scores, std::span<const int> labels) {
  int64_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg)++;
  int64_t num2 = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j])
        num2 += 2;
      else if (scores[i] == scores[j])
        num2 += 1;
    }
  }
  return static_cast<double>(num2) / static_cast<double>(2 * n_pos * n_neg);
}

// std of AUC under label permutation, estimated by shuffling labels against
// fixed distinct scores
inline double permutation_null_std(size_t n_pos, size_t n_neg, int n_perm, uint64_t seed) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (size_t i = 0; i < n_pos + n_neg; ++i) {
    scores.push_back(static_cast<double>(i));
    labels.push_back(i < n_pos ? 1 : 0);
  }
  Rng rng(seed);
  double sum = 0.0, sq = 0.0;
  for (int p = 0; p < n_perm; ++p) {
    rng.shuffle(labels);
    const double auc = brute_force_auc(scores, labels);
    sum += auc;
    sq += auc * auc;
  }
  const double mean = sum / n_perm;
  return std::sqrt(std::max(0.0, sq / n_perm - mean * mean));
}

inline double total_loss(const Model& model, const std::vector<ImageTensor>& batch,
                         const Targets& targets, double lambda_bio, double l2) {
  const Outputs out = forward(model, batch, 1);
  return loss(model, out, targets, lambda_bio, l2).total;
}

// central finite difference of the total loss wrt one parameter element
inline double fd_gradient(Model& model, Tensor& tensor, size_t index,
                          const std::vector<ImageTensor>& batch, const Targets& targets,
                          double lambda_bio, double l2, double h = 1e-4) {
  const double original = tensor.v[index];
  tensor.v[index] = original + h;
  const double up = total_loss(model, batch, targets, lambda_bio, l2);
  tensor.v[index] = original - h;
  const double down = total_loss(model, batch, targets, lambda_bio, l2);
  tensor.v[index] = original;
  return (up - down) / (2.0 * h);
}

}  // namespace retscreen::testing
