#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retscreen/augment.hpp"
#include "retscreen/model.hpp"

namespace retscreen {

// The K replica predictions for one image. mean/variance are Welford
// accumulations (population variance), so constant replicas give exactly 0.
struct PredictionDistribution {
  std::string image_id;
  std::vector<double> replicas;
  double mean = 0.0;
  double variance = 0.0;
  double proximity = 0.0;  // |mean - 0.5|

  static PredictionDistribution from_replicas(std::string image_id, std::vector<double> replicas);
};

enum class UncertaintyMeasure { variance, proximity };
const char* to_string(UncertaintyMeasure m);
UncertaintyMeasure parse_measure(std::string_view s);

// Samples k augmentation specs from a stream derived from (seed, image_id),
// applies each to the pre-crop tensor, center-crops and forwards. Replica
// order is the sampling order.
PredictionDistribution tta_predict(const Model& model, const ImageTensor& pre_crop,
                                   const std::string& image_id, int k,
                                   const AugmentParams& params, uint64_t seed);

// Both measures are oriented so that higher = more uncertain:
// VARIANCE -> variance, PROXIMITY -> 0.5 - |mean - 0.5|.
double uncertainty_score(const PredictionDistribution& dist, UncertaintyMeasure measure);

struct ReferralPoint {
  double fraction = 0.0;
  size_t retained_n = 0;
  std::optional<double> auc;  // empty when the retained set lacks a class
};

struct ReferralCurve {
  UncertaintyMeasure measure = UncertaintyMeasure::variance;
  std::vector<ReferralPoint> points;
};

// Row form used by the referral computation; uncertainty is a
// higher-is-more-uncertain score.
struct ReferralItem {
  std::string image_id;
  int label = 0;
  double mean = 0.0;
  double uncertainty = 0.0;
};

// For each fraction q, refers the ceil(q*N) items with the highest
// uncertainty (ties broken by image_id, ascending) and recomputes AUC of the
// means over the retained items.
ReferralCurve referral_curve(std::vector<ReferralItem> items, std::span<const double> fractions,
                             UncertaintyMeasure measure);
ReferralCurve referral_curve(std::span<const PredictionDistribution> dists,
                             std::span<const int> labels, std::span<const double> fractions,
                             UncertaintyMeasure measure);

}  // namespace retscreen
