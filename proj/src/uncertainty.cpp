#include "retscreen/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "retscreen/metrics.hpp"
#include "retscreen/preprocess.hpp"

namespace retscreen {

PredictionDistribution PredictionDistribution::from_replicas(std::string image_id,
                                                             std::vector<double> replicas) {
  if (replicas.empty()) fail(Errc::empty_input, "prediction distribution needs >= 1 replica");
  PredictionDistribution dist;
  dist.image_id = std::move(image_id);
  dist.replicas = std::move(replicas);
  // Welford; constant replica sets come out with variance exactly 0
  double mean = 0.0, m2 = 0.0;
  size_t n = 0;
  for (double x : dist.replicas) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  dist.mean = mean;
  dist.variance = m2 / static_cast<double>(n);  // population variance
  dist.proximity = std::abs(mean - 0.5);
  return dist;
}

const char* to_string(UncertaintyMeasure m) {
  return m == UncertaintyMeasure::variance ? "variance" : "proximity";
}

UncertaintyMeasure parse_measure(std::string_view s) {
  if (s == "variance") return UncertaintyMeasure::variance;
  if (s == "proximity") return UncertaintyMeasure::proximity;
  fail(Errc::bad_enum, "unknown uncertainty measure '" + std::string(s) + "'");
}

PredictionDistribution tta_predict(const Model& model, const ImageTensor& pre_crop,
                                   const std::string& image_id, int k,
                                   const AugmentParams& params, uint64_t seed) {
  if (k < 1) fail(Errc::invalid_config, "tta replica count must be >= 1");
  if (!model.params.has_t2d()) fail(Errc::mode_mismatch, "tta_predict needs a t2d head");
  Rng rng(hash_combine(seed, fnv1a64(image_id)));
  std::vector<double> replicas;
  replicas.reserve(static_cast<size_t>(k));
  for (int r = 0; r < k; ++r) {
    const AugmentationSpec spec = sample_augmentation(params, rng);
    const std::vector<ImageTensor> one{
        center_crop(apply_augmentation(pre_crop, spec), model.config.input_size)};
    replicas.push_back(forward(model, one, 1).t2d_prob[0]);
  }
  return PredictionDistribution::from_replicas(image_id, std::move(replicas));
}

double uncertainty_score(const PredictionDistribution& dist, UncertaintyMeasure measure) {
  return measure == UncertaintyMeasure::variance ? dist.variance : 0.5 - dist.proximity;
}

ReferralCurve referral_curve(std::vector<ReferralItem> items, std::span<const double> fractions,
                             UncertaintyMeasure measure) {
  for (size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] >= 0.0 && fractions[i] < 1.0))
      fail(Errc::invalid_config, "referral fractions must lie in [0, 1)");
    if (i > 0 && fractions[i] < fractions[i - 1])
      fail(Errc::invalid_config, "referral fractions must be sorted ascending");
  }
  if (items.empty()) fail(Errc::empty_input, "no predictions to refer");

  // most uncertain first; image_id breaks ties deterministically
  std::sort(items.begin(), items.end(), [](const ReferralItem& a, const ReferralItem& b) {
    if (a.uncertainty != b.uncertainty) return a.uncertainty > b.uncertainty;
    return a.image_id < b.image_id;
  });

  const size_t n = items.size();
  ReferralCurve curve;
  curve.measure = measure;
  for (double q : fractions) {
    // absorb float slop like 0.2 * 10 landing just above an integer
    const size_t refer_n = static_cast<size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
    ReferralPoint point;
    point.fraction = q;
    point.retained_n = n - refer_n;

    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(point.retained_n);
    labels.reserve(point.retained_n);
    bool has_pos = false, has_neg = false;
    for (size_t i = refer_n; i < n; ++i) {
      scores.push_back(items[i].mean);
      labels.push_back(items[i].label);
      (items[i].label == 1 ? has_pos : has_neg) = true;
    }
    if (has_pos && has_neg) point.auc = roc_auc(scores, labels);
    curve.points.push_back(std::move(point));
  }
  return curve;
}

ReferralCurve referral_curve(std::span<const PredictionDistribution> dists,
                             std::span<const int> labels, std::span<const double> fractions,
                             UncertaintyMeasure measure) {
  if (dists.size() != labels.size())
    fail(Errc::shape_mismatch, "labels must align with prediction distributions");
  std::vector<ReferralItem> items;
  items.reserve(dists.size());
  for (size_t i = 0; i < dists.size(); ++i) {
    items.push_back({dists[i].image_id, labels[i], dists[i].mean,
                     uncertainty_score(dists[i], measure)});
  }
  return referral_curve(std::move(items), fractions, measure);
}

}  // namespace retscreen
