#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "retscreen/data_model.hpp"

namespace retscreen {

// Slot order used throughout: (eye, centering) as
// 0 = L-OD, 1 = L-FOVEA, 2 = R-OD, 3 = R-FOVEA.
inline constexpr std::array<const char*, 4> kSlotNames = {"l_od", "l_fovea", "r_od", "r_fovea"};
int slot_index(Eye eye, Centering centering);

struct ImagePrediction {
  std::string image_id;
  std::string individual_id;
  Eye eye = Eye::left;
  Centering centering = Centering::optic_disc;
  int label = 0;
  double mean = 0.0;  // TTA mean prediction for the image
};

struct IndividualSlots {
  std::string individual_id;
  int label = 0;
  std::array<std::vector<double>, 4> slot_preds;  // input order preserved per slot

  size_t image_count() const;
};

// Partitions by (individual, eye, centering), first-appearance individual
// order. The overload joining raw means against a manifest raises
// UNKNOWN_INDIVIDUAL for image ids the manifest does not know.
std::vector<IndividualSlots> group_by_individual(const std::vector<ImagePrediction>& predictions);
std::vector<IndividualSlots> group_by_individual(
    const std::vector<std::pair<std::string, double>>& means_by_image_id,
    const CohortManifest& manifest);

// per-eye mean over both centerings, then mean of the available eye means
double eye_mean_aggregate(const IndividualSlots& slots);
// plain mean over every image prediction, the alternative reading
double global_mean_aggregate(const IndividualSlots& slots);
// maximum over every image prediction
double eye_max_aggregate(const IndividualSlots& slots);

// features[3*s + 0/1/2] = mean / population variance / count of slot s.
// Missing slots are average-padded in two passes (opposite centering within
// the eye, then the other eye slot-to-slot); counts are never padded.
struct IndividualFeatureVector {
  std::string individual_id;
  int label = 0;
  std::array<double, 12> features{};
  std::vector<int> padded_slots;  // ascending slot indices filled by padding
};

IndividualFeatureVector extract_features(const IndividualSlots& slots);

struct LogRegConfig {
  double lr = 0.1;
  int iterations = 500;
  double l2 = 1e-4;
  bool standardize = true;
};

struct LogRegModel {
  std::array<double, 12> weights{};
  double bias = 0.0;
  std::array<double, 12> mu{};     // training-column means
  std::array<double, 12> sigma{};  // training-column stds (floored)
  LogRegConfig config;
};

// Full-batch gradient descent on mean BCE + l2 |w|^2 from zero weights.
LogRegModel fit_logreg(std::span<const IndividualFeatureVector> features,
                       const LogRegConfig& config);
double predict(const LogRegModel& model, const IndividualFeatureVector& fv);

struct GnbModel {
  std::array<double, 2> log_prior{};
  std::array<std::array<double, 12>, 2> mean{};
  std::array<std::array<double, 12>, 2> variance{};  // floored population variance
  double variance_floor = 1e-9;
};

GnbModel fit_gnb(std::span<const IndividualFeatureVector> features, double variance_floor = 1e-9);
// posterior of class 1, log-sum-exp stable
double predict(const GnbModel& model, const IndividualFeatureVector& fv);

}  // namespace retscreen
