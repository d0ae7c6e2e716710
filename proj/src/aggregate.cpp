#include "retscreen/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace retscreen {

int slot_index(Eye eye, Centering centering) {
  return (eye == Eye::left ? 0 : 2) + (centering == Centering::optic_disc ? 0 : 1);
}

size_t IndividualSlots::image_count() const {
  size_t n = 0;
  for (const auto& preds : slot_preds) n += preds.size();
  return n;
}

std::vector<IndividualSlots> group_by_individual(const std::vector<ImagePrediction>& predictions) {
  std::vector<IndividualSlots> out;
  std::unordered_map<std::string, size_t> index;
  for (const ImagePrediction& p : predictions) {
    auto [it, inserted] = index.emplace(p.individual_id, out.size());
    if (inserted) {
      IndividualSlots slots;
      slots.individual_id = p.individual_id;
      slots.label = p.label;
      out.push_back(std::move(slots));
    }
    out[it->second].slot_preds[static_cast<size_t>(slot_index(p.eye, p.centering))].push_back(p.mean);
  }
  return out;
}

std::vector<IndividualSlots> group_by_individual(
    const std::vector<std::pair<std::string, double>>& means_by_image_id,
    const CohortManifest& manifest) {
  std::unordered_map<std::string, size_t> by_image;
  for (size_t i = 0; i < manifest.samples.size(); ++i)
    by_image.emplace(manifest.samples[i].image_id, i);

  std::vector<ImagePrediction> joined;
  joined.reserve(means_by_image_id.size());
  for (const auto& [image_id, mean] : means_by_image_id) {
    auto it = by_image.find(image_id);
    if (it == by_image.end())
      fail(Errc::unknown_individual, "image '" + image_id + "' has no manifest metadata");
    const SampleMeta& m = manifest.samples[it->second];
    joined.push_back({m.image_id, m.individual_id, m.eye, m.centering, m.label, mean});
  }
  return group_by_individual(joined);
}

namespace {

void require_images(const IndividualSlots& slots) {
  if (slots.image_count() == 0)
    fail(Errc::no_images, "individual '" + slots.individual_id + "' has no predictions");
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double pop_variance_of(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

}  // namespace

double eye_mean_aggregate(const IndividualSlots& slots) {
  require_images(slots);
  double sum = 0.0;
  int eyes = 0;
  for (int eye = 0; eye < 2; ++eye) {
    double acc = 0.0;
    size_t n = 0;
    for (int c = 0; c < 2; ++c) {
      for (double p : slots.slot_preds[static_cast<size_t>(2 * eye + c)]) {
        acc += p;
        ++n;
      }
    }
    if (n > 0) {
      sum += acc / static_cast<double>(n);
      ++eyes;
    }
  }
  return sum / static_cast<double>(eyes);
}

double global_mean_aggregate(const IndividualSlots& slots) {
  require_images(slots);
  double acc = 0.0;
  size_t n = 0;
  for (const auto& preds : slots.slot_preds)
    for (double p : preds) {
      acc += p;
      ++n;
    }
  return acc / static_cast<double>(n);
}

double eye_max_aggregate(const IndividualSlots& slots) {
  require_images(slots);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& preds : slots.slot_preds)
    for (double p : preds) best = std::max(best, p);
  return best;
}

IndividualFeatureVector extract_features(const IndividualSlots& slots) {
  require_images(slots);
  IndividualFeatureVector fv;
  fv.individual_id = slots.individual_id;
  fv.label = slots.label;

  std::array<bool, 4> present{};
  std::array<double, 4> means{}, vars{};
  std::array<size_t, 4> counts{};
  for (int s = 0; s < 4; ++s) {
    const auto& preds = slots.slot_preds[static_cast<size_t>(s)];
    if (!preds.empty()) {
      present[static_cast<size_t>(s)] = true;
      means[static_cast<size_t>(s)] = mean_of(preds);
      vars[static_cast<size_t>(s)] = pop_variance_of(preds, means[static_cast<size_t>(s)]);
      counts[static_cast<size_t>(s)] = preds.size();
    }
  }

  // pass 1: within an eye, a missing centering copies the opposite one
  for (int eye = 0; eye < 2; ++eye) {
    const int od = 2 * eye, fov = 2 * eye + 1;
    if (present[static_cast<size_t>(od)] && !present[static_cast<size_t>(fov)]) {
      means[static_cast<size_t>(fov)] = means[static_cast<size_t>(od)];
      vars[static_cast<size_t>(fov)] = vars[static_cast<size_t>(od)];
      fv.padded_slots.push_back(fov);
    } else if (!present[static_cast<size_t>(od)] && present[static_cast<size_t>(fov)]) {
      means[static_cast<size_t>(od)] = means[static_cast<size_t>(fov)];
      vars[static_cast<size_t>(od)] = vars[static_cast<size_t>(fov)];
      fv.padded_slots.push_back(od);
    }
  }
  // pass 2: a fully missing eye copies the other eye's slots one-to-one
  for (int eye = 0; eye < 2; ++eye) {
    if (present[static_cast<size_t>(2 * eye)] || present[static_cast<size_t>(2 * eye + 1)]) continue;
    const int other = 1 - eye;
    for (int c = 0; c < 2; ++c) {
      means[static_cast<size_t>(2 * eye + c)] = means[static_cast<size_t>(2 * other + c)];
      vars[static_cast<size_t>(2 * eye + c)] = vars[static_cast<size_t>(2 * other + c)];
      fv.padded_slots.push_back(2 * eye + c);
    }
  }
  std::sort(fv.padded_slots.begin(), fv.padded_slots.end());

  for (int s = 0; s < 4; ++s) {
    fv.features[static_cast<size_t>(3 * s)] = means[static_cast<size_t>(s)];
    fv.features[static_cast<size_t>(3 * s + 1)] = vars[static_cast<size_t>(s)];
    fv.features[static_cast<size_t>(3 * s + 2)] = static_cast<double>(counts[static_cast<size_t>(s)]);
  }
  return fv;
}

namespace {

void require_both_classes(std::span<const IndividualFeatureVector> features) {
  bool pos = false, neg = false;
  for (const auto& fv : features) (fv.label == 1 ? pos : neg) = true;
  if (!pos || !neg) fail(Errc::one_class_only, "need both classes to fit an aggregator");
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

LogRegModel fit_logreg(std::span<const IndividualFeatureVector> features,
                       const LogRegConfig& config) {
  require_both_classes(features);
  if (config.iterations < 0 || !(config.lr >= 0.0) || config.l2 < 0.0)
    fail(Errc::invalid_config, "bad logistic regression config");

  LogRegModel model;
  model.config = config;
  const size_t n = features.size();

  for (int f = 0; f < 12; ++f) {
    double mean = 0.0;
    for (const auto& fv : features) mean += fv.features[static_cast<size_t>(f)];
    mean /= static_cast<double>(n);
    double sq = 0.0;
    for (const auto& fv : features) {
      const double d = fv.features[static_cast<size_t>(f)] - mean;
      sq += d * d;
    }
    const double stdev = std::sqrt(sq / static_cast<double>(n));
    model.mu[static_cast<size_t>(f)] = config.standardize ? mean : 0.0;
    model.sigma[static_cast<size_t>(f)] = config.standardize && stdev > 1e-12 ? stdev : 1.0;
  }

  std::vector<std::array<double, 12>> x(n);
  for (size_t i = 0; i < n; ++i)
    for (int f = 0; f < 12; ++f)
      x[i][static_cast<size_t>(f)] =
          (features[i].features[static_cast<size_t>(f)] - model.mu[static_cast<size_t>(f)]) /
          model.sigma[static_cast<size_t>(f)];

  for (int it = 0; it < config.iterations; ++it) {
    std::array<double, 12> gw{};
    double gb = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double z = model.bias;
      for (int f = 0; f < 12; ++f) z += model.weights[static_cast<size_t>(f)] * x[i][static_cast<size_t>(f)];
      const double err = sigmoid(z) - features[i].label;
      for (int f = 0; f < 12; ++f) gw[static_cast<size_t>(f)] += err * x[i][static_cast<size_t>(f)];
      gb += err;
    }
    for (int f = 0; f < 12; ++f) {
      gw[static_cast<size_t>(f)] = gw[static_cast<size_t>(f)] / static_cast<double>(n) +
                                   2.0 * config.l2 * model.weights[static_cast<size_t>(f)];
      model.weights[static_cast<size_t>(f)] -= config.lr * gw[static_cast<size_t>(f)];
    }
    model.bias -= config.lr * gb / static_cast<double>(n);
  }
  return model;
}

double predict(const LogRegModel& model, const IndividualFeatureVector& fv) {
  double z = model.bias;
  for (int f = 0; f < 12; ++f)
    z += model.weights[static_cast<size_t>(f)] *
         (fv.features[static_cast<size_t>(f)] - model.mu[static_cast<size_t>(f)]) /
         model.sigma[static_cast<size_t>(f)];
  return sigmoid(std::clamp(z, -30.0, 30.0));
}

GnbModel fit_gnb(std::span<const IndividualFeatureVector> features, double variance_floor) {
  require_both_classes(features);
  if (!(variance_floor > 0.0)) fail(Errc::invalid_config, "variance floor must be positive");

  GnbModel model;
  model.variance_floor = variance_floor;
  std::array<size_t, 2> counts{};
  for (const auto& fv : features) counts[static_cast<size_t>(fv.label)]++;
  for (int c = 0; c < 2; ++c) {
    model.log_prior[static_cast<size_t>(c)] =
        std::log(static_cast<double>(counts[static_cast<size_t>(c)]) / static_cast<double>(features.size()));
    for (int f = 0; f < 12; ++f) {
      double mean = 0.0;
      for (const auto& fv : features)
        if (fv.label == c) mean += fv.features[static_cast<size_t>(f)];
      mean /= static_cast<double>(counts[static_cast<size_t>(c)]);
      double sq = 0.0;
      for (const auto& fv : features)
        if (fv.label == c) {
          const double d = fv.features[static_cast<size_t>(f)] - mean;
          sq += d * d;
        }
      model.mean[static_cast<size_t>(c)][static_cast<size_t>(f)] = mean;
      model.variance[static_cast<size_t>(c)][static_cast<size_t>(f)] =
          std::max(sq / static_cast<double>(counts[static_cast<size_t>(c)]), variance_floor);
    }
  }
  return model;
}

double predict(const GnbModel& model, const IndividualFeatureVector& fv) {
  std::array<double, 2> log_post{};
  for (int c = 0; c < 2; ++c) {
    double acc = model.log_prior[static_cast<size_t>(c)];
    for (int f = 0; f < 12; ++f) {
      const double var = model.variance[static_cast<size_t>(c)][static_cast<size_t>(f)];
      const double d = fv.features[static_cast<size_t>(f)] - model.mean[static_cast<size_t>(c)][static_cast<size_t>(f)];
      acc += -0.5 * std::log(2.0 * 3.14159265358979323846 * var) - d * d / (2.0 * var);
    }
    log_post[static_cast<size_t>(c)] = acc;
  }
  const double m = std::max(log_post[0], log_post[1]);
  const double lse = m + std::log(std::exp(log_post[0] - m) + std::exp(log_post[1] - m));
  return std::exp(log_post[1] - lse);
}

}  // namespace retscreen
