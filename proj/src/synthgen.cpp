#include "retscreen/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "retscreen/png_io.hpp"

namespace retscreen {

void SynthConfig::validate() const {
  if (n_individuals < 0) fail(Errc::invalid_config, "n_individuals must be >= 0");
  if (!(t2d_fraction > 0.0 && t2d_fraction < 1.0))
    fail(Errc::invalid_config, "t2d_fraction must be in (0, 1)");
  if (images_per_eye_min < 1) fail(Errc::invalid_config, "images_per_eye_min must be >= 1");
  if (images_per_eye_min > images_per_eye_max)
    fail(Errc::invalid_config, "images_per_eye range is empty");
  if (image_size < 64) fail(Errc::invalid_config, "image_size must be >= 64");
  if (latent_shift < 0.0) fail(Errc::invalid_config, "latent_shift must be >= 0");
  if (image_noise_std < 0.0) fail(Errc::invalid_config, "image_noise_std must be >= 0");
}

double latent_bayes_auc(double latent_shift) {
  return normal_cdf(latent_shift * 2.0 / std::sqrt(2.0));
}

LatentIndividual draw_latent(const SynthConfig& config, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ind%05d", index);
  LatentIndividual latent;
  latent.individual_id = buf;
  Rng rng(derive_seed(config.seed, "individual", static_cast<uint64_t>(index)));
  latent.label = rng.bernoulli(config.t2d_fraction) ? 1 : 0;
  for (auto& b : latent.biomarkers) b = rng.normal() + latent.label * config.latent_shift;
  return latent;
}

namespace {

struct Rgb {
  double r, g, b;
};

constexpr Rgb kBackground{0.05, 0.04, 0.03};
constexpr Rgb kDisc{0.55, 0.32, 0.14};
constexpr Rgb kBlob{0.92, 0.70, 0.35};
constexpr Rgb kVessel{0.98, 0.90, 0.55};

void blend(ImageTensor& img, int y, int x, const Rgb& color, double alpha) {
  if (alpha <= 0.0) return;
  if (alpha > 1.0) alpha = 1.0;
  img.at(y, x, 0) += alpha * (color.r - img.at(y, x, 0));
  img.at(y, x, 1) += alpha * (color.g - img.at(y, x, 1));
  img.at(y, x, 2) += alpha * (color.b - img.at(y, x, 2));
}

// soft-edged filled circle; edge falls off over one pixel
void draw_disc(ImageTensor& img, double cy, double cx, double radius, const Rgb& color) {
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius - 1.0)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + radius + 1.0)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius - 1.0)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + radius + 1.0)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(y - cy, x - cx);
      blend(img, y, x, color, radius - d + 0.5);
    }
  }
}

}  // namespace

ImageTensor render_image(const LatentIndividual& latent, Eye eye, Centering centering,
                         uint64_t per_image_seed, const SynthConfig& config) {
  config.validate();
  const int size = config.image_size;
  const double s = static_cast<double>(size);
  Rng rng(per_image_seed);

  ImageTensor img(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      img.at(y, x, 0) = kBackground.r;
      img.at(y, x, 1) = kBackground.g;
      img.at(y, x, 2) = kBackground.b;
    }

  const double cy = (size - 1) / 2.0;
  const double cx = (size - 1) / 2.0;
  draw_disc(img, cy, cx, 0.47 * s, kDisc);

  // optic-disc-like blob; position encodes eye/centering, radius biomarker[3]
  double blob_dx = 0.0, blob_dy = 0.0;
  if (centering == Centering::fovea) {
    blob_dx = (eye == Eye::left ? -0.22 : 0.22) * s;
    blob_dy = 0.05 * s;
  }
  const double blob_radius =
      std::clamp(s * (0.09 + 0.012 * latent.biomarkers[3]), 0.05 * s, 0.16 * s);
  draw_disc(img, cy + blob_dy, cx + blob_dx, blob_radius, kBlob);

  // vessel: y(x) = cy' + A sin(2 pi f x / S + phase), stamped as a stroke
  const double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const double jitter = rng.uniform(-0.05 * s, 0.05 * s);
  const double amplitude = std::clamp(s * (0.10 + 0.030 * latent.biomarkers[0]), 0.02 * s, 0.30 * s);
  const double thickness =
      std::clamp((1.6 + 0.70 * latent.biomarkers[1]) * s / 64.0, 0.6, 0.10 * s);
  const double freq = std::clamp(1.5 + 0.25 * latent.biomarkers[2], 0.5, 3.0);

  std::vector<double> dist(static_cast<size_t>(size) * size,
                           std::numeric_limits<double>::infinity());
  const double reach = thickness / 2.0 + 1.5;
  const int substeps = 4;
  for (int i = 0; i < size * substeps; ++i) {
    const double px = static_cast<double>(i) / substeps;
    const double py = cy + jitter + amplitude * std::sin(2.0 * 3.14159265358979323846 * freq * px / s + phase);
    const int y0 = std::max(0, static_cast<int>(std::floor(py - reach)));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(py + reach)));
    const int x0 = std::max(0, static_cast<int>(std::floor(px - reach)));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(px + reach)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d = std::hypot(y - py, x - px);
        double& cell = dist[static_cast<size_t>(y) * size + x];
        if (d < cell) cell = d;
      }
  }
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double d = dist[static_cast<size_t>(y) * size + x];
      blend(img, y, x, kVessel, thickness / 2.0 + 0.5 - d);
    }

  if (config.image_noise_std > 0.0) {
    for (double& v : img.data) v += config.image_noise_std * rng.normal();
  }
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
  return img;
}

CohortManifest generate_cohort(const SynthConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::vector<SampleMeta> samples;
  for (int i = 0; i < config.n_individuals; ++i) {
    const LatentIndividual latent = draw_latent(config, i);
    Rng layout_rng(derive_seed(config.seed, "layout", static_cast<uint64_t>(i)));
    int image_index = 0;
    for (Eye eye : {Eye::left, Eye::right}) {
      const int count = static_cast<int>(
          layout_rng.uniform_int(config.images_per_eye_min, config.images_per_eye_max));
      for (int j = 0; j < count; ++j) {
        const Centering centering = (j % 2 == 0) ? Centering::optic_disc : Centering::fovea;
        const uint64_t image_seed = derive_seed(config.seed, "image", static_cast<uint64_t>(i),
                                                static_cast<uint64_t>(image_index));
        SampleMeta m;
        m.image_id = latent.individual_id + "_" + (eye == Eye::left ? "l" : "r") + std::to_string(j);
        m.individual_id = latent.individual_id;
        m.eye = eye;
        m.centering = centering;
        m.label = latent.label;
        m.biomarkers = latent.biomarkers;
        m.path = "images/" + m.image_id + ".png";
        write_png(out_dir / m.path, render_image(latent, eye, centering, image_seed, config));
        samples.push_back(std::move(m));
        ++image_index;
      }
    }
  }
  return validate_manifest(std::move(samples));
}

}  // namespace retscreen
