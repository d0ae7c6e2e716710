#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "retscreen/data_model.hpp"
#include "retscreen/image.hpp"

namespace retscreen {

struct SynthConfig {
  int n_individuals = 600;
  double t2d_fraction = 0.345;
  int images_per_eye_min = 1;
  int images_per_eye_max = 2;
  int image_size = 64;       // square, >= 64
  double latent_shift = 1.0; // class-mean separation of the latent biomarkers
  double image_noise_std = 0.02;
  uint64_t seed = 0;

  void validate() const;
};

struct LatentIndividual {
  std::string individual_id;
  int label = 0;
  std::array<double, 4> biomarkers{};  // class 0 ~ N(0, 1), class 1 ~ N(latent_shift, 1)
};

// Best achievable AUC on the latent 4-D Gaussians with unit covariance and a
// shift on every coordinate: Phi(latent_shift * 2 / sqrt(2)).
double latent_bayes_auc(double latent_shift);

// Renders the fundus-like scene: dark background, bright disc, a bright
// sinusoidal vessel whose amplitude tracks biomarkers[0] and stroke thickness
// biomarkers[1] (frequency and blob radius track biomarkers[2] and [3], so
// all four latents are visible in pixels), a bright blob offset by
// eye/centering, i.i.d. Gaussian noise, then a clamp to [0, 1].
ImageTensor render_image(const LatentIndividual& latent, Eye eye, Centering centering,
                         uint64_t per_image_seed, const SynthConfig& config);

// Writes PNGs under out_dir/images/ and returns the manifest (paths relative
// to out_dir). Per-image seeds derive from (seed, individual index, image
// index) through splitmix64 chaining, so generation is order-independent.
CohortManifest generate_cohort(const SynthConfig& config, const std::filesystem::path& out_dir);

// Deterministic latent draw for individual index i, shared by generate_cohort.
LatentIndividual draw_latent(const SynthConfig& config, int index);

}  // namespace retscreen
