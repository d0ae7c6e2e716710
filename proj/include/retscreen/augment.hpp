#pragma once

#include <array>

#include "retscreen/common.hpp"
#include "retscreen/image.hpp"

namespace retscreen {

// Sampling ranges. Shift ranges are magnitudes; draws are symmetric about
// zero (contrast about 1). Defaults are the full-scale settings.
struct AugmentParams {
  int translate_px = 20;
  double rotate_deg = 360.0;  // theta drawn uniformly from [0, rotate_deg)
  bool flip_h = true;
  bool flip_v = true;
  double intensity_shift = 20.0 / 256.0;
  double color_shift = 30.0 / 256.0;
  double contrast_shift = 0.1;
};

struct AugmentationSpec {
  int dx = 0;
  int dy = 0;
  double theta = 0.0;  // degrees, counter-clockwise
  bool do_flip_h = false;
  bool do_flip_v = false;
  double di = 0.0;                  // additive, all channels
  std::array<double, 3> dc{0, 0, 0};  // additive, per channel
  double gamma_c = 1.0;             // contrast multiplier about the image mean

  bool is_identity() const {
    return dx == 0 && dy == 0 && theta == 0.0 && !do_flip_h && !do_flip_v && di == 0.0 &&
           dc[0] == 0.0 && dc[1] == 0.0 && dc[2] == 0.0 && gamma_c == 1.0;
  }
};

// Draw order is fixed: dx, dy, theta, flip_h (if enabled), flip_v (if
// enabled), di, dc[0..2], gamma_c.
AugmentationSpec sample_augmentation(const AugmentParams& params, Rng& rng);

// Applies, in order: rotation about the image center (bilinear, zero-padded;
// exact multiples of 90 degrees go through a lossless index permutation),
// translation by (dx, dy) (zero-padded), flips, then photometrics:
// v' = v + di + dc[c], then v'' = (v' - m) * gamma_c + m with m the
// pre-photometric per-image mean. Steps whose parameters are at identity are
// skipped, so the identity spec returns the input bitwise.
ImageTensor apply_augmentation(const ImageTensor& image, const AugmentationSpec& spec);

}  // namespace retscreen
