#include "retscreen/augment.hpp"

#include <cmath>

namespace retscreen {

AugmentationSpec sample_augmentation(const AugmentParams& params, Rng& rng) {
  AugmentationSpec spec;
  spec.dx = static_cast<int>(rng.uniform_int(-params.translate_px, params.translate_px));
  spec.dy = static_cast<int>(rng.uniform_int(-params.translate_px, params.translate_px));
  spec.theta = rng.uniform(0.0, params.rotate_deg);
  if (params.flip_h) spec.do_flip_h = rng.bernoulli(0.5);
  if (params.flip_v) spec.do_flip_v = rng.bernoulli(0.5);
  spec.di = rng.uniform(-params.intensity_shift, params.intensity_shift);
  for (int c = 0; c < 3; ++c) spec.dc[static_cast<size_t>(c)] = rng.uniform(-params.color_shift, params.color_shift);
  spec.gamma_c = rng.uniform(1.0 - params.contrast_shift, 1.0 + params.contrast_shift);
  return spec;
}

namespace {

// out(i, j) = in(j, W-1-i): quarter turn counter-clockwise, square images
ImageTensor rotate_quarter_ccw(const ImageTensor& in) {
  ImageTensor out(in.width, in.height, in.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < in.channels; ++c) out.at(y, x, c) = in.at(x, in.width - 1 - y, c);
  return out;
}

ImageTensor rotate_half(const ImageTensor& in) {
  ImageTensor out(in.height, in.width, in.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < in.channels; ++c)
        out.at(y, x, c) = in.at(in.height - 1 - y, in.width - 1 - x, c);
  return out;
}

ImageTensor rotate_bilinear(const ImageTensor& in, double theta_deg) {
  const double rad = theta_deg * 3.14159265358979323846 / 180.0;
  const double cos_t = std::cos(rad);
  const double sin_t = std::sin(rad);
  const double cy = (in.height - 1) / 2.0;
  const double cx = (in.width - 1) / 2.0;
  ImageTensor out(in.height, in.width, in.channels);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      // inverse map of a CCW rotation about the center
      const double sx = cos_t * (x - cx) - sin_t * (y - cy) + cx;
      const double sy = sin_t * (x - cx) + cos_t * (y - cy) + cy;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int c = 0; c < in.channels; ++c) {
        double acc = 0.0;
        // taps outside the frame contribute zero
        auto tap = [&](int yy, int xx, double w) {
          if (w == 0.0) return;
          if (yy < 0 || yy >= in.height || xx < 0 || xx >= in.width) return;
          acc += w * in.at(yy, xx, c);
        };
        tap(y0, x0, (1.0 - fy) * (1.0 - fx));
        tap(y0, x0 + 1, (1.0 - fy) * fx);
        tap(y0 + 1, x0, fy * (1.0 - fx));
        tap(y0 + 1, x0 + 1, fy * fx);
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

ImageTensor rotate(const ImageTensor& in, double theta_deg) {
  double r = std::fmod(theta_deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r == 0.0) return in;
  if (in.height == in.width) {
    if (r == 90.0) return rotate_quarter_ccw(in);
    if (r == 180.0) return rotate_half(in);
    if (r == 270.0) return rotate_quarter_ccw(rotate_half(in));
  }
  return rotate_bilinear(in, r);
}

ImageTensor translate(const ImageTensor& in, int dx, int dy) {
  ImageTensor out(in.height, in.width, in.channels);
  for (int y = 0; y < in.height; ++y) {
    const int sy = y - dy;
    if (sy < 0 || sy >= in.height) continue;
    for (int x = 0; x < in.width; ++x) {
      const int sx = x - dx;
      if (sx < 0 || sx >= in.width) continue;
      for (int c = 0; c < in.channels; ++c) out.at(y, x, c) = in.at(sy, sx, c);
    }
  }
  return out;
}

ImageTensor flip_horizontal(const ImageTensor& in) {
  ImageTensor out(in.height, in.width, in.channels);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x)
      for (int c = 0; c < in.channels; ++c) out.at(y, x, c) = in.at(y, in.width - 1 - x, c);
  return out;
}

ImageTensor flip_vertical(const ImageTensor& in) {
  ImageTensor out(in.height, in.width, in.channels);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x)
      for (int c = 0; c < in.channels; ++c) out.at(y, x, c) = in.at(in.height - 1 - y, x, c);
  return out;
}

}  // namespace

ImageTensor apply_augmentation(const ImageTensor& image, const AugmentationSpec& spec) {
  ImageTensor out = rotate(image, spec.theta);
  if (spec.dx != 0 || spec.dy != 0) out = translate(out, spec.dx, spec.dy);
  if (spec.do_flip_h) out = flip_horizontal(out);
  if (spec.do_flip_v) out = flip_vertical(out);

  const bool any_add = spec.di != 0.0 || spec.dc[0] != 0.0 || spec.dc[1] != 0.0 || spec.dc[2] != 0.0;
  const bool any_gamma = spec.gamma_c != 1.0;
  if (!any_add && !any_gamma) return out;

  double m = 0.0;
  if (any_gamma) {
    for (double v : out.data) m += v;
    m /= static_cast<double>(out.data.size());
  }
  if (any_add) {
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        for (int c = 0; c < out.channels; ++c)
          out.at(y, x, c) += spec.di + spec.dc[static_cast<size_t>(c)];
  }
  if (any_gamma) {
    for (double& v : out.data) v = (v - m) * spec.gamma_c + m;
  }
  return out;
}

}  // namespace retscreen
