#include "retscreen/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "retscreen/common.hpp"

namespace retscreen {

ImageTensor resize_bilinear(const ImageTensor& image, int target) {
  if (target < 1) fail(Errc::bad_target, "resize target must be >= 1, got " + std::to_string(target));
  if (image.height < 1 || image.width < 1)
    fail(Errc::shape_mismatch, "resize source must be non-empty");
  if (image.height == target && image.width == target) return image;

  ImageTensor out(target, target, image.channels);
  const double scale_y = static_cast<double>(image.height) / target;
  const double scale_x = static_cast<double>(image.width) / target;
  for (int y = 0; y < target; ++y) {
    double sy = (y + 0.5) * scale_y - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(image.height - 1));
    int y0 = static_cast<int>(std::floor(sy));
    int y1 = std::min(y0 + 1, image.height - 1);
    double fy = sy - y0;
    for (int x = 0; x < target; ++x) {
      double sx = (x + 0.5) * scale_x - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(image.width - 1));
      int x0 = static_cast<int>(std::floor(sx));
      int x1 = std::min(x0 + 1, image.width - 1);
      double fx = sx - x0;
      for (int c = 0; c < image.channels; ++c) {
        double top = image.at(y0, x0, c) * (1.0 - fx) + image.at(y0, x1, c) * fx;
        double bot = image.at(y1, x0, c) * (1.0 - fx) + image.at(y1, x1, c) * fx;
        out.at(y, x, c) = top * (1.0 - fy) + bot * fy;
      }
    }
  }
  return out;
}

ImageTensor global_contrast_normalize(const ImageTensor& image) {
  constexpr double kEps = 1e-8;
  ImageTensor out(image.height, image.width, image.channels);
  const size_t n = static_cast<size_t>(image.height) * image.width;
  if (n == 0) return out;
  for (int c = 0; c < image.channels; ++c) {
    double sum = 0.0;
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) sum += image.at(y, x, c);
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) {
        double d = image.at(y, x, c) - mean;
        sq += d * d;
      }
    const double std_dev = std::sqrt(sq / static_cast<double>(n));
    const double denom = std::max(std_dev, kEps);
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) out.at(y, x, c) = (image.at(y, x, c) - mean) / denom;
  }
  return out;
}

ImageTensor center_crop(const ImageTensor& image, int size) {
  if (size < 1) fail(Errc::bad_target, "crop size must be >= 1");
  if (size > image.height || size > image.width)
    fail(Errc::crop_too_large, "crop " + std::to_string(size) + " exceeds " +
                                   std::to_string(image.height) + "x" + std::to_string(image.width));
  const int off_y = (image.height - size) / 2;
  const int off_x = (image.width - size) / 2;
  ImageTensor out(size, size, image.channels);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < image.channels; ++c) out.at(y, x, c) = image.at(y + off_y, x + off_x, c);
  return out;
}

}  // namespace retscreen
