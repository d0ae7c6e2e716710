#pragma once

#include "retscreen/image.hpp"

namespace retscreen {

// Bilinear resize to target x target, half-pixel-centered sampling
// (align_corners = false): src = (dst + 0.5) * scale - 0.5, edge-clamped.
// Resizing to the source size is a bitwise identity.
ImageTensor resize_bilinear(const ImageTensor& image, int target);

// Channel-wise global contrast normalization: (v - mean_c) / max(std_c, 1e-8)
// with population std. Constant channels map to all zeros.
ImageTensor global_contrast_normalize(const ImageTensor& image);

// Crop of size x size with offset (floor((H-size)/2), floor((W-size)/2)).
ImageTensor center_crop(const ImageTensor& image, int size);

}  // namespace retscreen
