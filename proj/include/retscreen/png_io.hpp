#pragma once

#include <filesystem>

#include "retscreen/image.hpp"

namespace retscreen {

// Reads an 8-bit PNG into a 3-channel tensor with values in [0, 1].
// Grayscale and alpha variants are expanded/stripped to RGB.
ImageTensor read_png(const std::filesystem::path& path);

// Writes as 8-bit RGB with values clamped to [0, 1] and rounded to the
// nearest of 256 levels. Encoder settings are fixed so output bytes are
// reproducible.
void write_png(const std::filesystem::path& path, const ImageTensor& image);

}  // namespace retscreen
