#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "retscreen/data_model.hpp"
#include "retscreen/image.hpp"

namespace retscreen {

// A decoded, resized and contrast-normalized sample; `image` is the pre-crop
// tensor the augmentation stage consumes.
struct LoadedSample {
  std::string image_id;
  std::string individual_id;
  Eye eye = Eye::left;
  Centering centering = Centering::optic_disc;
  int label = 0;
  std::array<double, 4> biomarkers{};
  ImageTensor image;
};

struct LoadedSet {
  std::vector<LoadedSample> samples;
  std::vector<int> labels() const;
};

// Loads the manifest samples belonging to `which` (or all when unset),
// decoding PNGs relative to manifest_dir, resizing to resize_to and applying
// global contrast normalization.
LoadedSet load_set(const CohortManifest& manifest, const std::filesystem::path& manifest_dir,
                   const SplitAssignment* split, std::optional<Split> which, int resize_to,
                   int threads);

}  // namespace retscreen
