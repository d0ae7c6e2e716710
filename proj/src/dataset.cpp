#include "retscreen/dataset.hpp"

#include "retscreen/png_io.hpp"
#include "retscreen/preprocess.hpp"

namespace retscreen {

std::vector<int> LoadedSet::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

LoadedSet load_set(const CohortManifest& manifest, const std::filesystem::path& manifest_dir,
                   const SplitAssignment* split, std::optional<Split> which, int resize_to,
                   int threads) {
  std::vector<size_t> picked;
  for (size_t i = 0; i < manifest.samples.size(); ++i) {
    const SampleMeta& m = manifest.samples[i];
    if (which) {
      if (!split) fail(Errc::invalid_config, "split filter requested without a split assignment");
      auto it = split->by_individual.find(m.individual_id);
      if (it == split->by_individual.end())
        fail(Errc::unknown_individual, "individual '" + m.individual_id + "' missing from split");
      if (it->second != *which) continue;
    }
    picked.push_back(i);
  }

  LoadedSet out;
  out.samples.resize(picked.size());
  parallel_for(picked.size(), threads, [&](size_t k) {
    const SampleMeta& m = manifest.samples[picked[k]];
    LoadedSample s;
    s.image_id = m.image_id;
    s.individual_id = m.individual_id;
    s.eye = m.eye;
    s.centering = m.centering;
    s.label = m.label;
    s.biomarkers = m.biomarkers;
    s.image = global_contrast_normalize(resize_bilinear(read_png(manifest_dir / m.path), resize_to));
    out.samples[k] = std::move(s);
  });
  return out;
}

}  // namespace retscreen
