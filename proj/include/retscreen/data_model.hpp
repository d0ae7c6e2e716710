#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "retscreen/common.hpp"
#include "retscreen/csv.hpp"

namespace retscreen {

enum class Eye { left, right };
enum class Centering { optic_disc, fovea };

const char* to_string(Eye eye);              // "L" / "R"
const char* to_string(Centering centering);  // "OD" / "FOVEA"
Eye parse_eye(std::string_view s);
Centering parse_centering(std::string_view s);

struct SampleMeta {
  std::string image_id;
  std::string individual_id;
  Eye eye = Eye::left;
  Centering centering = Centering::optic_disc;
  int label = 0;  // 0 = normal glucose metabolism, 1 = T2D
  std::array<double, 4> biomarkers{};
  std::string path;  // relative to the manifest location
};

struct CohortManifest {
  std::vector<SampleMeta> samples;
  std::vector<std::string> individual_ids;  // first-appearance order
  std::unordered_map<std::string, std::vector<size_t>> by_individual;

  size_t individual_count() const { return individual_ids.size(); }
  // all samples of an individual share one label, enforced at validation
  int label_of(const std::string& individual_id) const;
};

enum class Split { train, validation, test };
const char* to_string(Split s);  // "train" / "val" / "test"
Split parse_split(std::string_view s);

struct SplitAssignment {
  std::unordered_map<std::string, Split> by_individual;
  uint64_t seed = 0;
  std::array<size_t, 3> counts() const;  // train / val / test individual counts
};

// Manifest CSV header, exact order.
inline constexpr std::array<const char*, 10> kManifestColumns = {
    "image_id", "individual_id", "eye",  "centering", "label",
    "bio1",     "bio2",          "bio3", "bio4",      "path"};

CohortManifest validate_manifest(const CsvTable& rows);
CohortManifest validate_manifest(std::vector<SampleMeta> rows);

CohortManifest load_manifest(const std::filesystem::path& csv_path);
std::string render_manifest(const CohortManifest& manifest,
                            const std::vector<std::string>& comments = {});

// Largest-remainder apportionment of n individuals over the three ratios.
std::array<size_t, 3> largest_remainder_sizes(size_t n, const std::array<double, 3>& ratios);

// Individuals are sorted by id, shuffled with the seeded RNG, then assigned
// contiguously per largest-remainder sizes, so all images of an individual
// land in one split. Stratified mode applies the same scheme per class.
SplitAssignment split_cohort(const CohortManifest& manifest, const std::array<double, 3>& ratios,
                             uint64_t seed, bool stratified = false);

SplitAssignment load_split(const std::filesystem::path& csv_path);
std::string render_split(const SplitAssignment& split,
                         const std::vector<std::string>& comments = {});

}  // namespace retscreen
