#include "retscreen/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace retscreen {

const char* to_string(Eye eye) { return eye == Eye::left ? "L" : "R"; }
const char* to_string(Centering centering) {
  return centering == Centering::optic_disc ? "OD" : "FOVEA";
}

Eye parse_eye(std::string_view s) {
  if (s == "L") return Eye::left;
  if (s == "R") return Eye::right;
  fail(Errc::bad_enum, "eye must be L or R, got '" + std::string(s) + "'");
}

Centering parse_centering(std::string_view s) {
  if (s == "OD") return Centering::optic_disc;
  if (s == "FOVEA") return Centering::fovea;
  fail(Errc::bad_enum, "centering must be OD or FOVEA, got '" + std::string(s) + "'");
}

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::validation;
  if (s == "test") return Split::test;
  fail(Errc::bad_enum, "split must be train, val or test, got '" + std::string(s) + "'");
}

int CohortManifest::label_of(const std::string& individual_id) const {
  auto it = by_individual.find(individual_id);
  if (it == by_individual.end() || it->second.empty())
    fail(Errc::unknown_individual, "no samples for individual '" + individual_id + "'");
  return samples[it->second.front()].label;
}

std::array<size_t, 3> SplitAssignment::counts() const {
  std::array<size_t, 3> n{0, 0, 0};
  for (const auto& [id, split] : by_individual) n[static_cast<size_t>(split)]++;
  return n;
}

namespace {

double parse_real_field(const std::string& value, const char* column, size_t row) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
    fail(Errc::bad_enum, std::string(column) + " not a finite number in row " +
                             std::to_string(row) + ": '" + value + "'");
  return v;
}

}  // namespace

CohortManifest validate_manifest(const CsvTable& rows) {
  if (rows.header.size() != kManifestColumns.size())
    fail(Errc::missing_field, "manifest header must have " +
                                  std::to_string(kManifestColumns.size()) + " columns, got " +
                                  std::to_string(rows.header.size()));
  for (size_t i = 0; i < kManifestColumns.size(); ++i) {
    if (rows.header[i] != kManifestColumns[i])
      fail(Errc::missing_field, "manifest column " + std::to_string(i) + " must be '" +
                                    kManifestColumns[i] + "', got '" + rows.header[i] + "'");
  }

  std::vector<SampleMeta> parsed;
  parsed.reserve(rows.rows.size());
  for (size_t r = 0; r < rows.rows.size(); ++r) {
    const auto& row = rows.rows[r];
    if (row.size() != kManifestColumns.size())
      fail(Errc::missing_field,
           "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields");
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i].empty())
        fail(Errc::missing_field,
             std::string("empty ") + kManifestColumns[i] + " in row " + std::to_string(r));
    }
    SampleMeta m;
    m.image_id = row[0];
    m.individual_id = row[1];
    m.eye = parse_eye(row[2]);
    m.centering = parse_centering(row[3]);
    if (row[4] == "0")
      m.label = 0;
    else if (row[4] == "1")
      m.label = 1;
    else
      fail(Errc::bad_enum, "label must be 0 or 1 in row " + std::to_string(r) + ", got '" +
                               row[4] + "'");
    for (int b = 0; b < 4; ++b)
      m.biomarkers[static_cast<size_t>(b)] = parse_real_field(row[5 + b], kManifestColumns[5 + b], r);
    m.path = row[9];
    parsed.push_back(std::move(m));
  }
  return validate_manifest(std::move(parsed));
}

CohortManifest validate_manifest(std::vector<SampleMeta> rows) {
  CohortManifest manifest;
  manifest.samples = std::move(rows);
  std::unordered_map<std::string, size_t> seen_images;
  seen_images.reserve(manifest.samples.size());
  for (size_t i = 0; i < manifest.samples.size(); ++i) {
    const SampleMeta& m = manifest.samples[i];
    if (m.label != 0 && m.label != 1)
      fail(Errc::bad_enum, "label must be 0 or 1 for image '" + m.image_id + "'");
    auto [it, inserted] = seen_images.emplace(m.image_id, i);
    if (!inserted) fail(Errc::duplicate_image_id, "image_id '" + m.image_id + "' appears twice");
    auto ind = manifest.by_individual.find(m.individual_id);
    if (ind == manifest.by_individual.end()) {
      manifest.individual_ids.push_back(m.individual_id);
      manifest.by_individual[m.individual_id] = {i};
    } else {
      if (manifest.samples[ind->second.front()].label != m.label)
        fail(Errc::label_conflict,
             "individual '" + m.individual_id + "' has images with both labels");
      ind->second.push_back(i);
    }
  }
  return manifest;
}

CohortManifest load_manifest(const std::filesystem::path& csv_path) {
  return validate_manifest(read_csv_file(csv_path));
}

std::string render_manifest(const CohortManifest& manifest,
                            const std::vector<std::string>& comments) {
  CsvTable table;
  table.comments = comments;
  table.header.assign(kManifestColumns.begin(), kManifestColumns.end());
  table.rows.reserve(manifest.samples.size());
  for (const SampleMeta& m : manifest.samples) {
    std::vector<std::string> row;
    row.reserve(kManifestColumns.size());
    row.push_back(m.image_id);
    row.push_back(m.individual_id);
    row.push_back(to_string(m.eye));
    row.push_back(to_string(m.centering));
    row.push_back(std::to_string(m.label));
    for (double b : m.biomarkers) row.push_back(format_double(b));
    row.push_back(m.path);
    table.rows.push_back(std::move(row));
  }
  return render_csv(table);
}

std::array<size_t, 3> largest_remainder_sizes(size_t n, const std::array<double, 3>& ratios) {
  std::array<size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  size_t assigned = 0;
  for (size_t i = 0; i < 3; ++i) {
    double target = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<size_t>(std::floor(target));
    remainders[i] = target - std::floor(target);
    assigned += sizes[i];
  }
  // hand out the leftover to the largest remainders, index order breaking ties
  std::array<size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return remainders[a] > remainders[b]; });
  for (size_t k = 0; assigned < n; ++k) {
    sizes[order[k % 3]]++;
    assigned++;
  }
  return sizes;
}

namespace {

void check_ratios(const std::array<double, 3>& ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) fail(Errc::invalid_config, "split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(Errc::invalid_config, "split ratios must sum to 1, got " + format_double(sum));
}

void assign_contiguous(std::vector<std::string>& ids, const std::array<size_t, 3>& sizes,
                       SplitAssignment& out) {
  size_t pos = 0;
  for (size_t s = 0; s < 3; ++s) {
    for (size_t k = 0; k < sizes[s]; ++k) out.by_individual[ids[pos++]] = static_cast<Split>(s);
  }
}

}  // namespace

SplitAssignment split_cohort(const CohortManifest& manifest, const std::array<double, 3>& ratios,
                             uint64_t seed, bool stratified) {
  check_ratios(ratios);
  if (manifest.individual_count() == 0) fail(Errc::empty_cohort, "no individuals to split");

  SplitAssignment out;
  out.seed = seed;
  if (!stratified) {
    std::vector<std::string> ids = manifest.individual_ids;
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    rng.shuffle(ids);
    assign_contiguous(ids, largest_remainder_sizes(ids.size(), ratios), out);
    return out;
  }
  for (int label = 0; label <= 1; ++label) {
    std::vector<std::string> ids;
    for (const auto& id : manifest.individual_ids)
      if (manifest.label_of(id) == label) ids.push_back(id);
    if (ids.empty()) continue;
    std::sort(ids.begin(), ids.end());
    Rng rng(hash_combine(seed, static_cast<uint64_t>(label)));
    rng.shuffle(ids);
    assign_contiguous(ids, largest_remainder_sizes(ids.size(), ratios), out);
  }
  return out;
}

SplitAssignment load_split(const std::filesystem::path& csv_path) {
  CsvTable table = read_csv_file(csv_path);
  if (table.header != std::vector<std::string>{"individual_id", "split"})
    fail(Errc::missing_field, "split file header must be individual_id,split");
  SplitAssignment out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 2 || row[0].empty() || row[1].empty())
      fail(Errc::missing_field, "bad split row " + std::to_string(r));
    if (!out.by_individual.emplace(row[0], parse_split(row[1])).second)
      fail(Errc::invalid_config, "individual '" + row[0] + "' assigned twice");
  }
  return out;
}

std::string render_split(const SplitAssignment& split, const std::vector<std::string>& comments) {
  CsvTable table;
  table.comments = comments;
  table.header = {"individual_id", "split"};
  std::vector<std::string> ids;
  ids.reserve(split.by_individual.size());
  for (const auto& [id, s] : split.by_individual) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) table.rows.push_back({id, to_string(split.by_individual.at(id))});
  return render_csv(table);
}

}  // namespace retscreen
