#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "retscreen/aggregate.hpp"
#include "retscreen/augment.hpp"
#include "retscreen/model.hpp"
#include "retscreen/synthgen.hpp"
#include "retscreen/train.hpp"

namespace retscreen {

// INI-style config: [section] headers, key = value lines, '#' or ';'
// comments. Values keep everything after the first '='.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;
  uint64_t hash = 0;  // FNV-1a of the file bytes, recorded in every output

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  int64_t get_int(const std::string& section, const std::string& key, int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
};

IniFile parse_ini(const std::string& text);
IniFile load_ini(const std::filesystem::path& path);

enum class InitKind { random, checkpoint };

// Everything a subcommand needs, assembled from the config file with the
// documented defaults. All randomness derives from the single root seed.
struct ExperimentConfig {
  IniFile ini;
  std::filesystem::path config_dir;

  uint64_t root_seed = 0;
  int threads = 1;

  // [data]
  std::filesystem::path manifest_path;  // resolved against the config location
  std::filesystem::path split_path;
  int resize_to = 1024;

  // [synth]
  SynthConfig synth;

  // [split]
  std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
  bool split_stratified = false;

  // [augment]
  AugmentParams augment;

  // [model]
  ModelConfig model;
  InitKind init_kind = InitKind::random;
  std::filesystem::path init_checkpoint;

  // [train]
  TrainConfig train;
  std::vector<uint64_t> train_seeds{1, 2, 3};

  // [tta]
  int tta_k = 30;
  bool tta_replica_columns = false;

  // [refer]
  std::vector<double> refer_fractions{0,    0.05, 0.1,  0.15, 0.2, 0.25,
                                      0.3,  0.35, 0.4,  0.45, 0.5};

  // [aggregate]
  LogRegConfig logreg;
  double gnb_variance_floor = 1e-9;
  bool eye_mean_per_eye = true;  // false = plain mean over all images

  std::string provenance_comment() const;  // " config_hash=... seed=..."

  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace retscreen
