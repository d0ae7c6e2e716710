#include "retscreen/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>

#include "retscreen/csv.hpp"

namespace retscreen {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  auto s = sections.find(section);
  if (s == sections.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

int64_t IniFile::get_int(const std::string& section, const std::string& key,
                         int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  char* end = nullptr;
  const long long parsed = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    fail(Errc::invalid_config, "[" + section + "] " + key + " must be an integer, got '" + v + "'");
  return parsed;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    fail(Errc::invalid_config, "[" + section + "] " + key + " must be a number, got '" + v + "'");
  return parsed;
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(Errc::invalid_config, "[" + section + "] " + key + " must be a boolean, got '" + v + "'");
}

std::vector<double> IniFile::get_doubles(const std::string& section, const std::string& key,
                                         const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const std::string& part : split_fields(get(section, key, ""))) {
    const std::string token = trim(part);
    char* end = nullptr;
    const double parsed = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
      fail(Errc::invalid_config, "[" + section + "] " + key + " has a bad entry '" + token + "'");
    out.push_back(parsed);
  }
  return out;
}

IniFile parse_ini(const std::string& text) {
  IniFile ini;
  ini.hash = fnv1a64(text);
  std::string section;
  size_t start = 0;
  size_t line_no = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(Errc::invalid_config, "bad section header at line " + std::to_string(line_no));
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      ini.sections[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::invalid_config, "expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty())
      fail(Errc::invalid_config, "empty key at line " + std::to_string(line_no));
    ini.sections[section][key] = value;
  }
  return ini;
}

IniFile load_ini(const std::filesystem::path& path) { return parse_ini(read_text_file(path)); }

std::string ExperimentConfig::provenance_comment() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), " config_hash=%016llx seed=%llu",
                static_cast<unsigned long long>(ini.hash),
                static_cast<unsigned long long>(root_seed));
  return buf;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  ExperimentConfig cfg;
  cfg.ini = load_ini(path);
  cfg.config_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const IniFile& ini = cfg.ini;

  cfg.root_seed = static_cast<uint64_t>(ini.get_int("run", "seed", 0));
  cfg.threads = static_cast<int>(ini.get_int("run", "threads", 1));
  if (cfg.threads < 1) fail(Errc::invalid_config, "[run] threads must be >= 1");

  auto resolve = [&cfg](const std::string& rel) -> std::filesystem::path {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : cfg.config_dir / p;
  };
  if (ini.has("data", "manifest")) cfg.manifest_path = resolve(ini.get("data", "manifest", ""));
  if (ini.has("data", "split")) cfg.split_path = resolve(ini.get("data", "split", ""));
  cfg.resize_to = static_cast<int>(ini.get_int("data", "resize_to", 1024));

  cfg.synth.n_individuals = static_cast<int>(ini.get_int("synth", "n_individuals", 600));
  cfg.synth.t2d_fraction = ini.get_double("synth", "t2d_fraction", 0.345);
  cfg.synth.images_per_eye_min = static_cast<int>(ini.get_int("synth", "images_per_eye_min", 1));
  cfg.synth.images_per_eye_max = static_cast<int>(ini.get_int("synth", "images_per_eye_max", 2));
  cfg.synth.image_size = static_cast<int>(ini.get_int("synth", "image_size", 64));
  cfg.synth.latent_shift = ini.get_double("synth", "latent_shift", 1.0);
  cfg.synth.image_noise_std = ini.get_double("synth", "image_noise_std", 0.02);
  cfg.synth.seed = derive_seed(cfg.root_seed, "synth");

  {
    const std::vector<double> ratios =
        ini.get_doubles("split", "ratios", {0.6, 0.2, 0.2});
    if (ratios.size() != 3) fail(Errc::invalid_config, "[split] ratios needs three values");
    std::copy(ratios.begin(), ratios.end(), cfg.split_ratios.begin());
  }
  cfg.split_stratified = ini.get_bool("split", "stratified", false);

  cfg.augment.translate_px = static_cast<int>(ini.get_int("augment", "translate_px", 20));
  cfg.augment.rotate_deg = ini.get_double("augment", "rotate_deg", 360.0);
  cfg.augment.flip_h = ini.get_bool("augment", "flip_h", true);
  cfg.augment.flip_v = ini.get_bool("augment", "flip_v", true);
  cfg.augment.intensity_shift = ini.get_double("augment", "intensity_shift", 20.0 / 256.0);
  cfg.augment.color_shift = ini.get_double("augment", "color_shift", 30.0 / 256.0);
  cfg.augment.contrast_shift = ini.get_double("augment", "contrast_shift", 0.1);
  if (cfg.augment.translate_px < 0 || cfg.augment.rotate_deg < 0.0 ||
      cfg.augment.rotate_deg > 360.0 || cfg.augment.intensity_shift < 0.0 ||
      cfg.augment.color_shift < 0.0 || cfg.augment.contrast_shift < 0.0)
    fail(Errc::invalid_config, "[augment] ranges must be non-negative, rotate_deg <= 360");

  cfg.model.input_size = static_cast<int>(ini.get_int("model", "input_size", 800));
  {
    const std::vector<double> channels =
        ini.get_doubles("model", "conv_channels", {8, 16, 32, 64});
    cfg.model.conv_blocks.clear();
    for (double c : channels) cfg.model.conv_blocks.push_back({static_cast<int>(c), 3, 1, true});
  }
  cfg.model.trunk_feature_dim = static_cast<int>(ini.get_int("model", "trunk_feature_dim", 64));
  cfg.model.head_mode = parse_head_mode(ini.get("model", "head_mode", "multi_target"));
  {
    const std::string init = ini.get("model", "init", "random");
    if (init == "random") {
      cfg.init_kind = InitKind::random;
    } else if (init.rfind("checkpoint:", 0) == 0) {
      cfg.init_kind = InitKind::checkpoint;
      cfg.init_checkpoint = resolve(init.substr(std::string("checkpoint:").size()));
    } else {
      fail(Errc::invalid_config, "[model] init must be 'random' or 'checkpoint:PATH'");
    }
  }

  cfg.train.batch_size = static_cast<int>(ini.get_int("train", "batch_size", 18));
  cfg.train.epochs = static_cast<int>(ini.get_int("train", "epochs", 15));
  cfg.train.lr0 = ini.get_double("train", "lr0", 1e-3);
  cfg.train.schedule = parse_lr_schedule(ini.get("train", "lr_schedule", "step"));
  cfg.train.step_factor = ini.get_double("train", "step_factor", 0.5);
  cfg.train.step_every = static_cast<int>(ini.get_int("train", "step_every", 10));
  cfg.train.l2 = ini.get_double("train", "l2", 1e-5);
  cfg.train.lambda_bio = ini.get_double("train", "lambda_bio", 0.25);
  cfg.train.threads = cfg.threads;
  {
    const std::vector<double> seeds = ini.get_doubles("train", "seeds", {1, 2, 3});
    cfg.train_seeds.clear();
    for (double s : seeds) cfg.train_seeds.push_back(static_cast<uint64_t>(s));
    if (cfg.train_seeds.empty()) fail(Errc::invalid_config, "[train] seeds must be non-empty");
  }

  cfg.tta_k = static_cast<int>(ini.get_int("tta", "k", 30));
  cfg.tta_replica_columns = ini.get_bool("tta", "replica_columns", false);

  cfg.refer_fractions = ini.get_doubles("refer", "fractions", cfg.refer_fractions);

  cfg.logreg.lr = ini.get_double("aggregate", "logreg_lr", 0.1);
  cfg.logreg.iterations = static_cast<int>(ini.get_int("aggregate", "logreg_iterations", 500));
  cfg.logreg.l2 = ini.get_double("aggregate", "logreg_l2", 1e-4);
  cfg.gnb_variance_floor = ini.get_double("aggregate", "gnb_variance_floor", 1e-9);
  {
    const std::string mode = ini.get("aggregate", "eye_mean_mode", "per_eye");
    if (mode == "per_eye")
      cfg.eye_mean_per_eye = true;
    else if (mode == "global")
      cfg.eye_mean_per_eye = false;
    else
      fail(Errc::invalid_config, "[aggregate] eye_mean_mode must be per_eye or global");
  }
  return cfg;
}

}  // namespace retscreen
