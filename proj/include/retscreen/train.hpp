#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retscreen/augment.hpp"
#include "retscreen/dataset.hpp"
#include "retscreen/model.hpp"

namespace retscreen {

enum class LrSchedule { constant, step };
const char* to_string(LrSchedule s);
LrSchedule parse_lr_schedule(std::string_view s);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int batch_size = 18;  // must be even: one half per class
  int epochs = 15;
  double lr0 = 1e-3;
  LrSchedule schedule = LrSchedule::step;
  double step_factor = 0.5;
  int step_every = 10;
  double l2 = 1e-5;
  double lambda_bio = 0.25;
  AdamConfig adam;
  uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  double lr_at(int epoch) const;
};

struct AdamState {
  ParamSet m, v;
  int64_t t = 0;

  static AdamState zeros(const ParamSet& params);
};

// Standard Adam with bias correction; t increments once per call.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr,
               const AdamConfig& config);

// Per epoch the majority class makes one shuffled pass (the last chunk wraps
// around to stay full), the minority class is drawn with replacement; every
// batch holds exactly batch_size/2 indices of each class.
std::vector<std::vector<size_t>> make_balanced_batches(std::span<const int> labels,
                                                       int batch_size, Rng& rng);

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_auc = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;  // argmax validation AUC, earliest on ties
  double best_val_auc = 0.0;
  std::string checkpoint_path;
  uint64_t seed = 0;
  bool diverged = false;
};

struct TrainOutcome {
  TrainReport report;
  Model best_model;
};

// Center-crop to the model input and run the t2d head; no TTA.
std::vector<double> predict_probs(const Model& model, const LoadedSet& set, int threads);
double evaluate_auc(const Model& model, const LoadedSet& set, int threads);

// Balanced-batch Adam training with per-epoch validation AUC selection.
// On a non-finite loss the loop stops, the report is flagged diverged, and
// the best (last finite) model so far is returned.
TrainOutcome train_model(Model model, const LoadedSet& train_set, const LoadedSet& val_set,
                         const AugmentParams& augment, const TrainConfig& config,
                         const std::optional<std::filesystem::path>& checkpoint_out = {});

struct SeedRun {
  uint64_t seed = 0;
  bool ok = false;
  std::string error_code;
  TrainReport report;
  double test_auc = 0.0;
};

struct SeedSummary {
  std::vector<SeedRun> runs;
  double mean_auc = 0.0;
  double std_auc = 0.0;  // sample std over successful runs
};

// Trains one model per seed via make_model(seed), evaluates each selected
// checkpoint on the test set, and summarizes mean and sample std. Failures
// are flagged per seed and excluded from the summary.
SeedSummary run_seeds(const std::function<Model(uint64_t)>& make_model, const LoadedSet& train_set,
                      const LoadedSet& val_set, const LoadedSet& test_set,
                      const AugmentParams& augment, TrainConfig config,
                      std::span<const uint64_t> seeds);

}  // namespace retscreen
