#include "retscreen/train.hpp"

#include <algorithm>
#include <cmath>

#include "retscreen/metrics.hpp"
#include "retscreen/preprocess.hpp"

namespace retscreen {

const char* to_string(LrSchedule s) { return s == LrSchedule::constant ? "constant" : "step"; }

LrSchedule parse_lr_schedule(std::string_view s) {
  if (s == "constant") return LrSchedule::constant;
  if (s == "step") return LrSchedule::step;
  fail(Errc::bad_enum, "unknown lr schedule '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0)
    fail(Errc::invalid_config, "batch_size must be even and >= 2");
  if (epochs < 0) fail(Errc::invalid_config, "epochs must be >= 0");
  if (!(lr0 >= 0.0)) fail(Errc::invalid_config, "lr0 must be >= 0");
  if (schedule == LrSchedule::step && (step_every < 1 || !(step_factor > 0.0)))
    fail(Errc::invalid_config, "step schedule needs step_every >= 1 and step_factor > 0");
  if (l2 < 0.0 || lambda_bio < 0.0) fail(Errc::invalid_config, "l2 and lambda_bio must be >= 0");
}

double TrainConfig::lr_at(int epoch) const {
  if (schedule == LrSchedule::constant) return lr0;
  return lr0 * std::pow(step_factor, epoch / step_every);
}

AdamState AdamState::zeros(const ParamSet& params) {
  AdamState state;
  state.m = zeros_like(params);
  state.v = zeros_like(params);
  state.t = 0;
  return state;
}

namespace {

void adam_update_tensor(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, double lr,
                        const AdamConfig& cfg, double bias1, double bias2) {
  if (p.v.size() != g.v.size()) fail(Errc::shape_mismatch, "adam: parameter/gradient size differs");
  for (size_t i = 0; i < p.v.size(); ++i) {
    m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * g.v[i];
    v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * g.v[i] * g.v[i];
    const double m_hat = m.v[i] / bias1;
    const double v_hat = v.v[i] / bias2;
    p.v[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr,
               const AdamConfig& config) {
  if (params.conv_w.size() != grads.conv_w.size() || params.has_t2d() != grads.has_t2d() ||
      params.has_bio() != grads.has_bio())
    fail(Errc::shape_mismatch, "adam: parameter/gradient structure differs");
  state.t += 1;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.conv_w.size(); ++i) {
    adam_update_tensor(params.conv_w[i], grads.conv_w[i], state.m.conv_w[i], state.v.conv_w[i], lr,
                       config, bias1, bias2);
    adam_update_tensor(params.conv_b[i], grads.conv_b[i], state.m.conv_b[i], state.v.conv_b[i], lr,
                       config, bias1, bias2);
  }
  adam_update_tensor(params.trunk_w, grads.trunk_w, state.m.trunk_w, state.v.trunk_w, lr, config,
                     bias1, bias2);
  adam_update_tensor(params.trunk_b, grads.trunk_b, state.m.trunk_b, state.v.trunk_b, lr, config,
                     bias1, bias2);
  if (params.has_t2d()) {
    adam_update_tensor(params.t2d_w, grads.t2d_w, state.m.t2d_w, state.v.t2d_w, lr, config, bias1,
                       bias2);
    adam_update_tensor(params.t2d_b, grads.t2d_b, state.m.t2d_b, state.v.t2d_b, lr, config, bias1,
                       bias2);
  }
  if (params.has_bio()) {
    adam_update_tensor(params.bio_w, grads.bio_w, state.m.bio_w, state.v.bio_w, lr, config, bias1,
                       bias2);
    adam_update_tensor(params.bio_b, grads.bio_b, state.m.bio_b, state.v.bio_b, lr, config, bias1,
                       bias2);
  }
}

std::vector<std::vector<size_t>> make_balanced_batches(std::span<const int> labels, int batch_size,
                                                       Rng& rng) {
  if (batch_size < 2 || batch_size % 2 != 0)
    fail(Errc::invalid_config, "batch_size must be even and >= 2");
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) fail(Errc::one_class_only, "balanced batches need both classes");

  std::vector<size_t>& major = pos.size() >= neg.size() ? pos : neg;
  std::vector<size_t>& minor = pos.size() >= neg.size() ? neg : pos;
  rng.shuffle(major);

  const size_t half = static_cast<size_t>(batch_size) / 2;
  const size_t n_batches = (major.size() + half - 1) / half;
  std::vector<std::vector<size_t>> batches(n_batches);
  for (size_t b = 0; b < n_batches; ++b) {
    std::vector<size_t>& batch = batches[b];
    batch.reserve(static_cast<size_t>(batch_size));
    for (size_t k = 0; k < half; ++k) batch.push_back(major[(b * half + k) % major.size()]);
    for (size_t k = 0; k < half; ++k) {
      const size_t j =
          static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(minor.size()) - 1));
      batch.push_back(minor[j]);
    }
  }
  return batches;
}

std::vector<double> predict_probs(const Model& model, const LoadedSet& set, int threads) {
  if (!model.params.has_t2d()) fail(Errc::mode_mismatch, "model has no t2d head");
  std::vector<double> probs(set.samples.size(), 0.0);
  parallel_for(set.samples.size(), threads, [&](size_t i) {
    const std::vector<ImageTensor> one{center_crop(set.samples[i].image, model.config.input_size)};
    probs[i] = forward(model, one, 1).t2d_prob[0];
  });
  return probs;
}

double evaluate_auc(const Model& model, const LoadedSet& set, int threads) {
  return roc_auc(predict_probs(model, set, threads), set.labels());
}

TrainOutcome train_model(Model model, const LoadedSet& train_set, const LoadedSet& val_set,
                         const AugmentParams& augment, const TrainConfig& config,
                         const std::optional<std::filesystem::path>& checkpoint_out) {
  config.validate();
  if (train_set.samples.empty() || val_set.samples.empty())
    fail(Errc::empty_input, "train and validation sets must be non-empty");

  const std::vector<int> train_labels = train_set.labels();
  Rng batch_rng(derive_seed(config.seed, "batches"));
  Rng aug_rng(derive_seed(config.seed, "augment"));
  AdamState adam = AdamState::zeros(model.params);

  TrainOutcome outcome;
  outcome.report.seed = config.seed;
  outcome.best_model = model;  // selection falls back to the initial weights

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr_at(epoch);
    const auto batches = make_balanced_batches(train_labels, config.batch_size, batch_rng);

    double loss_sum = 0.0;
    bool finite = true;
    for (const auto& batch_idx : batches) {
      std::vector<ImageTensor> batch;
      batch.reserve(batch_idx.size());
      Targets targets;
      for (size_t idx : batch_idx) {
        const LoadedSample& s = train_set.samples[idx];
        const AugmentationSpec spec = sample_augmentation(augment, aug_rng);
        batch.push_back(center_crop(apply_augmentation(s.image, spec), model.config.input_size));
        if (model.params.has_t2d()) targets.labels.push_back(s.label);
        if (model.params.has_bio())
          targets.biomarkers.insert(targets.biomarkers.end(), s.biomarkers.begin(),
                                    s.biomarkers.end());
      }
      LossComponents batch_loss;
      const ParamSet grads = gradients(model, batch, targets, config.lambda_bio, config.l2,
                                       config.threads, &batch_loss);
      if (!std::isfinite(batch_loss.total)) {
        finite = false;
        break;
      }
      loss_sum += batch_loss.total;
      adam_step(model.params, grads, adam, lr, config.adam);
    }
    if (!finite) {
      outcome.report.diverged = true;
      break;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = loss_sum / static_cast<double>(batches.size());
    stats.val_auc = evaluate_auc(model, val_set, config.threads);
    outcome.report.epochs.push_back(stats);

    if (outcome.report.best_epoch < 0 || stats.val_auc > outcome.report.best_val_auc) {
      outcome.report.best_epoch = epoch;
      outcome.report.best_val_auc = stats.val_auc;
      outcome.best_model = model;
    }
  }

  if (config.epochs == 0 || outcome.report.best_epoch < 0) {
    // no selection happened; evaluate the initial weights for the record
    outcome.report.best_epoch = -1;
    outcome.report.best_val_auc = evaluate_auc(outcome.best_model, val_set, config.threads);
  }

  if (checkpoint_out) {
    save_checkpoint(*checkpoint_out, outcome.best_model,
                    {{"seed", std::to_string(config.seed)},
                     {"best_epoch", std::to_string(outcome.report.best_epoch)},
                     {"best_val_auc", format_double(outcome.report.best_val_auc)}});
    outcome.report.checkpoint_path = checkpoint_out->string();
  }
  return outcome;
}

SeedSummary run_seeds(const std::function<Model(uint64_t)>& make_model, const LoadedSet& train_set,
                      const LoadedSet& val_set, const LoadedSet& test_set,
                      const AugmentParams& augment, TrainConfig config,
                      std::span<const uint64_t> seeds) {
  if (seeds.size() < 2) fail(Errc::invalid_config, "run_seeds needs at least 2 seeds");
  SeedSummary summary;
  std::vector<double> aucs;
  for (uint64_t seed : seeds) {
    SeedRun run;
    run.seed = seed;
    try {
      config.seed = seed;
      TrainOutcome outcome = train_model(make_model(seed), train_set, val_set, augment, config);
      run.report = outcome.report;
      if (outcome.report.diverged) {
        run.error_code = errc_name(Errc::divergence);
      } else {
        run.test_auc = evaluate_auc(outcome.best_model, test_set, config.threads);
        run.ok = true;
        aucs.push_back(run.test_auc);
      }
    } catch (const Error& e) {
      run.error_code = e.code_name();
    }
    summary.runs.push_back(std::move(run));
  }
  if (!aucs.empty()) {
    auto [mean, stdev] = summarize_seeds(aucs);
    summary.mean_auc = mean;
    summary.std_auc = stdev;
  }
  return summary;
}

}  // namespace retscreen
