#include "retscreen/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "retscreen/aggregate.hpp"
#include "retscreen/config.hpp"
#include "retscreen/csv.hpp"
#include "retscreen/dataset.hpp"
#include "retscreen/metrics.hpp"
#include "retscreen/synthgen.hpp"
#include "retscreen/train.hpp"
#include "retscreen/uncertainty.hpp"

namespace retscreen::cli {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config;
  std::string out = "out";
  int64_t seed = -1;  // < 0 keeps the config's seed
  int threads = 0;    // 0 keeps the config's thread count
};

ExperimentConfig load_config(const CommonOpts& opts) {
  ExperimentConfig cfg = ExperimentConfig::load(opts.config);
  if (opts.seed >= 0) {
    cfg.root_seed = static_cast<uint64_t>(opts.seed);
    cfg.synth.seed = derive_seed(cfg.root_seed, "synth");
  }
  if (opts.threads > 0) {
    cfg.threads = opts.threads;
    cfg.train.threads = opts.threads;
  }
  return cfg;
}

fs::path manifest_path(const ExperimentConfig& cfg, const CommonOpts& opts) {
  return cfg.manifest_path.empty() ? fs::path(opts.out) / "manifest.csv" : cfg.manifest_path;
}

fs::path split_path(const ExperimentConfig& cfg, const CommonOpts& opts) {
  return cfg.split_path.empty() ? fs::path(opts.out) / "split.csv" : cfg.split_path;
}

// ---- synth ----

int cmd_synth(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts);
  const fs::path out_dir(opts.out);
  const CohortManifest manifest = generate_cohort(cfg.synth, out_dir);
  write_file_atomic(out_dir / "manifest.csv",
                    render_manifest(manifest, {cfg.provenance_comment()}));
  std::cout << "synth: " << manifest.individual_count() << " individuals, "
            << manifest.samples.size() << " images -> " << (out_dir / "manifest.csv").string()
            << "\n";
  return 0;
}

// ---- split ----

int cmd_split(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts);
  const CohortManifest manifest = load_manifest(manifest_path(cfg, opts));
  const SplitAssignment split = split_cohort(manifest, cfg.split_ratios,
                                             derive_seed(cfg.root_seed, "split"),
                                             cfg.split_stratified);
  const fs::path out = fs::path(opts.out) / "split.csv";
  write_file_atomic(out, render_split(split, {cfg.provenance_comment()}));
  const auto counts = split.counts();
  std::cout << "split: train=" << counts[0] << " val=" << counts[1] << " test=" << counts[2]
            << " -> " << out.string() << "\n";
  return 0;
}

// ---- train ----

Model make_initial_model(const ExperimentConfig& cfg, uint64_t seed) {
  if (cfg.init_kind == InitKind::checkpoint)
    return init_model_from_checkpoint(cfg.model, cfg.init_checkpoint, seed);
  return init_model(cfg.model, seed);
}

int cmd_train(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts);
  const fs::path out_dir(opts.out);
  const fs::path manifest_file = manifest_path(cfg, opts);
  const CohortManifest manifest = load_manifest(manifest_file);
  const SplitAssignment split = load_split(split_path(cfg, opts));
  const fs::path manifest_dir = manifest_file.parent_path();

  const LoadedSet train_set =
      load_set(manifest, manifest_dir, &split, Split::train, cfg.resize_to, cfg.threads);
  const LoadedSet val_set =
      load_set(manifest, manifest_dir, &split, Split::validation, cfg.resize_to, cfg.threads);
  const LoadedSet test_set =
      load_set(manifest, manifest_dir, &split, Split::test, cfg.resize_to, cfg.threads);

  CsvTable summary;
  summary.comments = {cfg.provenance_comment()};
  summary.header = {"seed", "head_mode", "init", "best_epoch", "best_val_auc", "test_auc"};

  bool any_failed = false;
  std::string first_error;
  for (uint64_t seed : cfg.train_seeds) {
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = seed;
    const fs::path ckpt = out_dir / ("model_seed" + std::to_string(seed) + ".ckpt");
    std::string test_auc_str = "";
    try {
      const TrainOutcome outcome =
          train_model(make_initial_model(cfg, seed), train_set, val_set, cfg.augment, train_cfg,
                      ckpt);

      std::string jsonl;
      for (const EpochStats& e : outcome.report.epochs) {
        nlohmann::json line{{"epoch", e.epoch},
                            {"lr", e.lr},
                            {"train_loss", e.train_loss},
                            {"val_auc", e.val_auc},
                            {"seed", seed},
                            {"config_hash", cfg.ini.hash}};
        jsonl += line.dump() + "\n";
      }
      write_file_atomic(out_dir / ("train_report_seed" + std::to_string(seed) + ".jsonl"), jsonl);

      if (outcome.report.diverged) {
        any_failed = true;
        if (first_error.empty())
          first_error = std::string(errc_name(Errc::divergence)) + ": seed " +
                        std::to_string(seed) + " hit a non-finite loss";
      } else {
        const double test_auc = evaluate_auc(outcome.best_model, test_set, cfg.threads);
        test_auc_str = format_double(test_auc);
        std::cout << "train: seed " << seed << " best_epoch " << outcome.report.best_epoch
                  << " val_auc " << format_fixed(outcome.report.best_val_auc, 4) << " test_auc "
                  << format_fixed(test_auc, 4) << "\n";
      }
      summary.rows.push_back({std::to_string(seed), to_string(cfg.model.head_mode),
                              cfg.init_kind == InitKind::checkpoint ? "checkpoint" : "random",
                              std::to_string(outcome.report.best_epoch),
                              format_double(outcome.report.best_val_auc), test_auc_str});
    } catch (const Error& e) {
      any_failed = true;
      if (first_error.empty()) first_error = e.what();
      summary.rows.push_back({std::to_string(seed), to_string(cfg.model.head_mode),
                              cfg.init_kind == InitKind::checkpoint ? "checkpoint" : "random", "",
                              "", ""});
    }
  }
  write_file_atomic(out_dir / "summary.csv", render_csv(summary));
  if (any_failed) {
    std::cerr << "error: " << first_error << "\n";
    return 1;
  }
  return 0;
}

// ---- predict ----

int cmd_predict(const CommonOpts& opts, const std::string& checkpoint,
                const std::string& split_name) {
  const ExperimentConfig cfg = load_config(opts);
  const fs::path manifest_file = manifest_path(cfg, opts);
  const CohortManifest manifest = load_manifest(manifest_file);

  std::optional<Split> which;
  std::optional<SplitAssignment> split;
  if (split_name != "all") {
    which = parse_split(split_name);
    split = load_split(split_path(cfg, opts));
  }
  const LoadedSet set = load_set(manifest, manifest_file.parent_path(),
                                 split ? &*split : nullptr, which, cfg.resize_to, cfg.threads);

  const Model model = load_checkpoint(checkpoint);
  const uint64_t tta_seed = derive_seed(cfg.root_seed, "tta");

  std::vector<PredictionDistribution> dists(set.samples.size());
  parallel_for(set.samples.size(), cfg.threads, [&](size_t i) {
    dists[i] = tta_predict(model, set.samples[i].image, set.samples[i].image_id, cfg.tta_k,
                           cfg.augment, tta_seed);
  });

  CsvTable table;
  table.comments = {cfg.provenance_comment()};
  table.header = {"image_id", "individual_id", "eye",  "centering", "label",
                  "k",        "mean",          "variance", "proximity"};
  if (cfg.tta_replica_columns)
    for (int r = 1; r <= cfg.tta_k; ++r) table.header.push_back("r" + std::to_string(r));
  for (size_t i = 0; i < set.samples.size(); ++i) {
    const LoadedSample& s = set.samples[i];
    std::vector<std::string> row{s.image_id,
                                 s.individual_id,
                                 to_string(s.eye),
                                 to_string(s.centering),
                                 std::to_string(s.label),
                                 std::to_string(cfg.tta_k),
                                 format_double(dists[i].mean),
                                 format_double(dists[i].variance),
                                 format_double(dists[i].proximity)};
    if (cfg.tta_replica_columns)
      for (double r : dists[i].replicas) row.push_back(format_double(r));
    table.rows.push_back(std::move(row));
  }
  const fs::path out = fs::path(opts.out) / "predictions.csv";
  write_file_atomic(out, render_csv(table));
  std::cout << "predict: " << set.samples.size() << " images -> " << out.string() << "\n";
  return 0;
}

// ---- refer ----

struct PredictionRow {
  std::string image_id;
  std::string individual_id;
  int label = 0;
  double mean = 0.0;
  double variance = 0.0;
  double proximity = 0.0;
};

std::vector<PredictionRow> read_predictions(const fs::path& path) {
  const CsvTable table = read_csv_file(path);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < table.header.size(); ++i) col[table.header[i]] = i;
  for (const char* need : {"image_id", "individual_id", "label", "mean", "variance", "proximity"})
    if (!col.count(need))
      fail(Errc::missing_field, std::string("predictions file lacks column '") + need + "'");
  std::vector<PredictionRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    PredictionRow row;
    row.image_id = r[col["image_id"]];
    row.individual_id = r[col["individual_id"]];
    row.label = r[col["label"]] == "1" ? 1 : 0;
    row.mean = std::stod(r[col["mean"]]);
    row.variance = std::stod(r[col["variance"]]);
    row.proximity = std::stod(r[col["proximity"]]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string referral_svg(const std::vector<ReferralCurve>& curves, const std::string& provenance) {
  const int width = 640, height = 420;
  const int left = 70, right = 20, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_max = 0.5, y_min = 1.0, y_max = 0.0;
  for (const auto& curve : curves)
    for (const auto& p : curve.points) {
      x_max = std::max(x_max, p.fraction);
      if (p.auc) {
        y_min = std::min(y_min, *p.auc);
        y_max = std::max(y_max, *p.auc);
      }
    }
  if (y_min > y_max) {
    y_min = 0.0;
    y_max = 1.0;
  }
  const double pad = std::max(0.02, (y_max - y_min) * 0.1);
  y_min = std::max(0.0, y_min - pad);
  y_max = std::min(1.0, y_max + pad);

  auto px = [&](double f) { return left + plot_w * (x_max > 0 ? f / x_max : 0.0); };
  auto py = [&](double a) { return top + plot_h * (1.0 - (a - y_min) / (y_max - y_min)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  svg << "<!--" << provenance << " -->\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double f = x_max * i / 5.0;
    svg << "<text x=\"" << format_fixed(px(f), 1) << "\" y=\"" << top + plot_h + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">" << format_fixed(f, 2) << "</text>\n";
    const double a = y_min + (y_max - y_min) * i / 5.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << format_fixed(py(a) + 4, 1)
        << "\" font-size=\"12\" text-anchor=\"end\">" << format_fixed(a, 3) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">referral fraction</text>\n";
  svg << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">ROC-AUC (retained)</text>\n";

  const std::array<const char*, 2> colors = {"#1f77b4", "#d62728"};
  for (size_t c = 0; c < curves.size(); ++c) {
    std::ostringstream pts;
    for (const auto& p : curves[c].points) {
      if (!p.auc) continue;
      pts << format_fixed(px(p.fraction), 2) << "," << format_fixed(py(*p.auc), 2) << " ";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << colors[c % colors.size()]
        << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    svg << "<text x=\"" << left + 12 << "\" y=\"" << top + 16 + 18 * static_cast<int>(c)
        << "\" font-size=\"12\" fill=\"" << colors[c % colors.size()] << "\">"
        << to_string(curves[c].measure) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int cmd_refer(const CommonOpts& opts, std::string predictions_file) {
  const ExperimentConfig cfg = load_config(opts);
  if (predictions_file.empty())
    predictions_file = (fs::path(opts.out) / "predictions.csv").string();
  const std::vector<PredictionRow> rows = read_predictions(predictions_file);

  std::vector<ReferralCurve> curves;
  for (UncertaintyMeasure measure : {UncertaintyMeasure::variance, UncertaintyMeasure::proximity}) {
    std::vector<ReferralItem> items;
    items.reserve(rows.size());
    for (const PredictionRow& r : rows) {
      const double score = measure == UncertaintyMeasure::variance ? r.variance
                                                                   : 0.5 - r.proximity;
      items.push_back({r.image_id, r.label, r.mean, score});
    }
    curves.push_back(referral_curve(std::move(items), cfg.refer_fractions, measure));
  }

  CsvTable table;
  table.comments = {cfg.provenance_comment()};
  table.header = {"measure", "fraction", "retained_n", "auc"};
  for (const auto& curve : curves)
    for (const auto& p : curve.points)
      table.rows.push_back({to_string(curve.measure), format_double(p.fraction),
                            std::to_string(p.retained_n), p.auc ? format_double(*p.auc) : ""});
  const fs::path out_csv = fs::path(opts.out) / "referral.csv";
  write_file_atomic(out_csv, render_csv(table));
  write_file_atomic(fs::path(opts.out) / "referral.svg",
                    referral_svg(curves, cfg.provenance_comment()));
  std::cout << "refer: " << rows.size() << " images -> " << out_csv.string() << "\n";
  return 0;
}

// ---- aggregate ----

int cmd_aggregate(const CommonOpts& opts, std::string predictions_file) {
  const ExperimentConfig cfg = load_config(opts);
  if (predictions_file.empty())
    predictions_file = (fs::path(opts.out) / "predictions.csv").string();
  const CohortManifest manifest = load_manifest(manifest_path(cfg, opts));
  const SplitAssignment split = load_split(split_path(cfg, opts));
  const std::vector<PredictionRow> rows = read_predictions(predictions_file);

  std::vector<std::pair<std::string, double>> means;
  means.reserve(rows.size());
  for (const PredictionRow& r : rows) means.emplace_back(r.image_id, r.mean);
  const std::vector<IndividualSlots> grouped = group_by_individual(means, manifest);

  CsvTable features_table;
  features_table.comments = {cfg.provenance_comment()};
  features_table.header = {"individual_id", "label"};
  for (const char* slot : kSlotNames)
    for (const char* kind : {"m_", "v_", "c_"})
      features_table.header.push_back(std::string(kind) + slot);
  features_table.header.push_back("padded");

  std::vector<IndividualFeatureVector> fit_features, test_features;
  std::vector<const IndividualSlots*> test_slots;
  for (const IndividualSlots& slots : grouped) {
    auto it = split.by_individual.find(slots.individual_id);
    if (it == split.by_individual.end())
      fail(Errc::unknown_individual,
           "individual '" + slots.individual_id + "' missing from split");
    const IndividualFeatureVector fv = extract_features(slots);

    std::vector<std::string> row{fv.individual_id, std::to_string(fv.label)};
    for (int s = 0; s < 4; ++s) {
      row.push_back(format_double(fv.features[static_cast<size_t>(3 * s)]));
      row.push_back(format_double(fv.features[static_cast<size_t>(3 * s + 1)]));
      row.push_back(format_double(fv.features[static_cast<size_t>(3 * s + 2)]));
    }
    std::string padded;
    for (int slot : fv.padded_slots) {
      if (!padded.empty()) padded += ';';
      padded += kSlotNames[static_cast<size_t>(slot)];
    }
    row.push_back(padded);
    features_table.rows.push_back(std::move(row));

    if (it->second == Split::test) {
      test_features.push_back(fv);
      test_slots.push_back(&slots);
    } else {
      fit_features.push_back(fv);  // TRAIN + VALIDATION train the aggregators
    }
  }
  write_file_atomic(fs::path(opts.out) / "features.csv", render_csv(features_table));

  const LogRegModel logreg = fit_logreg(fit_features, cfg.logreg);
  const GnbModel gnb = fit_gnb(fit_features, cfg.gnb_variance_floor);

  CsvTable agg_table;
  agg_table.comments = {cfg.provenance_comment()};
  agg_table.header = {"individual_id", "label", "strategy", "score"};
  std::map<std::string, ScoredSet> by_strategy;
  for (size_t i = 0; i < test_features.size(); ++i) {
    const IndividualSlots& slots = *test_slots[i];
    const IndividualFeatureVector& fv = test_features[i];
    const std::map<std::string, double> scores = {
        {"eye_mean",
         cfg.eye_mean_per_eye ? eye_mean_aggregate(slots) : global_mean_aggregate(slots)},
        {"eye_max", eye_max_aggregate(slots)},
        {"logreg", predict(logreg, fv)},
        {"gnb", predict(gnb, fv)},
    };
    for (const auto& [strategy, score] : scores) {
      agg_table.rows.push_back(
          {fv.individual_id, std::to_string(fv.label), strategy, format_double(score)});
      by_strategy[strategy].scores.push_back(score);
      by_strategy[strategy].labels.push_back(fv.label);
    }
  }
  write_file_atomic(fs::path(opts.out) / "aggregated.csv", render_csv(agg_table));

  // image-level reference row: TTA means over test images
  ScoredSet image_level;
  for (const PredictionRow& r : rows) {
    auto it = split.by_individual.find(r.individual_id);
    if (it != split.by_individual.end() && it->second == Split::test) {
      image_level.scores.push_back(r.mean);
      image_level.labels.push_back(r.label);
    }
  }

  CsvTable summary;
  summary.comments = {cfg.provenance_comment()};
  summary.header = {"strategy", "n", "auc"};
  summary.rows.push_back({"image_level", std::to_string(image_level.scores.size()),
                          format_double(roc_auc(image_level))});
  for (const auto& [strategy, set] : by_strategy)
    summary.rows.push_back(
        {strategy, std::to_string(set.scores.size()), format_double(roc_auc(set))});
  const fs::path out = fs::path(opts.out) / "aggregate_summary.csv";
  write_file_atomic(out, render_csv(summary));
  std::cout << "aggregate: " << test_features.size() << " test individuals -> " << out.string()
            << "\n";
  return 0;
}

// ---- report ----

int cmd_report(const CommonOpts& opts, const std::vector<std::string>& inputs) {
  const ExperimentConfig cfg = load_config(opts);
  std::vector<fs::path> files;
  const fs::path out_dir(opts.out);
  if (fs::exists(out_dir)) {
    for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name == "summary.csv" || name == "aggregate_summary.csv") files.push_back(entry.path());
    }
  }
  for (const std::string& extra : inputs) files.emplace_back(extra);
  std::sort(files.begin(), files.end());

  // (section, strategy) -> AUC values collected across prior outputs
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const fs::path& file : files) {
    const CsvTable table = read_csv_file(file);
    if (table.header ==
        std::vector<std::string>{"seed", "head_mode", "init", "best_epoch", "best_val_auc",
                                 "test_auc"}) {
      for (const auto& row : table.rows) {
        if (row[5].empty()) continue;  // failed seed
        groups[{"image_level", row[1] + "/" + row[2]}].push_back(std::stod(row[5]));
      }
    } else if (table.header == std::vector<std::string>{"strategy", "n", "auc"}) {
      for (const auto& row : table.rows)
        groups[{"individual_level", row[0]}].push_back(std::stod(row[2]));
    }
  }
  if (groups.empty()) fail(Errc::empty_input, "no summary files found to report on");

  CsvTable report;
  report.comments = {cfg.provenance_comment()};
  report.header = {"section", "strategy", "n_runs", "mean_auc", "std_auc"};
  std::cout << "section            strategy                 n    AUC [±std]\n";
  for (const auto& [key, values] : groups) {
    const auto [mean, stdev] = summarize_seeds(values);
    report.rows.push_back({key.first, key.second, std::to_string(values.size()),
                           format_double(mean), format_double(stdev)});
    char line[160];
    std::snprintf(line, sizeof(line), "%-18s %-24s %-4zu %.3f [±%.3f]\n", key.first.c_str(),
                  key.second.c_str(), values.size(), mean, stdev);
    std::cout << line;
  }
  const fs::path out = out_dir / "report.csv";
  write_file_atomic(out, render_csv(report));
  std::cout << "report -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"retinal T2D screening pipeline"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string checkpoint, split_name = "test", predictions_file;
  std::vector<std::string> report_inputs;

  auto add_common = [&opts](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "experiment config file")->required();
    cmd->add_option("--out", opts.out, "output directory");
    cmd->add_option("--seed", opts.seed, "override the config root seed");
    cmd->add_option("--threads", opts.threads, "override the worker thread count");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  add_common(synth);
  CLI::App* split = app.add_subcommand("split", "assign individuals to train/val/test");
  add_common(split);
  CLI::App* train = app.add_subcommand("train", "train one model per configured seed");
  add_common(train);
  CLI::App* predict = app.add_subcommand("predict", "TTA predictions for a checkpoint");
  add_common(predict);
  predict->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  predict->add_option("--split-name", split_name, "train, val, test or all");
  CLI::App* refer = app.add_subcommand("refer", "referral curves from predictions");
  add_common(refer);
  refer->add_option("--predictions", predictions_file, "predictions CSV");
  CLI::App* aggregate = app.add_subcommand("aggregate", "individual-level aggregation");
  add_common(aggregate);
  aggregate->add_option("--predictions", predictions_file, "predictions CSV (all splits)");
  CLI::App* report = app.add_subcommand("report", "summaries from prior output files");
  add_common(report);
  report->add_option("--inputs", report_inputs, "extra summary files");

  std::vector<const char*> argv;
  argv.push_back("retscreen");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: BAD_USAGE: " << e.what() << "\n";
    std::cerr << app.help();
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(opts);
    if (split->parsed()) return cmd_split(opts);
    if (train->parsed()) return cmd_train(opts);
    if (predict->parsed()) return cmd_predict(opts, checkpoint, split_name);
    if (refer->parsed()) return cmd_refer(opts, predictions_file);
    if (aggregate->parsed()) return cmd_aggregate(opts, predictions_file);
    if (report->parsed()) return cmd_report(opts, report_inputs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: INTERNAL: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: BAD_USAGE: no subcommand\n";
  return 2;
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args);
}

}  // namespace retscreen::cli
