// Copyright 2026 The edgepress authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgepress/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgepress/errors.hpp"
#include "edgepress/features.hpp"
#include "edgepress/metrics.hpp"
#include "edgepress/model.hpp"
#include "edgepress/model_io.hpp"
#include "edgepress/pruning.hpp"
#include "edgepress/quantization.hpp"
#include "edgepress/sparse.hpp"
#include "edgepress/sweep.hpp"

namespace edgepress::cli {

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  int n = 400;
  uint64_t seed = 1234;
  std::string out = "data";
};

struct FeaturesArgs {
  std::string manifest;
  std::string mode = "mfcc";
  std::string out = "features";
  std::vector<double> ratios{0.70, 0.15, 0.15};
  uint64_t seed = 1234;
  bool no_augment = false;
  int threads = 0;
};

struct TrainArgs {
  std::string config;
  std::string data = "features";
  std::string out = "run";
  int epochs = 0;      // 0 = value from the model config
  int batch = 0;
  double lr = 0.0;
  uint64_t seed = 0;   // 0 = seed from the model config
  int threads = 0;
};

struct PruneArgs {
  std::string model;
  std::string data = "features";
  std::string schedule = "polynomial";
  double sparsity = 0.9;
  int epochs = 10;
  double lr_scale = 0.1;
  std::vector<std::string> exclude;
  std::string out = "run";
  uint64_t seed = 1234;
};

struct QuantizeArgs {
  std::string model;
  int bits = 8;
  std::string out;
};

struct BenchArgs {
  std::string model;
  std::string data = "features";
  std::string out = "run";
  bool sparse = false;
  double density_threshold = 0.4;
  int warmup = 10;
  int samples = 64;
};

struct SweepArgs {
  std::string config;
  std::string out = "results";
  int threads = 0;
};

struct ReportArgs {
  std::string rows;
  std::string out = "results";
};

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

Dataset load_split(const std::string& dir, const char* split) {
  return load_dataset((fs::path(dir) / (std::string(split) + ".eprs")).string());
}

int run_synth(const SynthArgs& args) {
  std::cerr << "[synth] n=" << args.n << " seed=" << args.seed << " out=" << args.out << "\n";
  SyntheticDataset synth = generate_synthetic_dataset(args.n, args.seed);
  fs::create_directories(args.out);
  DatasetManifest manifest = synth.manifest;
  for (auto& e : manifest.entries) {
    const std::string file = e.id + ".wav";
    write_wav((fs::path(args.out) / file).string(), synth.signals.at(e.id));
    e.id = file;
  }
  write_manifest_csv((fs::path(args.out) / "manifest.csv").string(), manifest);
  std::cerr << "[synth] wrote " << manifest.entries.size() << " wav files + manifest.csv\n";
  return 0;
}

int run_features(const FeaturesArgs& args) {
  if (args.ratios.size() != 3) throw ParamError("--ratios needs exactly three values");
  std::cerr << "[features] manifest=" << args.manifest << " mode=" << args.mode
            << " ratios=" << args.ratios[0] << "/" << args.ratios[1] << "/" << args.ratios[2]
            << " seed=" << args.seed << " augment=" << (args.no_augment ? "off" : "on")
            << " out=" << args.out << "\n";
  DatasetManifest manifest = read_manifest_csv(args.manifest);
  manifest.seed = args.seed;
  for (int i = 0; i < 3; ++i) manifest.ratios[i] = args.ratios[i];

  FeatureConfig fc;
  fc.mode = args.mode == "melspec" ? FeatureMode::kMelSpec : FeatureMode::kMfcc;
  AugmentPlan plan = args.no_augment ? AugmentPlan::none() : AugmentPlan{};
  plan.seed = args.seed;

  const fs::path base = fs::path(args.manifest).parent_path();
  auto provider = [&base](const std::string& id) {
    const fs::path p(id);
    return load_wav(p.is_absolute() ? p.string() : (base / p).string());
  };
  SplitDatasets data =
      build_dataset(manifest, fc, plan, provider, resolve_threads(args.threads));

  fs::create_directories(args.out);
  save_dataset((fs::path(args.out) / "train.eprs").string(), data.train);
  save_dataset((fs::path(args.out) / "val.eprs").string(), data.val);
  save_dataset((fs::path(args.out) / "test.eprs").string(), data.test);
  std::cerr << "[features] train/val/test = " << data.train.size() << "/" << data.val.size()
            << "/" << data.test.size() << "\n";
  return 0;
}

int run_train(const TrainArgs& args) {
  ModelConfig config = ModelConfig::load(args.config);
  if (args.seed != 0) config.seed = args.seed;
  if (args.epochs > 0) config.training.epochs = args.epochs;
  if (args.batch > 0) config.training.batch_size = args.batch;
  if (args.lr > 0.0) config.training.learning_rate = args.lr;
  std::cerr << "[train] config=" << args.config << " seed=" << config.seed
            << " optimizer=" << optimizer_kind_to_string(config.training.optimizer)
            << " lr=" << config.training.learning_rate
            << " epochs=" << config.training.epochs
            << " batch=" << config.training.batch_size << " data=" << args.data << "\n";

  Dataset train_set = load_split(args.data, "train");
  Dataset val_set = load_split(args.data, "val");

  Model model = Model::build(config);
  std::cerr << "[train] parameters=" << model.param_count() << "\n";
  OptimizerState opt{config.training.optimizer, config.training.learning_rate};
  TrainOptions topts;
  topts.epochs = config.training.epochs;
  topts.batch_size = config.training.batch_size;
  topts.seed = config.seed;
  topts.verbose = true;
  TrainHistory history = train_model(model, train_set, val_set, opt, topts);

  fs::create_directories(args.out);
  write_file((fs::path(args.out) / "model.eprs").string(), serialize(model));
  std::ofstream hist((fs::path(args.out) / "history.csv").string(), std::ios::trunc);
  hist << "epoch,train_loss,val_auc\n";
  for (size_t i = 0; i < history.size(); ++i) {
    hist << i + 1 << ',' << history[i].train_loss << ',' << history[i].val_auc << '\n';
  }
  std::cerr << "[train] wrote " << (fs::path(args.out) / "model.eprs").string() << "\n";
  return 0;
}

int run_prune(const PruneArgs& args) {
  std::cerr << "[prune] model=" << args.model << " schedule=" << args.schedule
            << " sparsity=" << args.sparsity << " epochs=" << args.epochs
            << " seed=" << args.seed << " lr_scale=" << args.lr_scale << "\n";
  LoadedContainer c = deserialize(read_file(args.model));
  if (c.kind != LoadedContainer::Kind::kModel) {
    throw DataError("prune expects a float model container");
  }
  Model model = std::move(c.model);
  Dataset train_set = load_split(args.data, "train");
  Dataset val_set = load_split(args.data, "val");

  PruneOptions popts;
  popts.schedule = schedule_kind_from_string(args.schedule) == ScheduleKind::kConstant
                       ? PruningSchedule::constant(args.sparsity)
                       : PruningSchedule::polynomial(args.sparsity, 0, 0);
  popts.epochs = args.epochs;
  popts.batch_size = model.config.training.batch_size;
  popts.seed = args.seed;
  popts.verbose = true;
  popts.excluded_layers.insert(args.exclude.begin(), args.exclude.end());
  OptimizerState opt{model.config.training.optimizer,
                     model.config.training.learning_rate * args.lr_scale};
  PruneReport report = prune_fine_tune(model, train_set, val_set, opt, popts);

  fs::create_directories(args.out);
  write_file((fs::path(args.out) / "pruned.eprs").string(), serialize(model));
  std::ofstream rep((fs::path(args.out) / "prune_report.json").string(), std::ios::trunc);
  rep << report.to_json() << "\n";
  for (const auto& l : report.layers) {
    std::cerr << "[prune] " << l.name << ": " << l.achieved_zero_count << "/" << l.total
              << " zeros (target " << l.target_sparsity << ")\n";
  }
  return 0;
}

int run_quantize(const QuantizeArgs& args) {
  std::cerr << "[quantize] model=" << args.model << " bits=" << args.bits << "\n";
  LoadedContainer c = deserialize(read_file(args.model));
  if (c.kind != LoadedContainer::Kind::kModel) {
    throw DataError("quantize expects a float model container");
  }
  QuantizedModel qm = quantize_model(c.model, args.bits);
  std::string out = args.out;
  if (out.empty()) {
    out = (fs::path(args.model).parent_path() /
           ("model_q" + std::to_string(args.bits) + ".eprs"))
              .string();
  }
  if (!fs::path(out).parent_path().empty()) fs::create_directories(fs::path(out).parent_path());
  write_file(out, serialize(qm));
  std::cerr << "[quantize] wrote " << out << "\n";
  return 0;
}

int run_bench(const BenchArgs& args) {
  std::cerr << "[bench] model=" << args.model << " data=" << args.data
            << " sparse=" << (args.sparse ? "on" : "off") << " samples=" << args.samples
            << " warmup=" << args.warmup << "\n";
  const std::vector<uint8_t> bytes = read_file(args.model);
  LoadedContainer c = deserialize(bytes);
  Dataset test_set = load_split(args.data, "test");
  if (test_set.size() == 0) throw DataError("empty test set");

  std::function<float(const Tensor&)> fwd;
  SparseModel sparse_model;
  if (c.kind == LoadedContainer::Kind::kQuantizedModel) {
    const QuantizedModel& qm = c.qmodel;
    fwd = [&qm](const Tensor& x) { return qm.forward(x); };
  } else if (args.sparse) {
    sparse_model = sparsify_model(c.model, args.density_threshold);
    for (const auto& r : sparse_model.report) {
      std::cerr << "[bench] layer " << r.layer << " density=" << r.density
                << (r.converted ? " -> csr" : " (dense)") << "\n";
    }
    fwd = [&sparse_model](const Tensor& x) { return sparse_model.forward(x); };
  } else {
    const Model& m = c.model;
    fwd = [&m](const Tensor& x) { return m.forward(x); };
  }

  std::vector<double> scores(test_set.size());
  std::vector<int> labels(test_set.size());
  for (size_t i = 0; i < test_set.size(); ++i) {
    scores[i] = fwd(test_set.features[i]);
    labels[i] = test_set.labels[i] > 0.5f ? 1 : 0;
  }
  const double auc = auc_roc(scores, labels);

  std::vector<Tensor> timing_set;
  for (size_t i = 0; i < std::min<size_t>(args.samples, test_set.size()); ++i) {
    timing_set.push_back(test_set.features[i]);
  }
  const TimingStats t = time_single_inference([&](const Tensor& x) { (void)fwd(x); },
                                              timing_set, args.warmup);

  nlohmann::json j;
  j["auc"] = auc;
  j["container_bytes"] = bytes.size();
  j["compressed_bytes"] = compressed_size(bytes);
  j["infer_mean_us"] = t.mean_us;
  j["infer_std_us"] = t.std_us;
  j["infer_median_of_means_us"] = t.median_of_means_us;
  fs::create_directories(args.out);
  std::ofstream out((fs::path(args.out) / "bench.json").string(), std::ios::trunc);
  out << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_sweep_cmd(const SweepArgs& args) {
  SweepConfig config = args.config.empty() ? SweepConfig() : SweepConfig::load(args.config);
  if (args.threads > 0) config.threads = args.threads;
  if (config.threads == 0) config.threads = resolve_threads(0);
  std::cerr << "[sweep] resolved config:\n" << config.to_json() << "\n";

  const std::vector<SweepRow> rows = run_sweep(config);
  fs::create_directories(args.out);
  emit_report(rows, (fs::path(args.out) / "results.csv").string());
  emit_summary(aggregate_rows(rows), (fs::path(args.out) / "summary.csv").string());
  emit_plots(rows, args.out);
  std::cerr << "[sweep] wrote results.csv, summary.csv and 3 svg charts to " << args.out
            << "\n";
  return 0;
}

int run_report(const ReportArgs& args) {
  std::cerr << "[report] rows=" << args.rows << " out=" << args.out << "\n";
  const std::vector<SweepRow> rows = read_report(args.rows);
  if (rows.empty()) throw DataError("no rows in " + args.rows);
  fs::create_directories(args.out);
  emit_summary(aggregate_rows(rows), (fs::path(args.out) / "summary.csv").string());
  emit_plots(rows, args.out);
  return 0;
}

void build_app(CLI::App& app, SynthArgs& synth, FeaturesArgs& feat, TrainArgs& train,
               PruneArgs& prune, QuantizeArgs& quant, BenchArgs& bench, SweepArgs& sweep,
               ReportArgs& report) {
  app.require_subcommand(0, 1);

  auto* s = app.add_subcommand("synth", "Generate a deterministic synthetic cough dataset");
  s->add_option("--n", synth.n, "Number of recordings (>= 8)")->check(CLI::Range(8, 1000000));
  s->add_option("--seed", synth.seed, "Generator seed");
  s->add_option("--out", synth.out, "Output directory for WAV files + manifest.csv");

  auto* f = app.add_subcommand("features", "Split a manifest and extract features");
  f->add_option("--manifest", feat.manifest, "CSV manifest (path,label,source_id[,split])")
      ->required();
  f->add_option("--mode", feat.mode, "Feature pipeline")
      ->check(CLI::IsMember({"mfcc", "melspec"}));
  f->add_option("--ratios", feat.ratios, "Train/val/test ratios (three values)")
      ->expected(3);
  f->add_option("--seed", feat.seed, "Split + augmentation seed");
  f->add_flag("--no-augment", feat.no_augment, "Disable augmentation");
  f->add_option("--threads", feat.threads, "Worker threads (0 = all cores)")
      ->envname("EDGEPRESS_THREADS");
  f->add_option("--out", feat.out, "Output directory for train/val/test .eprs caches");

  auto* t = app.add_subcommand("train", "Train a model from a JSON config");
  t->add_option("--config", train.config, "Model config JSON")->required();
  t->add_option("--data", train.data, "Directory with train.eprs/val.eprs");
  t->add_option("--epochs", train.epochs, "Override config epochs");
  t->add_option("--batch", train.batch, "Override config batch size");
  t->add_option("--lr", train.lr, "Override config learning rate");
  t->add_option("--seed", train.seed, "Override config seed");
  t->add_option("--out", train.out, "Output directory (model.eprs, history.csv)");

  auto* p = app.add_subcommand("prune", "Magnitude pruning with fine-tuning");
  p->add_option("--model", prune.model, "Trained model container (.eprs)")->required();
  p->add_option("--data", prune.data, "Directory with train.eprs/val.eprs");
  p->add_option("--schedule", prune.schedule, "Sparsity schedule")
      ->check(CLI::IsMember({"constant", "polynomial"}));
  p->add_option("--sparsity", prune.sparsity, "Final sparsity in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  p->add_option("--epochs", prune.epochs, "Fine-tuning epochs");
  p->add_option("--lr-scale", prune.lr_scale, "Learning-rate scale vs training");
  p->add_option("--exclude", prune.exclude, "Layer name to keep dense (repeatable)");
  p->add_option("--seed", prune.seed, "Fine-tuning shuffle seed");
  p->add_option("--out", prune.out, "Output directory (pruned.eprs, prune_report.json)");

  auto* q = app.add_subcommand("quantize", "Min-max post-training quantization");
  q->add_option("--model", quant.model, "Model container (.eprs)")->required();
  q->add_option("--bits", quant.bits, "Target width")->check(CLI::IsMember({8, 16}));
  q->add_option("--out", quant.out, "Output file (default: model_q<bits>.eprs)");

  auto* b = app.add_subcommand("bench", "AUC + size + single-input latency for a model");
  b->add_option("--model", bench.model, "Model container (.eprs)")->required();
  b->add_option("--data", bench.data, "Directory with test.eprs");
  b->add_flag("--sparse", bench.sparse, "Execute pruned dense layers as CSR");
  b->add_option("--density-threshold", bench.density_threshold,
                "Max density for CSR conversion")
      ->check(CLI::Range(0.0, 1.0));
  b->add_option("--warmup", bench.warmup, "Untimed warmup inferences");
  b->add_option("--samples", bench.samples, "Timed samples");
  b->add_option("--out", bench.out, "Output directory (bench.json)");

  auto* w = app.add_subcommand("sweep", "Full pruning x quantization experiment grid");
  w->add_option("--config", sweep.config, "Sweep config JSON (defaults when omitted)");
  w->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)")
      ->envname("EDGEPRESS_THREADS");
  w->add_option("--out", sweep.out, "Output directory (results.csv, summary.csv, SVGs)");

  auto* r = app.add_subcommand("report", "Re-emit summary and plots from a results.csv");
  r->add_option("--rows", report.rows, "results.csv from a previous sweep")->required();
  r->add_option("--out", report.out, "Output directory");
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"edgepress: small-model compression bench (prune, quantize, sparse-exec)"};
  SynthArgs synth;
  FeaturesArgs feat;
  TrainArgs train;
  PruneArgs prune;
  QuantizeArgs quant;
  BenchArgs bench;
  SweepArgs sweep;
  ReportArgs report;
  build_app(app, synth, feat, train, prune, quant, bench, sweep, report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand("synth")) return run_synth(synth);
    if (app.got_subcommand("features")) return run_features(feat);
    if (app.got_subcommand("train")) return run_train(train);
    if (app.got_subcommand("prune")) return run_prune(prune);
    if (app.got_subcommand("quantize")) return run_quantize(quant);
    if (app.got_subcommand("bench")) return run_bench(bench);
    if (app.got_subcommand("sweep")) return run_sweep_cmd(sweep);
    if (app.got_subcommand("report")) return run_report(report);
    std::cout << app.help();
    return 0;
  } catch (const ParamError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
}

int dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("edgepress");
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

std::string help_text() {
  CLI::App app{"edgepress: small-model compression bench (prune, quantize, sparse-exec)"};
  SynthArgs synth;
  FeaturesArgs feat;
  TrainArgs train;
  PruneArgs prune;
  QuantizeArgs quant;
  BenchArgs bench;
  SweepArgs sweep;
  ReportArgs report;
  build_app(app, synth, feat, train, prune, quant, bench, sweep, report);
  std::string text = app.help();
  for (const CLI::App* sub : app.get_subcommands({})) {
    text += "\n----\n" + sub->help();
  }
  return text;
}

}  // namespace edgepress::cli
