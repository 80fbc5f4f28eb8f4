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

#include "edgepress/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "edgepress/errors.hpp"
#include "edgepress/metrics.hpp"
#include "edgepress/model_io.hpp"
#include "edgepress/parallel.hpp"
#include "edgepress/quantization.hpp"

namespace edgepress {

using nlohmann::json;

std::vector<double> default_sparsity_grid() {
  return {0.10, 0.20, 0.30, 0.40, 0.50, 0.55, 0.60, 0.65,
          0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99, 0.999};
}

namespace {

// Small CNN on MFCC inputs; fast enough to sweep on a laptop CPU.
ModelConfig default_sweep_model() {
  const char* text = R"json({
    "input_shape": [15, 302, 1],
    "seed": 0,
    "layers": [
      {"kind": "conv2d", "name": "conv1", "filters": 4, "kernel": [3, 3], "padding": "same"},
      {"kind": "activation", "name": "relu1", "activation": "relu"},
      {"kind": "maxpool", "name": "pool1", "window": [2, 4]},
      {"kind": "conv2d", "name": "conv2", "filters": 8, "kernel": [3, 3], "padding": "same"},
      {"kind": "activation", "name": "relu2", "activation": "relu"},
      {"kind": "maxpool", "name": "pool2", "window": [2, 4]},
      {"kind": "flatten", "name": "flat"},
      {"kind": "dense", "name": "fc1", "units": 16},
      {"kind": "activation", "name": "relu3", "activation": "relu"},
      {"kind": "dense", "name": "fc2", "units": 1},
      {"kind": "activation", "name": "out", "activation": "sigmoid"}
    ],
    "training": {"optimizer": "adam", "learning_rate": 0.002, "epochs": 8, "batch_size": 16}
  })json";
  return ModelConfig::from_json(text);
}

}  // namespace

SweepConfig::SweepConfig() : model(default_sweep_model()) {}

void SweepConfig::check() const {
  for (double s : sparsities) {
    if (s < 0.0 || s >= 1.0) throw ParamError("sweep sparsities must lie in [0,1)");
  }
  if (num_seeds < 1) throw ParamError("sweep needs at least one seed");
  if (schedules.empty()) throw ParamError("sweep needs at least one schedule");
}

SweepConfig SweepConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep config is not valid JSON: ") + e.what());
  }
  try {
    SweepConfig cfg;
    if (j.contains("schedules")) {
      cfg.schedules.clear();
      for (const auto& s : j.at("schedules")) {
        cfg.schedules.push_back(schedule_kind_from_string(s.get<std::string>()));
      }
    }
    if (j.contains("sparsities")) {
      cfg.sparsities = j.at("sparsities").get<std::vector<double>>();
    }
    cfg.num_seeds = j.value("num_seeds", cfg.num_seeds);
    cfg.seed_base = j.value("seed_base", cfg.seed_base);
    if (j.contains("precisions")) {
      cfg.with_q8 = false;
      cfg.with_q16 = false;
      for (const auto& p : j.at("precisions")) {
        const auto name = p.get<std::string>();
        if (name == "q8" || name == "8") cfg.with_q8 = true;
        else if (name == "q16" || name == "16") cfg.with_q16 = true;
        else if (name != "f32") throw ConfigError("unknown precision '" + name + "'");
      }
    }
    cfg.model_config = j.value("model_config", std::string());
    if (!cfg.model_config.empty()) cfg.model = ModelConfig::load(cfg.model_config);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      cfg.dataset.synthetic_n = d.value("synthetic_n", cfg.dataset.synthetic_n);
      cfg.dataset.seed = d.value("seed", cfg.dataset.seed);
      cfg.dataset.manifest = d.value("manifest", std::string());
      cfg.dataset.augment = d.value("augment", cfg.dataset.augment);
      const auto mode = d.value("mode", std::string("mfcc"));
      if (mode == "mfcc") cfg.dataset.mode = FeatureMode::kMfcc;
      else if (mode == "melspec") cfg.dataset.mode = FeatureMode::kMelSpec;
      else throw ConfigError("dataset mode must be mfcc|melspec");
    }
    cfg.baseline_epochs = j.value("baseline_epochs", cfg.baseline_epochs);
    cfg.finetune_epochs = j.value("finetune_epochs", cfg.finetune_epochs);
    cfg.finetune_lr_scale = j.value("finetune_lr_scale", cfg.finetune_lr_scale);
    cfg.timing_samples = j.value("timing_samples", cfg.timing_samples);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.check();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep config field error: ") + e.what());
  }
}

SweepConfig SweepConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sweep config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string SweepConfig::to_json() const {
  json j;
  json sched = json::array();
  for (auto s : schedules) sched.push_back(schedule_kind_to_string(s));
  j["schedules"] = sched;
  j["sparsities"] = sparsities;
  j["num_seeds"] = num_seeds;
  j["seed_base"] = seed_base;
  json prec = json::array();
  prec.push_back("f32");
  if (with_q8) prec.push_back("q8");
  if (with_q16) prec.push_back("q16");
  j["precisions"] = prec;
  if (!model_config.empty()) j["model_config"] = model_config;
  j["dataset"] = {{"synthetic_n", dataset.synthetic_n},
                  {"seed", dataset.seed},
                  {"mode", dataset.mode == FeatureMode::kMfcc ? "mfcc" : "melspec"},
                  {"augment", dataset.augment},
                  {"manifest", dataset.manifest}};
  j["baseline_epochs"] = baseline_epochs;
  j["finetune_epochs"] = finetune_epochs;
  j["finetune_lr_scale"] = finetune_lr_scale;
  j["timing_samples"] = timing_samples;
  j["threads"] = threads;
  return j.dump(2);
}

namespace {

std::mutex g_timing_mutex;  // timing runs serialized across sweep workers

struct EvalInputs {
  const Dataset* test;
  int timing_samples;
};

void evaluate_variants(const Model& model, const EvalInputs& in, bool with_q8, bool with_q16,
                       SweepRow* row) {
  std::vector<double> scores(in.test->size());
  std::vector<int> labels(in.test->size());
  for (size_t i = 0; i < in.test->size(); ++i) {
    scores[i] = model.forward(in.test->features[i]);
    labels[i] = in.test->labels[i] > 0.5f ? 1 : 0;
  }
  row->auc = auc_roc(scores, labels);
  row->size = compressed_size(serialize(model));

  QuantizedModel q8, q16;
  if (with_q8) {
    q8 = quantize_model(model, 8);
    for (size_t i = 0; i < in.test->size(); ++i) scores[i] = q8.forward(in.test->features[i]);
    row->auc_q8 = auc_roc(scores, labels);
    row->size_q8 = compressed_size(serialize(q8));
  }
  if (with_q16) {
    q16 = quantize_model(model, 16);
    for (size_t i = 0; i < in.test->size(); ++i) scores[i] = q16.forward(in.test->features[i]);
    row->auc_q16 = auc_roc(scores, labels);
    row->size_q16 = compressed_size(serialize(q16));
  }

  std::vector<Tensor> timing_set;
  const size_t count = std::min<size_t>(in.timing_samples, in.test->size());
  for (size_t i = 0; i < count; ++i) timing_set.push_back(in.test->features[i]);
  {
    std::lock_guard<std::mutex> lock(g_timing_mutex);
    const TimingStats tf = time_single_inference(
        [&](const Tensor& x) { (void)model.forward(x); }, timing_set);
    row->t_us = tf.mean_us;
    row->t_std_us = tf.std_us;
    if (with_q8) {
      const TimingStats t8 = time_single_inference(
          [&](const Tensor& x) { (void)q8.forward(x); }, timing_set);
      row->t_q8_us = t8.mean_us;
      row->t_q8_std_us = t8.std_us;
    }
    if (with_q16) {
      const TimingStats t16 = time_single_inference(
          [&](const Tensor& x) { (void)q16.forward(x); }, timing_set);
      row->t_q16_us = t16.mean_us;
      row->t_q16_std_us = t16.std_us;
    }
  }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.check();
  const int threads =
      config.threads > 0 ? config.threads
                         : std::max(1u, std::thread::hardware_concurrency());

  // Dataset: shared across seeds; features extracted once.
  SplitDatasets data;
  if (!config.dataset.manifest.empty()) {
    DatasetManifest manifest = read_manifest_csv(config.dataset.manifest);
    manifest.seed = config.dataset.seed;
    FeatureConfig fc;
    fc.mode = config.dataset.mode;
    const std::filesystem::path base =
        std::filesystem::path(config.dataset.manifest).parent_path();
    auto provider = [&base](const std::string& id) {
      const std::filesystem::path p(id);
      return load_wav(p.is_absolute() ? p.string() : (base / p).string());
    };
    data = build_dataset(manifest, fc,
                         config.dataset.augment ? AugmentPlan{} : AugmentPlan::none(),
                         provider, threads);
  } else {
    SyntheticDataset synth =
        generate_synthetic_dataset(config.dataset.synthetic_n, config.dataset.seed);
    FeatureConfig fc;
    fc.mode = config.dataset.mode;
    data = build_dataset(synth.manifest, fc,
                         config.dataset.augment ? AugmentPlan{} : AugmentPlan::none(),
                         synth.provider(), threads);
  }
  std::cerr << "[sweep] dataset train/val/test = " << data.train.size() << "/"
            << data.val.size() << "/" << data.test.size() << "\n";

  // Baselines, one per seed.
  std::vector<Model> baselines(config.num_seeds, Model{});
  parallel_for(config.num_seeds, threads, [&](size_t si) {
    ModelConfig mc = config.model;
    mc.seed = config.seed_base + si;
    Model m = Model::build(mc);
    OptimizerState opt{mc.training.optimizer, mc.training.learning_rate};
    TrainOptions topts;
    topts.epochs = config.baseline_epochs > 0 ? config.baseline_epochs : mc.training.epochs;
    topts.batch_size = mc.training.batch_size;
    topts.seed = mc.seed;
    train_model(m, data.train, data.val, opt, topts);
    baselines[si] = std::move(m);
  });

  struct Cell {
    int schedule = -1;  // -1 = baseline row
    int sparsity = -1;
    int seed_idx = 0;
  };
  std::vector<Cell> cells;
  for (int si = 0; si < config.num_seeds; ++si) {
    cells.push_back({-1, -1, si});
    for (size_t sc = 0; sc < config.schedules.size(); ++sc) {
      for (size_t sp = 0; sp < config.sparsities.size(); ++sp) {
        cells.push_back({static_cast<int>(sc), static_cast<int>(sp), si});
      }
    }
  }

  std::vector<SweepRow> rows(cells.size());
  EvalInputs inputs{&data.test, config.timing_samples};
  parallel_for(cells.size(), threads, [&](size_t ci) {
    const Cell& cell = cells[ci];
    SweepRow& row = rows[ci];
    const uint64_t seed = config.seed_base + static_cast<uint64_t>(cell.seed_idx);
    row.seed = seed;
    try {
      if (cell.schedule < 0) {
        row.schedule = "none";
        row.sparsity = 0.0;
        evaluate_variants(baselines[cell.seed_idx], inputs, config.with_q8, config.with_q16,
                          &row);
        return;
      }
      const ScheduleKind kind = config.schedules[cell.schedule];
      const double sparsity = config.sparsities[cell.sparsity];
      row.schedule = schedule_kind_to_string(kind);
      row.sparsity = sparsity;

      Model m = baselines[cell.seed_idx];
      PruneOptions popts;
      popts.schedule = kind == ScheduleKind::kConstant
                           ? PruningSchedule::constant(sparsity)
                           : PruningSchedule::polynomial(sparsity, 0, 0);
      popts.epochs = config.finetune_epochs;
      popts.batch_size = config.model.training.batch_size;
      popts.seed = Rng::derive(seed, 1000 + static_cast<uint64_t>(cell.schedule) * 100 +
                                         static_cast<uint64_t>(cell.sparsity));
      OptimizerState opt{config.model.training.optimizer,
                         config.model.training.learning_rate * config.finetune_lr_scale};
      prune_fine_tune(m, data.train, data.val, opt, popts);
      evaluate_variants(m, inputs, config.with_q8, config.with_q16, &row);
    } catch (const std::exception& e) {
      row.error = e.what();
      std::cerr << "[sweep] cell failed (schedule=" << row.schedule
                << " sparsity=" << row.sparsity << " seed=" << row.seed << "): " << e.what()
                << "\n";
    }
  });

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.schedule != b.schedule) return a.schedule < b.schedule;
    if (a.sparsity != b.sparsity) return a.sparsity < b.sparsity;
    return a.seed < b.seed;
  });
  return rows;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void emit_report(const std::vector<SweepRow>& rows, const std::string& csv_path) {
  if (rows.empty()) throw DataError("emit_report: no rows");
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + csv_path + "'");
  out << "schedule,sparsity,seed,auc,auc_q8,auc_q16,size,size_q8,size_q16,"
         "t_us,t_q8_us,t_q16_us\n";
  for (const auto& r : rows) {
    if (!r.ok()) {
      std::cerr << "[report] skipping failed cell " << r.schedule << "/" << r.sparsity << "/"
                << r.seed << ": " << r.error << "\n";
      continue;
    }
    out << r.schedule << ',' << fmt_double(r.sparsity) << ',' << r.seed << ','
        << fmt_double(r.auc) << ',' << fmt_double(r.auc_q8) << ',' << fmt_double(r.auc_q16)
        << ',' << r.size << ',' << r.size_q8 << ',' << r.size_q16 << ',' << fmt_double(r.t_us)
        << ',' << fmt_double(r.t_q8_us) << ',' << fmt_double(r.t_q16_us) << '\n';
  }
  if (!out) throw IoError("short write to '" + csv_path + "'");
}

std::vector<SweepRow> read_report(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open '" + csv_path + "'");
  std::vector<SweepRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;  // header
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 12) throw ParseError("report row needs 12 columns, got " +
                                         std::to_string(f.size()));
    SweepRow r;
    r.schedule = f[0];
    r.sparsity = std::stod(f[1]);
    r.seed = std::stoull(f[2]);
    r.auc = std::stod(f[3]);
    r.auc_q8 = std::stod(f[4]);
    r.auc_q16 = std::stod(f[5]);
    r.size = std::stoull(f[6]);
    r.size_q8 = std::stoull(f[7]);
    r.size_q16 = std::stoull(f[8]);
    r.t_us = std::stod(f[9]);
    r.t_q8_us = std::stod(f[10]);
    r.t_q16_us = std::stod(f[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<SweepRow>& rows) {
  struct Key {
    std::string schedule;
    double sparsity;
    bool operator<(const Key& o) const {
      if (schedule != o.schedule) return schedule < o.schedule;
      return sparsity < o.sparsity;
    }
  };
  std::map<Key, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) {
    if (r.ok()) groups[{r.schedule, r.sparsity}].push_back(&r);
  }
  auto mean_std = [](const std::vector<double>& v, double* mean, double* sd) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    *mean = m;
    *sd = std::sqrt(var / static_cast<double>(v.size()));
  };
  std::vector<AggregateRow> out;
  for (const auto& [key, group] : groups) {
    AggregateRow a;
    a.schedule = key.schedule;
    a.sparsity = key.sparsity;
    auto collect = [&](auto getter, double* mean, double* sd) {
      std::vector<double> v;
      v.reserve(group.size());
      for (const SweepRow* r : group) v.push_back(getter(*r));
      mean_std(v, mean, sd);
    };
    collect([](const SweepRow& r) { return r.auc; }, &a.auc_mean, &a.auc_std);
    collect([](const SweepRow& r) { return r.auc_q8; }, &a.auc_q8_mean, &a.auc_q8_std);
    collect([](const SweepRow& r) { return r.auc_q16; }, &a.auc_q16_mean, &a.auc_q16_std);
    collect([](const SweepRow& r) { return static_cast<double>(r.size); }, &a.size_mean,
            &a.size_std);
    collect([](const SweepRow& r) { return static_cast<double>(r.size_q8); }, &a.size_q8_mean,
            &a.size_q8_std);
    collect([](const SweepRow& r) { return static_cast<double>(r.size_q16); },
            &a.size_q16_mean, &a.size_q16_std);
    collect([](const SweepRow& r) { return r.t_us; }, &a.t_mean, &a.t_std);
    collect([](const SweepRow& r) { return r.t_q8_us; }, &a.t_q8_mean, &a.t_q8_std);
    collect([](const SweepRow& r) { return r.t_q16_us; }, &a.t_q16_mean, &a.t_q16_std);
    out.push_back(std::move(a));
  }
  return out;
}

void emit_summary(const std::vector<AggregateRow>& rows, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + csv_path + "'");
  out << "schedule,sparsity,auc_mean,auc_std,auc_q8_mean,auc_q8_std,auc_q16_mean,auc_q16_std,"
         "size_mean,size_std,size_q8_mean,size_q8_std,size_q16_mean,size_q16_std,"
         "t_us_mean,t_us_std,t_q8_us_mean,t_q8_us_std,t_q16_us_mean,t_q16_us_std\n";
  for (const auto& a : rows) {
    out << a.schedule << ',' << fmt_double(a.sparsity) << ',' << fmt_double(a.auc_mean) << ','
        << fmt_double(a.auc_std) << ',' << fmt_double(a.auc_q8_mean) << ','
        << fmt_double(a.auc_q8_std) << ',' << fmt_double(a.auc_q16_mean) << ','
        << fmt_double(a.auc_q16_std) << ',' << fmt_double(a.size_mean) << ','
        << fmt_double(a.size_std) << ',' << fmt_double(a.size_q8_mean) << ','
        << fmt_double(a.size_q8_std) << ',' << fmt_double(a.size_q16_mean) << ','
        << fmt_double(a.size_q16_std) << ',' << fmt_double(a.t_mean) << ','
        << fmt_double(a.t_std) << ',' << fmt_double(a.t_q8_mean) << ','
        << fmt_double(a.t_q8_std) << ',' << fmt_double(a.t_q16_mean) << ','
        << fmt_double(a.t_q16_std) << '\n';
  }
}

}  // namespace edgepress
