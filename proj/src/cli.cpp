/**
 * Copyright 2026 The mmnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "mmnet/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mmnet/augment.hpp"
#include "mmnet/fishdb.hpp"
#include "mmnet/forward.hpp"
#include "mmnet/image_io.hpp"
#include "mmnet/metrics.hpp"
#include "mmnet/model.hpp"
#include "mmnet/synthetic.hpp"
#include "mmnet/telemetry.hpp"
#include "mmnet/train.hpp"
#include "mmnet/weights.hpp"

namespace mmnet::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct ModelOpts {
  int image_size = 224;
  double width = 1.0;
  std::string head = "reduced";
  std::string activation = "swish";
  double dropout = 0.5;
};

void add_model_opts(CLI::App* cmd, ModelOpts& m) {
  cmd->add_option("--image-size", m.image_size,
                  "input extent (divisible by 32; 32 = toy mode)")
      ->capture_default_str();
  cmd->add_option("--width", m.width, "channel width multiplier")
      ->capture_default_str();
  cmd->add_option("--head", m.head, "classifier head: reduced|baseline")
      ->capture_default_str();
  cmd->add_option("--activation", m.activation,
                  "head activation: swish|relu|tanh|sigmoid")
      ->capture_default_str();
  cmd->add_option("--dropout", m.dropout, "reduced-head dropout rate")
      ->capture_default_str();
}

ArchitectureSpec build_from_opts(const ModelOpts& m, int num_classes) {
  return build_model(Shape{m.image_size, m.image_size, 3}, m.width,
                     parse_head_kind(m.head), num_classes,
                     ActivationKind::parse(m.activation), m.dropout);
}

struct DataOpts {
  std::string data_root;
  bool synthetic = false;
  int classes = 10;
  int per_class = 200;
  std::string granularity = "species";
  double split_ratio = 0.8;
};

void add_data_opts(CLI::App* cmd, DataOpts& d) {
  cmd->add_option("--data-root", d.data_root,
                  "image tree <root>/<species_id>/<image>.png|jpg");
  cmd->add_flag("--synthetic", d.synthetic,
                "procedural texture dataset instead of --data-root");
  cmd->add_option("--classes", d.classes, "synthetic: number of classes")
      ->capture_default_str();
  cmd->add_option("--per-class", d.per_class, "synthetic: images per class")
      ->capture_default_str();
  cmd->add_option("--granularity", d.granularity,
                  "label granularity: species|genus")
      ->capture_default_str();
  cmd->add_option("--split-ratio", d.split_ratio, "train fraction")
      ->capture_default_str();
}

struct AugOpts {
  bool enabled = false;
  AugmentConfig cfg;
};

void add_aug_opts(CLI::App* cmd, AugOpts& a) {
  cmd->add_flag("--augment", a.enabled,
                "augment the training images (one seeded pass)");
  cmd->add_option("--aug-width-shift", a.cfg.width_shift_range)
      ->capture_default_str();
  cmd->add_option("--aug-height-shift", a.cfg.height_shift_range)
      ->capture_default_str();
  cmd->add_option("--aug-shear", a.cfg.shear_degrees,
                  "max shear angle, degrees")
      ->capture_default_str();
  cmd->add_option("--aug-zoom-low", a.cfg.zoom_low,
                  "zoom < 1 magnifies content")
      ->capture_default_str();
  cmd->add_option("--aug-zoom-high", a.cfg.zoom_high)->capture_default_str();
  cmd->add_flag("--aug-hflip,!--no-aug-hflip", a.cfg.horizontal_flip,
                "random horizontal flip");
  cmd->add_flag("--aug-vflip", a.cfg.vertical_flip, "random vertical flip");
}

void echo_config(const std::string& command, const json& cfg) {
  json j;
  j["schema"] = 1;
  j["command"] = command;
  j["config"] = cfg;
  std::cout << j.dump() << "\n";
}

void require_path(const std::string& path, const std::string& what) {
  if (!fs::exists(path))
    throw ConfigError(what + " path '" + path + "' does not exist");
}

// ---------------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------------

LabeledImages load_manifest_side(const DatasetManifest& manifest,
                                 SplitSide side, Index image_size) {
  const size_t n = manifest.count(side);
  LabeledImages out;
  out.class_names = manifest.class_names;
  out.images =
      Tensor<float>(Shape{static_cast<Index>(n), image_size, image_size, 3});
  out.labels.reserve(n);
  Index at = 0;
  const Index stride = image_size * image_size * 3;
  for (const auto& item : manifest.items) {
    if (item.split != side) continue;
    Tensor<float> raw = load_image_resized(item.path, image_size);
    Tensor<float> scaled = rescale(raw);
    std::copy(scaled.data(), scaled.data() + stride,
              out.images.data() + at * stride);
    out.labels.push_back(item.label);
    ++at;
  }
  return out;
}

/// Stratified split of an in-memory dataset via the manifest machinery.
TrainData split_labeled(const LabeledImages& all, double ratio,
                        uint64_t seed) {
  DatasetManifest m;
  m.class_names = all.class_names;
  m.items.reserve(all.labels.size());
  for (size_t i = 0; i < all.labels.size(); ++i)
    m.items.push_back({std::to_string(i), all.labels[i]});
  m = dataset_split(m, ratio, seed);

  const Index stride = all.images.size() / all.images.dim(0);
  auto gather = [&](SplitSide side) {
    LabeledImages part;
    part.class_names = all.class_names;
    const size_t n = m.count(side);
    part.images = Tensor<float>(Shape{static_cast<Index>(n), all.images.dim(1),
                                      all.images.dim(2), all.images.dim(3)});
    part.labels.reserve(n);
    Index at = 0;
    for (size_t i = 0; i < m.items.size(); ++i) {
      if (m.items[i].split != side) continue;
      std::copy(all.images.data() + static_cast<Index>(i) * stride,
                all.images.data() + static_cast<Index>(i + 1) * stride,
                part.images.data() + at * stride);
      part.labels.push_back(all.labels[i]);
      ++at;
    }
    return part;
  };
  TrainData data;
  data.train = gather(SplitSide::Train);
  data.eval = gather(SplitSide::Test);
  return data;
}

TrainData resolve_dataset(const DataOpts& d, Index image_size, uint64_t seed) {
  if (d.synthetic) {
    LabeledImages all =
        make_synthetic_dataset(d.classes, d.per_class, image_size, seed);
    return split_labeled(all, d.split_ratio, seed);
  }
  if (d.data_root.empty())
    throw ConfigError("either --data-root or --synthetic is required");
  require_path(d.data_root, "data root");
  DatasetManifest manifest = DatasetManifest::scan(d.data_root);
  if (d.granularity == "genus")
    manifest = manifest.remap_to_genus();
  else if (d.granularity != "species")
    throw ConfigError("granularity must be species|genus");
  manifest = dataset_split(manifest, d.split_ratio, seed);
  TrainData data;
  data.train = load_manifest_side(manifest, SplitSide::Train, image_size);
  data.eval = load_manifest_side(manifest, SplitSide::Test, image_size);
  return data;
}

void apply_static_augmentation(LabeledImages& set, const AugmentConfig& cfg) {
  std::vector<ImageSample> samples(static_cast<size_t>(set.count()));
  const Index h = set.images.dim(1), w = set.images.dim(2);
  const Index stride = h * w * 3;
  for (Index i = 0; i < set.count(); ++i) {
    samples[static_cast<size_t>(i)].pixels = Tensor<float>(Shape{h, w, 3});
    std::copy(set.images.data() + i * stride,
              set.images.data() + (i + 1) * stride,
              samples[static_cast<size_t>(i)].pixels.data());
    samples[static_cast<size_t>(i)].label =
        set.labels[static_cast<size_t>(i)];
  }
  auto augmented = augment_batch(samples, cfg);
  for (Index i = 0; i < set.count(); ++i)
    std::copy(augmented[static_cast<size_t>(i)].pixels.data(),
              augmented[static_cast<size_t>(i)].pixels.data() + stride,
              set.images.data() + i * stride);
}

std::vector<std::string> read_classes_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open classes file '" + path + "'");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  if (names.empty()) throw FormatError("classes file '" + path + "' is empty");
  return names;
}

void write_classes_file(const std::string& path,
                        const std::vector<std::string>& names) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& n : names) os << n << "\n";
}

std::string epoch_json(const EpochRecord& r) {
  json j;
  j["schema"] = 1;
  j["epoch"] = r.epoch;
  j["train_loss"] = r.train_loss;
  j["train_accuracy"] = r.train_accuracy;
  j["eval_loss"] = r.eval_loss;
  j["eval_accuracy"] = r.eval_accuracy;
  j["wall_ms"] = r.wall_ms;
  return j.dump();
}

WeightStore<float> prepare_weights(const ArchitectureSpec& spec,
                                   const std::string& weights_in,
                                   uint64_t seed,
                                   const Tensor<float>& calibration) {
  if (!weights_in.empty()) {
    require_path(weights_in, "weights");
    WeightStore<float> store = load_weights(weights_in);
    auto binding = check_binding(spec, store);
    if (!binding.missing.empty())
      throw ConfigError("weights '" + weights_in + "' missing entry '" +
                        binding.missing.front() + "'");
    for (const auto& extra : binding.extra)
      std::cerr << "warning: ignoring extra weight entry '" << extra << "'\n";
    return store;
  }
  WeightStore<float> store = init_weights<float>(spec, seed);
  if (calibration.size() != 0 && calibration.dim(0) >= 2)
    calibrate_running_stats(spec, store, calibration);
  return store;
}

Tensor<float> first_rows(const Tensor<float>& images, Index n) {
  n = std::min(n, images.dim(0));
  Tensor<float> out(
      Shape{n, images.dim(1), images.dim(2), images.dim(3)});
  std::copy(images.data(), images.data() + out.size(), out.data());
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct TrainCmd {
  ModelOpts model;
  DataOpts data;
  AugOpts aug;
  double lr = 1e-4;
  int epochs = 50;
  int batch_size = 32;
  uint64_t seed = 42;
  std::string weights_in;
  std::string out_dir = "run";
  int checkpoint_every = 0;
  bool telemetry = false;

  json config_json() const {
    return json{{"image_size", model.image_size},
                {"width", model.width},
                {"head", model.head},
                {"activation", model.activation},
                {"dropout", model.dropout},
                {"data_root", data.data_root},
                {"synthetic", data.synthetic},
                {"classes", data.classes},
                {"per_class", data.per_class},
                {"granularity", data.granularity},
                {"split_ratio", data.split_ratio},
                {"augment", aug.enabled},
                {"learning_rate", lr},
                {"epochs", epochs},
                {"batch_size", batch_size},
                {"seed", seed},
                {"weights_in", weights_in},
                {"out_dir", out_dir},
                {"telemetry", telemetry}};
  }
};

int run_train(const TrainCmd& cmd) {
  echo_config("train", cmd.config_json());

  TrainData data = resolve_dataset(cmd.data, cmd.model.image_size, cmd.seed);
  if (cmd.aug.enabled) {
    AugmentConfig acfg = cmd.aug.cfg;
    acfg.seed = cmd.seed;
    apply_static_augmentation(data.train, acfg);
  }

  const int num_classes = static_cast<int>(data.train.class_names.size());
  ArchitectureSpec spec = build_from_opts(cmd.model, num_classes);
  WeightStore<float> store = prepare_weights(
      spec, cmd.weights_in, cmd.seed, first_rows(data.train.images, 64));

  TrainConfig tc;
  tc.learning_rate = cmd.lr;
  tc.epochs = cmd.epochs;
  tc.batch_size = cmd.batch_size;
  tc.seed = cmd.seed;
  tc.activation = ActivationKind::parse(cmd.model.activation);

  fs::create_directories(cmd.out_dir);
  std::ofstream report_os(fs::path(cmd.out_dir) / "report.ndjson");
  if (!report_os) throw IoError("cannot write under '" + cmd.out_dir + "'");

  TrainReport report = train_head(spec, store, data, tc);
  for (const auto& rec : report.epochs) {
    std::string line = epoch_json(rec);
    report_os << line << "\n";
    std::cout << line << "\n";
    if (cmd.checkpoint_every > 0 && rec.epoch % cmd.checkpoint_every == 0) {
      save_weights(report.final_weights,
                   (fs::path(cmd.out_dir) /
                    ("checkpoint-" + std::to_string(rec.epoch) + ".mmnw"))
                       .string());
    }
  }

  save_weights(report.final_weights,
               (fs::path(cmd.out_dir) / "weights.mmnw").string());
  write_classes_file((fs::path(cmd.out_dir) / "classes.txt").string(),
                     data.train.class_names);

  if (cmd.telemetry) {
    WeightStore<float> final_store = report.final_weights;
    TelemetryRecord rec = measure_forward(
        spec, final_store, first_rows(data.train.images, cmd.batch_size),
        "train-final-infer");
    std::cout << telemetry_json(rec) << "\n";
  }

  const auto& last = report.epochs.back();
  std::cout << "final train accuracy " << last.train_accuracy
            << ", eval accuracy " << last.eval_accuracy << "\n";
  return 0;
}

struct EvaluateCmd {
  ModelOpts model;
  DataOpts data;
  std::string weights;
  std::string classes_file;
  double beta = 1.0;
  uint64_t seed = 42;
  bool telemetry = false;
  std::string side = "test";
};

int run_evaluate(const EvaluateCmd& cmd) {
  echo_config("evaluate",
              json{{"weights", cmd.weights},
                   {"classes_file", cmd.classes_file},
                   {"beta", cmd.beta},
                   {"seed", cmd.seed},
                   {"side", cmd.side},
                   {"image_size", cmd.model.image_size},
                   {"synthetic", cmd.data.synthetic},
                   {"data_root", cmd.data.data_root}});

  std::vector<std::string> class_names = read_classes_file(cmd.classes_file);
  ArchitectureSpec spec =
      build_from_opts(cmd.model, static_cast<int>(class_names.size()));
  Tensor<float> none;
  WeightStore<float> store = prepare_weights(spec, cmd.weights, cmd.seed, none);

  TrainData data = resolve_dataset(cmd.data, cmd.model.image_size, cmd.seed);
  const LabeledImages& side = cmd.side == "train" ? data.train : data.eval;
  if (side.count() == 0) throw ConfigError("evaluation split is empty");
  if (side.class_names != class_names)
    throw ConfigError("dataset classes do not match the classes file");

  std::vector<int> predicted;
  predicted.reserve(static_cast<size_t>(side.count()));
  const Index chunk = 64;
  for (Index i = 0; i < side.count(); i += chunk) {
    Index take = std::min(chunk, side.count() - i);
    Tensor<float> batch(Shape{take, side.images.dim(1), side.images.dim(2),
                              side.images.dim(3)});
    const Index stride = batch.size() / take;
    std::copy(side.images.data() + i * stride,
              side.images.data() + (i + take) * stride, batch.data());
    Tensor<float> probs = forward(spec, store, batch, RunMode::Infer);
    for (Index b = 0; b < take; ++b) {
      Index arg = 0;
      for (Index c = 1; c < probs.dim(1); ++c)
        if (probs(b, c) > probs(b, arg)) arg = c;
      predicted.push_back(static_cast<int>(arg));
    }
  }

  ConfusionMatrix cm = confusion_from_labels(
      side.labels, predicted, static_cast<int>(class_names.size()),
      class_names);
  MetricReport report = metric_report(cm, cmd.beta);
  print_metric_table(report, std::cout);
  std::cout << metric_report_json(report) << "\n";

  if (cmd.telemetry) {
    TelemetryRecord rec = measure_forward(
        spec, store, first_rows(side.images, 16), "evaluate-infer");
    std::cout << telemetry_json(rec) << "\n";
  }
  return 0;
}

struct ClassifyCmd {
  ModelOpts model;
  std::string image;
  std::string weights;
  std::string classes_file;
  std::string db_path;
  uint64_t seed = 42;
};

int run_classify(const ClassifyCmd& cmd) {
  echo_config("classify", json{{"image", cmd.image},
                               {"weights", cmd.weights},
                               {"classes_file", cmd.classes_file},
                               {"db", cmd.db_path},
                               {"image_size", cmd.model.image_size}});
  require_path(cmd.image, "image");
  require_path(cmd.db_path, "database");

  FishDb db = FishDb::ingest_csv(cmd.db_path);
  ClassifierModel model;
  model.class_names = read_classes_file(cmd.classes_file);
  model.spec = build_from_opts(
      cmd.model, static_cast<int>(model.class_names.size()));
  Tensor<float> none;
  model.store = prepare_weights(model.spec, cmd.weights, cmd.seed, none);
  validate_model_db(model, db);

  Tensor<float> raw = load_image_resized(cmd.image, cmd.model.image_size);
  Tensor<float> img = rescale(raw);
  PipelineResult result = classify_pipeline(img, model, db);
  std::cout << verdict_json(result.species, result.verdict) << "\n";
  return 0;
}

struct PreviewCmd {
  AugOpts aug;
  std::string image;
  std::string out_dir = "preview";
  int count = 5;
  uint64_t seed = 42;
  int image_size = 224;
};

int run_preview(const PreviewCmd& cmd) {
  echo_config("augment-preview", json{{"image", cmd.image},
                                      {"out_dir", cmd.out_dir},
                                      {"count", cmd.count},
                                      {"seed", cmd.seed}});
  require_path(cmd.image, "image");
  AugmentConfig cfg = cmd.aug.cfg;
  cfg.seed = cmd.seed;
  cfg.validate();

  Tensor<float> img =
      rescale(load_image_resized(cmd.image, cmd.image_size));
  fs::create_directories(cmd.out_dir);
  Rng batch_rng(cfg.seed);
  for (int i = 0; i < cmd.count; ++i) {
    Rng rng = batch_rng.split(static_cast<uint64_t>(i));
    DrawnParams p = draw_params(cfg, rng, img.dim(1), img.dim(0));
    Tensor<float> t = apply_params(img, p);
    std::string path =
        (fs::path(cmd.out_dir) / ("aug" + std::to_string(i) + ".png"))
            .string();
    save_png(path, t);
    std::cout << path << "\n";
  }
  return 0;
}

struct ParamsCmd {
  ModelOpts model;
  int classes = 2;
  bool table = false;
};

int run_params(const ParamsCmd& cmd) {
  ArchitectureSpec spec = build_from_opts(cmd.model, cmd.classes);

  // Reference comparison regardless of the configured head: a 1000-class
  // single-dense baseline top layer versus the class-independent reduced
  // trunk.
  ModelOpts base = cmd.model;
  base.head = "baseline";
  ArchitectureSpec baseline = build_from_opts(base, 1000);
  int64_t baseline_head =
      count_params(baseline, ParamScope::Head, ParamCounting::Total);
  ModelOpts reduced = cmd.model;
  reduced.head = "reduced";
  ArchitectureSpec reduced_spec = build_from_opts(reduced, 1000);
  int64_t trunk = head_trunk_params(reduced_spec);

  std::cout << "baseline top layer parameters (1000 classes): "
            << baseline_head << "\n";
  std::cout << "reduced head trunk parameters: " << trunk << "\n";
  std::ostringstream ratio;
  ratio.precision(3);
  ratio << std::fixed
        << static_cast<double>(trunk) / static_cast<double>(baseline_head);
  std::cout << "trunk/baseline ratio: " << ratio.str() << "\n";

  std::cout << "model (" << cmd.model.head << " head, " << cmd.classes
            << " classes): total "
            << count_params(spec, ParamScope::All, ParamCounting::Total)
            << ", trainable "
            << count_params(spec, ParamScope::All, ParamCounting::Trainable)
            << ", head "
            << count_params(spec, ParamScope::Head, ParamCounting::Total)
            << ", backbone "
            << count_params(spec, ParamScope::Backbone, ParamCounting::Total)
            << "\n";
  if (cmd.table) print_layer_table(spec, std::cout);
  return 0;
}

struct FlopsCmd {
  ModelOpts model;
  int classes = 2;
  bool table = false;
};

int run_flops(const FlopsCmd& cmd) {
  ArchitectureSpec spec = build_from_opts(cmd.model, cmd.classes);
  if (cmd.table) print_layer_table(spec, std::cout);
  std::cout << "total multiply-accumulates per sample: " << count_flops(spec)
            << "\n";
  return 0;
}

struct SplitCmd {
  int64_t n = 0;
  double ratio = 0.8;
  std::string data_root;
  uint64_t seed = 42;
};

int run_split(const SplitCmd& cmd) {
  if (cmd.n > 0) {
    auto [train, test] = split_sizes(cmd.n, cmd.ratio);
    std::cout << "train " << train << " / test " << test << "\n";
    return 0;
  }
  if (cmd.data_root.empty())
    throw ConfigError("split needs --n or --data-root");
  require_path(cmd.data_root, "data root");
  DatasetManifest manifest = DatasetManifest::scan(cmd.data_root);
  manifest = dataset_split(manifest, cmd.ratio, cmd.seed);
  std::cout << "train " << manifest.count(SplitSide::Train) << " / test "
            << manifest.count(SplitSide::Test) << "\n";
  return 0;
}

struct DbLookupCmd {
  std::string db_path;
  std::string species;
  std::string genus;
};

int run_db_lookup(const DbLookupCmd& cmd) {
  require_path(cmd.db_path, "database");
  FishDb db = FishDb::ingest_csv(cmd.db_path);
  if (!cmd.species.empty()) {
    auto resolved = db.resolve(cmd.species);
    if (!resolved)
      throw LookupError("'" + cmd.species +
                        "' matches no species or genus in the database");
    if (const auto* amb = std::get_if<GenusAmbiguity>(&*resolved)) {
      json j;
      j["genus"] = amb->genus;
      j["ambiguous"] = true;
      j["commercial_ids"] = amb->commercial_ids;
      j["danger_ids"] = amb->danger_ids;
      std::cout << j.dump() << "\n";
      return 0;
    }
    std::cout << verdict_json(
                     cmd.species,
                     std::get<ConsumabilityVerdict>(*resolved))
              << "\n";
    return 0;
  }
  if (cmd.genus.empty())
    throw ConfigError("db lookup needs --species or --genus");
  GenusLookup result = db.lookup_genus(cmd.genus);
  if (const auto* amb = std::get_if<GenusAmbiguity>(&result)) {
    json j;
    j["genus"] = amb->genus;
    j["ambiguous"] = true;
    j["commercial_ids"] = amb->commercial_ids;
    j["danger_ids"] = amb->danger_ids;
    std::cout << j.dump() << "\n";
    return 0;
  }
  std::cout << verdict_json(cmd.genus, std::get<ConsumabilityVerdict>(result))
            << "\n";
  return 0;
}

struct BenchCmd {
  ModelOpts model;
  DataOpts data;
  double lr = 1e-2;
  int epochs = 10;
  uint64_t seed = 42;
  std::vector<int> batch_sizes = {16, 32, 64};
};

int run_activation_bench(BenchCmd cmd) {
  cmd.data.synthetic = cmd.data.data_root.empty() ? true : cmd.data.synthetic;
  echo_config("activation-bench", json{{"image_size", cmd.model.image_size},
                                       {"width", cmd.model.width},
                                       {"classes", cmd.data.classes},
                                       {"per_class", cmd.data.per_class},
                                       {"learning_rate", cmd.lr},
                                       {"epochs", cmd.epochs},
                                       {"seed", cmd.seed},
                                       {"batch_sizes", cmd.batch_sizes}});

  TrainData data = resolve_dataset(cmd.data, cmd.model.image_size, cmd.seed);
  const int num_classes = static_cast<int>(data.train.class_names.size());

  const std::vector<std::string> kinds = {"sigmoid", "tanh", "relu", "swish"};
  std::map<std::pair<std::string, int>, SweepRow> results;

  for (const auto& kind : kinds) {
    ModelOpts m = cmd.model;
    m.activation = kind;
    ArchitectureSpec spec = build_from_opts(m, num_classes);
    WeightStore<float> store = prepare_weights(
        spec, "", cmd.seed, first_rows(data.train.images, 64));
    for (int bs : cmd.batch_sizes) {
      TrainConfig tc;
      tc.learning_rate = cmd.lr;
      tc.epochs = cmd.epochs;
      tc.batch_size = bs;
      tc.seed = cmd.seed;
      tc.activation = ActivationKind::parse(kind);
      TrainReport rep = train_head(spec, store, data, tc);
      SweepRow row;
      row.learning_rate = cmd.lr;
      row.final_train_accuracy = rep.epochs.back().train_accuracy;
      row.final_eval_accuracy = rep.epochs.back().eval_accuracy;
      results[{kind, bs}] = row;
    }
  }

  std::cout << std::left << std::setw(10) << "activation";
  for (int bs : cmd.batch_sizes)
    std::cout << std::right << std::setw(14)
              << ("batch " + std::to_string(bs));
  std::cout << "\n";
  for (const auto& kind : kinds) {
    std::cout << std::left << std::setw(10) << kind;
    for (int bs : cmd.batch_sizes) {
      std::ostringstream cell;
      cell.precision(4);
      cell << std::fixed << results[{kind, bs}].final_train_accuracy;
      std::cout << std::right << std::setw(14) << cell.str();
    }
    std::cout << "\n";
  }

  // Informational only: toy-scale ordering may differ from full-scale runs.
  for (int bs : cmd.batch_sizes) {
    double swish_acc = results[{"swish", bs}].final_train_accuracy;
    double relu_acc = results[{"relu", bs}].final_train_accuracy;
    std::cout << "note: batch " << bs << ": swish "
              << (swish_acc >= relu_acc ? ">=" : "<") << " relu ("
              << swish_acc << " vs " << relu_acc << ")\n";
  }

  json j;
  j["schema"] = 1;
  j["batch_sizes"] = cmd.batch_sizes;
  for (const auto& [key, row] : results)
    j["results"][key.first]["batch" + std::to_string(key.second)] = {
        {"train_accuracy", row.final_train_accuracy},
        {"eval_accuracy", row.final_eval_accuracy}};
  std::cout << j.dump() << "\n";
  return 0;
}

struct SweepCmd {
  ModelOpts model;
  DataOpts data;
  std::vector<double> grid = {0.1, 0.01, 0.001, 1e-4, 1e-5};
  int epochs = 10;
  int batch_size = 32;
  uint64_t seed = 42;
};

int run_sweep(SweepCmd cmd) {
  cmd.data.synthetic = cmd.data.data_root.empty() ? true : cmd.data.synthetic;
  echo_config("sweep", json{{"grid", cmd.grid},
                            {"epochs", cmd.epochs},
                            {"batch_size", cmd.batch_size},
                            {"seed", cmd.seed}});

  TrainData data = resolve_dataset(cmd.data, cmd.model.image_size, cmd.seed);
  ArchitectureSpec spec = build_from_opts(
      cmd.model, static_cast<int>(data.train.class_names.size()));
  WeightStore<float> store = prepare_weights(
      spec, "", cmd.seed, first_rows(data.train.images, 64));

  TrainConfig tc;
  tc.epochs = cmd.epochs;
  tc.batch_size = cmd.batch_size;
  tc.seed = cmd.seed;
  tc.activation = ActivationKind::parse(cmd.model.activation);

  std::vector<std::string> warnings;
  auto table = lr_sweep(spec, store, data, cmd.grid, tc, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  std::cout << std::left << std::setw(12) << "rate" << std::right
            << std::setw(12) << "train acc" << std::setw(12) << "eval acc"
            << "\n";
  for (const auto& row : table) {
    std::cout << std::left << std::setw(12) << row.learning_rate << std::right
              << std::fixed << std::setprecision(4) << std::setw(12)
              << row.final_train_accuracy << std::setw(12)
              << row.final_eval_accuracy << "\n";
  }
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"depthwise-separable CNN toolkit for fish classification"};
  app.require_subcommand(1);

  TrainCmd train_cmd;
  auto* train = app.add_subcommand("train", "head-only transfer learning");
  train->set_config("--config", "", "flat key=value config file");
  add_model_opts(train, train_cmd.model);
  add_data_opts(train, train_cmd.data);
  add_aug_opts(train, train_cmd.aug);
  train->add_option("--lr", train_cmd.lr, "SGD learning rate")
      ->capture_default_str();
  train->add_option("--epochs", train_cmd.epochs)->capture_default_str();
  train->add_option("--batch-size", train_cmd.batch_size)
      ->capture_default_str();
  train->add_option("--seed", train_cmd.seed)
      ->envname("MMNET_SEED")
      ->capture_default_str();
  train->add_option("--weights", train_cmd.weights_in,
                    "start from an existing weight container");
  train->add_option("--out", train_cmd.out_dir, "output directory")
      ->capture_default_str();
  train->add_option("--checkpoint-every", train_cmd.checkpoint_every,
                    "write a checkpoint every N epochs (0 = off)")
      ->capture_default_str();
  train->add_flag("--telemetry", train_cmd.telemetry);

  EvaluateCmd eval_cmd;
  auto* evaluate =
      app.add_subcommand("evaluate", "metric report on a dataset split");
  evaluate->set_config("--config", "", "flat key=value config file");
  add_model_opts(evaluate, eval_cmd.model);
  add_data_opts(evaluate, eval_cmd.data);
  evaluate->add_option("--weights", eval_cmd.weights)->required();
  evaluate->add_option("--classes-file", eval_cmd.classes_file)->required();
  evaluate->add_option("--beta", eval_cmd.beta, "F-score beta")
      ->capture_default_str();
  evaluate->add_option("--seed", eval_cmd.seed)
      ->envname("MMNET_SEED")
      ->capture_default_str();
  evaluate->add_option("--side", eval_cmd.side, "train|test")
      ->capture_default_str();
  evaluate->add_flag("--telemetry", eval_cmd.telemetry);

  ClassifyCmd classify_cmd;
  auto* classify = app.add_subcommand(
      "classify", "species prediction plus consumability verdict");
  add_model_opts(classify, classify_cmd.model);
  classify->add_option("--image", classify_cmd.image)->required();
  classify->add_option("--weights", classify_cmd.weights)->required();
  classify->add_option("--classes-file", classify_cmd.classes_file)
      ->required();
  classify->add_option("--db", classify_cmd.db_path)->required();
  classify->add_option("--seed", classify_cmd.seed)
      ->envname("MMNET_SEED")
      ->capture_default_str();

  PreviewCmd preview_cmd;
  auto* preview =
      app.add_subcommand("augment-preview", "write augmented PNG samples");
  add_aug_opts(preview, preview_cmd.aug);
  preview->add_option("--image", preview_cmd.image)->required();
  preview->add_option("--out", preview_cmd.out_dir)->capture_default_str();
  preview->add_option("--count", preview_cmd.count)->capture_default_str();
  preview->add_option("--seed", preview_cmd.seed)
      ->envname("MMNET_SEED")
      ->capture_default_str();
  preview->add_option("--image-size", preview_cmd.image_size)
      ->capture_default_str();

  ParamsCmd params_cmd;
  auto* params =
      app.add_subcommand("params", "parameter accounting and head ratio");
  add_model_opts(params, params_cmd.model);
  params->add_option("--classes", params_cmd.classes)->capture_default_str();
  params->add_flag("--table", params_cmd.table, "print the layer table");

  FlopsCmd flops_cmd;
  auto* flops =
      app.add_subcommand("flops", "multiply-accumulate accounting");
  add_model_opts(flops, flops_cmd.model);
  flops->add_option("--classes", flops_cmd.classes)->capture_default_str();
  flops->add_flag("--table", flops_cmd.table, "print the layer table");

  SplitCmd split_cmd;
  auto* split = app.add_subcommand("split", "train/test split sizes");
  split->add_option("--n", split_cmd.n, "total item count (pure arithmetic)");
  split->add_option("--ratio", split_cmd.ratio)->capture_default_str();
  split->add_option("--data-root", split_cmd.data_root);
  split->add_option("--seed", split_cmd.seed)
      ->envname("MMNET_SEED")
      ->capture_default_str();

  DbLookupCmd db_cmd;
  auto* db = app.add_subcommand("db", "fish database queries");
  db->require_subcommand(1);
  auto* lookup = db->add_subcommand("lookup", "consumability lookup");
  lookup->add_option("--db", db_cmd.db_path)->required();
  lookup->add_option("--species", db_cmd.species);
  lookup->add_option("--genus", db_cmd.genus);

  BenchCmd bench_cmd;
  auto* bench = app.add_subcommand(
      "activation-bench",
      "train the head under each activation and batch size");
  bench->set_config("--config", "", "flat key=value config file");
  add_model_opts(bench, bench_cmd.model);
  add_data_opts(bench, bench_cmd.data);
  bench->add_option("--lr", bench_cmd.lr)->capture_default_str();
  bench->add_option("--epochs", bench_cmd.epochs)->capture_default_str();
  bench->add_option("--seed", bench_cmd.seed)
      ->envname("MMNET_SEED")
      ->capture_default_str();
  bench->add_option("--batch-sizes", bench_cmd.batch_sizes)
      ->delimiter(',')
      ->capture_default_str();

  SweepCmd sweep_cmd;
  auto* sweep = app.add_subcommand(
      "sweep", "learning-rate sweep, descending grid");
  add_model_opts(sweep, sweep_cmd.model);
  add_data_opts(sweep, sweep_cmd.data);
  sweep->add_option("--grid", sweep_cmd.grid)
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--epochs", sweep_cmd.epochs)->capture_default_str();
  sweep->add_option("--batch-size", sweep_cmd.batch_size)
      ->capture_default_str();
  sweep->add_option("--seed", sweep_cmd.seed)
      ->envname("MMNET_SEED")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) return run_train(train_cmd);
    if (*evaluate) return run_evaluate(eval_cmd);
    if (*classify) return run_classify(classify_cmd);
    if (*preview) return run_preview(preview_cmd);
    if (*params) return run_params(params_cmd);
    if (*flops) return run_flops(flops_cmd);
    if (*split) return run_split(split_cmd);
    if (*lookup) return run_db_lookup(db_cmd);
    if (*bench) return run_activation_bench(bench_cmd);
    if (*sweep) return run_sweep(sweep_cmd);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace mmnet::cli
