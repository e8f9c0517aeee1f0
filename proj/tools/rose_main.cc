// Command-line front end. Exit codes: 0 success, 2 configuration error,
// 3 data error, 1 unexpected failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rose/benchmark.h"
#include "rose/dataset.h"
#include "rose/error.h"
#include "rose/experiment.h"
#include "rose/matrix_io.h"
#include "rose/projection.h"
#include "rose/report.h"
#include "rose/synthesis.h"

namespace {

using namespace rose;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kTSampleTooLarge:
    case ErrorCode::kExclusionExceedsClasses:
      return true;
    default:
      return false;
  }
}

ExperimentConfig load_config(const Globals& g) {
  ExperimentConfig cfg;
  if (!g.config.empty()) {
    if (!fs::exists(g.config)) {
      throw Error(ErrorCode::kConfigError, "config file not found: " + g.config);
    }
    cfg = read_config(g.config);
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.check();
  return cfg;
}

Dataset load_manifest_dataset(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::kConfigError, "--manifest is required");
  if (!fs::exists(path)) throw Error(ErrorCode::kFileNotFound, "manifest not found: " + path);
  return load_dataset(read_manifest(path));
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text_file(g.out, text);
  }
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kConfigError, std::string("bad integer in ") + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kConfigError, std::string(what) + " is empty");
  return out;
}

nlohmann::json accuracy_json(const AccuracyReport& r) {
  return {{"accuracy", format_double(r.accuracy)},
          {"correct", r.correct},
          {"total", r.total},
          {"confusion", r.confusion}};
}

int run_extract(const Globals& g, const std::string& manifest_path) {
  if (g.out.empty()) throw Error(ErrorCode::kConfigError, "extract needs --out <directory>");
  if (manifest_path.empty()) throw Error(ErrorCode::kConfigError, "--manifest is required");
  if (!fs::exists(manifest_path)) {
    throw Error(ErrorCode::kFileNotFound, "manifest not found: " + manifest_path);
  }
  const DatasetManifest manifest = read_manifest(manifest_path);
  const Dataset data = load_dataset(manifest);
  fs::create_directories(g.out);
  DatasetManifest out;
  out.feature_mode = FeatureMode::kPrecomputed;
  std::vector<std::vector<Eigen::MatrixXd>> per_entry(manifest.entries.size());
  for (size_t i = 0; i < data.items.size(); ++i) {
    per_entry[static_cast<size_t>(data.entry_index[i])].push_back(data.items[i].point.matrix());
  }
  for (size_t e = 0; e < per_entry.size(); ++e) {
    const std::string name = "entry_" + std::to_string(e) + ".txt";
    write_matrix_file(fs::path(g.out) / name, per_entry[e]);
    out.entries.push_back({name, manifest.entries[e].label, EntryKind::kMatrix});
  }
  write_text_file(fs::path(g.out) / "manifest.json", manifest_to_json(out));
  return kExitOk;
}

int run_train(const Globals& g, const std::string& manifest_path) {
  const ExperimentConfig cfg = load_config(g);
  const Dataset data = load_manifest_dataset(manifest_path);
  emit(g, serialize_pipeline(train_pipeline(cfg, data)));
  return kExitOk;
}

int run_eval(const Globals& g, const std::string& manifest_path, const std::string& model_path) {
  if (model_path.empty()) throw Error(ErrorCode::kConfigError, "--model is required");
  const TrainedPipeline pipeline = deserialize_pipeline(read_text_file(model_path));
  const Dataset data = load_manifest_dataset(manifest_path);
  nlohmann::json j = accuracy_json(evaluate_pipeline(pipeline, data));
  j["schema"] = "rose-eval-report";
  j["schema_version"] = kReportSchemaVersion;
  emit(g, j.dump(2) + "\n");
  return kExitOk;
}

int run_run(const Globals& g, const std::string& manifest_path) {
  const ExperimentConfig cfg = load_config(g);
  const Dataset data = load_manifest_dataset(manifest_path);
  emit(g, serialize_report(run_experiment(cfg, data)));
  return kExitOk;
}

int run_degrade(const Globals& g, const std::string& manifest_path, const std::string& excluded) {
  const ExperimentConfig cfg = load_config(g);
  const Dataset data = load_manifest_dataset(manifest_path);
  std::vector<int> counts;
  if (excluded.empty()) {
    for (int c = 0; c < data.n_classes; ++c) counts.push_back(c);
  } else {
    counts = parse_int_list(excluded, "--excluded");
  }
  emit(g, serialize_degradation(degradation_study(cfg, data, counts)));
  return kExitOk;
}

struct SynthArgs {
  std::string input;
  int count = 0;
  std::string direction = "tangent_gaussian";
  bool benchmark = false;
  BenchmarkSpec spec;
};

int run_synth(const Globals& g, const SynthArgs& a) {
  const std::uint64_t seed = g.seed.value_or(0);
  if (a.benchmark) {
    if (g.out.empty()) throw Error(ErrorCode::kConfigError, "synth --benchmark needs --out <directory>");
    BenchmarkSpec spec = a.spec;
    spec.seed = seed;
    const Benchmark b = make_benchmark(spec);
    fs::create_directories(g.out);
    DatasetManifest m;
    m.feature_mode = FeatureMode::kPrecomputed;
    for (int c = 0; c < spec.classes; ++c) {
      std::vector<Eigen::MatrixXd> mats;
      for (const auto& s : b.samples) {
        if (s.label == c) mats.push_back(s.point.matrix());
      }
      const std::string name = "class_" + std::to_string(c) + ".txt";
      write_matrix_file(fs::path(g.out) / name, mats);
      m.entries.push_back({name, c, EntryKind::kMatrix});
    }
    write_text_file(fs::path(g.out) / "manifest.json", manifest_to_json(m));
    return kExitOk;
  }
  if (a.input.empty()) throw Error(ErrorCode::kConfigError, "synth needs --input or --benchmark");
  if (a.count < 0) throw Error(ErrorCode::kConfigError, "--count must be >= 0");
  std::vector<SpdMatrix> training;
  for (const auto& raw : read_matrix_file(a.input)) training.push_back(validate_spd(raw));
  SynthesisConfig cfg;
  cfg.count = a.count;
  cfg.seed = seed;
  if (a.direction == "training_point") {
    cfg.direction_mode = DirectionMode::kTrainingPoint;
  } else if (a.direction != "tangent_gaussian") {
    throw Error(ErrorCode::kConfigError, "unknown --direction '" + a.direction + "'");
  }
  std::vector<Eigen::MatrixXd> out;
  for (const auto& s : generate_synthetic(training, cfg)) out.push_back(s.matrix());
  emit(g, format_matrices(out));
  return kExitOk;
}

struct JlArgs {
  std::string manifest;
  std::string model;
  std::string points;
  double epsilon = 0.3;
  std::string ks;
};

int run_jl(const Globals& g, const JlArgs& a) {
  if (!(a.epsilon > 0.0 && a.epsilon < 0.5)) {
    throw Error(ErrorCode::kConfigError, "--epsilon must lie in (0, 1/2)");
  }
  std::optional<ProjectionModel> model;
  std::vector<SpdMatrix> points;
  std::vector<int> ks;
  if (!a.ks.empty()) ks = parse_int_list(a.ks, "--k");
  if (!a.model.empty()) {
    if (a.points.empty()) throw Error(ErrorCode::kConfigError, "jl-check --model needs --points");
    const std::string text = read_text_file(a.model);
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.value("format", std::string()) == "rose-pipeline") {
      model = deserialize_pipeline(text).model;
    } else {
      model = deserialize_model(text);
    }
    for (const auto& raw : read_matrix_file(a.points)) points.push_back(validate_spd(raw));
    if (ks.empty()) ks.push_back(model->k());
  } else {
    const ExperimentConfig cfg = load_config(g);
    const Dataset data = load_manifest_dataset(a.manifest);
    if (ks.empty()) ks.push_back(cfg.k_multipliers.front() * cfg.train_per_class * data.n_classes);
    JlSetup setup = jl_setup(cfg, data, *std::max_element(ks.begin(), ks.end()));
    model = std::move(setup.model);
    points = std::move(setup.points);
  }
  emit(g, serialize_jl(jl_sweep(*model, points, a.epsilon, ks)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random projection of SPD descriptors: extract, train, evaluate, study."};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed overriding the config seed");
  app.add_option("--config", g.config, "Experiment config JSON");
  app.add_option("--out", g.out, "Output path (standard output when absent)");

  std::string manifest;
  auto* extract = app.add_subcommand("extract", "Compute region covariance descriptors");
  extract->add_option("--manifest", manifest, "Dataset manifest JSON")->required();

  auto* train = app.add_subcommand("train", "Fit projection model and classifier on a dataset");
  train->add_option("--manifest", manifest, "Dataset manifest JSON")->required();

  std::string model_path;
  auto* eval = app.add_subcommand("eval", "Score a trained pipeline on a dataset");
  eval->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
  eval->add_option("--model", model_path, "Pipeline file written by train")->required();

  auto* run = app.add_subcommand("run", "Repeated split train/evaluate experiment");
  run->add_option("--manifest", manifest, "Dataset manifest JSON")->required();

  std::string excluded;
  auto* degrade = app.add_subcommand("degrade", "Training-set degradation study");
  degrade->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
  degrade->add_option("--excluded", excluded, "Comma-separated excluded class counts");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Sample synthetic SPD points or a benchmark dataset");
  synth->add_option("--input", synth_args.input, "Matrix file of training points");
  synth->add_option("--count", synth_args.count, "Number of synthetic points");
  synth->add_option("--direction", synth_args.direction, "training_point or tangent_gaussian");
  synth->add_flag("--benchmark", synth_args.benchmark, "Write a labeled Wishart-cluster dataset");
  synth->add_option("--classes", synth_args.spec.classes, "Benchmark classes");
  synth->add_option("--per-class", synth_args.spec.per_class, "Benchmark samples per class");
  synth->add_option("--dim", synth_args.spec.dim, "Benchmark matrix dimension");
  synth->add_option("--separation", synth_args.spec.separation, "Benchmark centre separation");
  synth->add_option("--dof", synth_args.spec.dof, "Benchmark Wishart degrees of freedom");

  JlArgs jl_args;
  auto* jl = app.add_subcommand("jl-check", "Embedding distance distortion report");
  jl->add_option("--manifest", jl_args.manifest, "Dataset manifest JSON");
  jl->add_option("--model", jl_args.model, "Projection model or pipeline file");
  jl->add_option("--points", jl_args.points, "Matrix file of points");
  jl->add_option("--epsilon", jl_args.epsilon, "Distortion tolerance in (0, 1/2)");
  jl->add_option("--k", jl_args.ks, "Comma-separated hyperplane counts (k sweep)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*extract) return run_extract(g, manifest);
    if (*train) return run_train(g, manifest);
    if (*eval) return run_eval(g, manifest, model_path);
    if (*run) return run_run(g, manifest);
    if (*degrade) return run_degrade(g, manifest, excluded);
    if (*synth) return run_synth(g, synth_args);
    if (*jl) return run_jl(g, jl_args);
  } catch (const Error& e) {
    std::cerr << "rose: " << e.what() << "\n";
    return is_config_error(e.code()) ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "rose: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
