#pragma once

// Train/evaluate loop: seeded per-class split, optional synthetic
// augmentation of the hyperplane-construction set, projection model,
// embedding, one-vs-all SVM, accuracy. Also the training-set degradation
// study and the embedding distortion sweep.
//
// Config JSON mirrors ExperimentConfig field for field; list-valued fields
// accept a scalar. Unknown fields are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rose/classifier.h"
#include "rose/dataset.h"
#include "rose/projection.h"
#include "rose/report.h"
#include "rose/stein.h"
#include "rose/synthesis.h"

namespace rose {

// Number of synthetic hyperplane-construction points: none, the number of
// real reference points ("n"), the per-class training count ("m"), or a
// fixed number.
struct SyntheticCount {
  enum class Policy { kNone, kN, kM, kFixed };
  Policy policy = Policy::kNone;
  int fixed = 0;

  int resolve(int reference_points, int per_class) const;
  bool is_none() const { return policy == Policy::kNone || (policy == Policy::kFixed && fixed == 0); }
  std::string to_string() const;
  static SyntheticCount from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ExperimentConfig {
  // Candidate lists; more than one value in any list enables validation.
  std::vector<double> sigmas{0.5};
  std::vector<int> k_multipliers{2};  // k = multiplier * labeled training count
  std::vector<SyntheticCount> synthetic_counts{SyntheticCount{}};
  std::optional<int> t;  // default_exemplar_count(p) when unset
  ExponentMode exponent_mode = ExponentMode::kWhitening;
  PsdPolicy psd_policy = PsdPolicy::kClamp;
  DirectionMode direction_mode = DirectionMode::kTangentGaussian;
  int train_per_class = 25;
  std::optional<int> test_per_class;  // all remaining when unset
  int repetitions = 10;
  std::uint64_t seed = 0;
  double svm_lambda = 1e-3;
  int svm_epochs = 200;
  double validation_fraction = 0.2;
  bool knn_baseline = false;
  int knn_k = 1;
  int threads = 1;
  bool record_timing = false;

  bool needs_validation() const;
  // Raises ConfigError.
  void check() const;
  void check_against(const Dataset& data) const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig read_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Per-class split of dataset indices for one repetition. Each class's
// indices are shuffled; the first train_per_class go to training (the last
// validation share of those to validation when validating), the next
// test_per_class (or all the rest) to test.
struct Split {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};
Split split_repetition(const ExperimentConfig& cfg, const Dataset& data, int repetition);
SeedChain seed_chain(const ExperimentConfig& cfg, int repetition);

Report run_experiment(const ExperimentConfig& cfg, const Dataset& data);

// For each c, every size-c subset of classes is removed from the
// hyperplane-construction set while the classifier still trains on all
// classes; ROSE and ROSES accuracies are averaged over repetitions and
// then over subsets. ROSES uses the config's nonzero synthetic candidates,
// or "n" when it has none.
DegradationReport degradation_study(const ExperimentConfig& cfg, const Dataset& data,
                                    const std::vector<int>& excluded_counts);

// Model over the first k columns of `model`; hyperplanes are nested in k.
ProjectionModel truncate_model(const ProjectionModel& model, int k);

// Distortion report per k, for truncations of one model built with the
// largest k.
JlSweep jl_sweep(const ProjectionModel& model, const std::vector<SpdMatrix>& points,
                 double epsilon, const std::vector<int>& ks);

// Model from the training split of repetition 0 with the first candidate
// parameters and k = max(ks); points are that repetition's test set.
struct JlSetup {
  ProjectionModel model;
  std::vector<SpdMatrix> points;
};
JlSetup jl_setup(const ExperimentConfig& cfg, const Dataset& data, int k);

}  // namespace rose

namespace rose {

// A projection model and the classifier trained on its embeddings, fitted on
// every descriptor of a dataset with the config's first candidate values and
// the seeds of repetition 0.
struct TrainedPipeline {
  ProjectionModel model;
  TrainedClassifier classifier;
};

TrainedPipeline train_pipeline(const ExperimentConfig& cfg, const Dataset& data);
AccuracyReport evaluate_pipeline(const TrainedPipeline& pipeline, const Dataset& data,
                                 int threads = 1);

std::string serialize_pipeline(const TrainedPipeline& pipeline);
TrainedPipeline deserialize_pipeline(const std::string& text);

}  // namespace rose
