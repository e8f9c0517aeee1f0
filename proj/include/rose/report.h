#pragma once

// Machine-readable experiment reports. Reals are stored as shortest
// round-trip decimal strings so serialization is lossless and byte-stable.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rose/classifier.h"
#include "rose/projection.h"

namespace rose {

inline constexpr int kReportSchemaVersion = 1;

struct SeedChain {
  std::uint64_t repetition = 0;
  std::uint64_t split = 0;
  std::uint64_t synthetic = 0;
  std::uint64_t hyperplane = 0;
  std::uint64_t svm = 0;
};

struct StageTiming {
  double build_seconds = 0.0;  // synthesis, Gram matrix, hyperplanes
  double embed_seconds = 0.0;
  double train_seconds = 0.0;  // classifier fit and evaluation
};

struct RepetitionRecord {
  int index = 0;
  SeedChain seeds;
  double sigma = 0.0;
  int k_multiplier = 0;
  int k = 0;
  int t = 0;
  int reference_count = 0;  // real plus synthetic hyperplane-construction points
  int synthetic_count = 0;
  std::string synthetic_policy;
  std::string exponent_mode;
  double clamped_mass = 0.0;
  AccuracyReport accuracy;
  std::optional<double> knn_accuracy;
  std::optional<StageTiming> timing;
};

struct Report {
  std::string mode;  // "ROSE" or "ROSES"
  nlohmann::json config;
  std::vector<RepetitionRecord> repetitions;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation; 0 for one repetition
  std::optional<double> knn_mean_accuracy;
};

// Mean and sample standard deviation, summed in index order.
double mean_of(const std::vector<double>& v);
double sample_std_of(const std::vector<double>& v);
// Fills mean/std (and the baseline mean) from the repetition records.
void finalize_report(Report& report);

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);
std::string serialize_report(const Report& report);
Report deserialize_report(const std::string& text);

struct DegradationPoint {
  int excluded = 0;
  std::vector<std::vector<int>> combinations;
  // [combination] mean accuracy over repetitions
  std::vector<double> rose_by_combination;
  std::vector<double> roses_by_combination;
  double rose_accuracy = 0.0;
  double roses_accuracy = 0.0;
};

struct DegradationReport {
  nlohmann::json config;
  std::string roses_synthetic_policy;
  std::vector<DegradationPoint> points;
};

std::string serialize_degradation(const DegradationReport& report);
DegradationReport deserialize_degradation(const std::string& text);

struct JlSweep {
  double epsilon = 0.0;
  std::vector<JlReport> records;
};

std::string serialize_jl(const JlSweep& sweep);
JlSweep deserialize_jl(const std::string& text);

}  // namespace rose
