#include "rose/report.h"

#include <cmath>

#include "rose/error.h"
#include "rose/matrix_io.h"

namespace rose {

namespace {

using nlohmann::json;

constexpr const char* kReportTag = "rose-report";
constexpr const char* kDegradationTag = "rose-degradation-report";
constexpr const char* kJlTag = "rose-jl-report";

json real(double v) { return format_double(v); }
double real_from(const json& j) { return parse_double(j.get<std::string>()); }

json seed(std::uint64_t v) { return std::to_string(v); }
std::uint64_t seed_from(const json& j) { return std::stoull(j.get<std::string>()); }

json reals(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(real(x));
  return out;
}

std::vector<double> reals_from(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(real_from(x));
  return out;
}

void require_tag(const json& j, const char* tag) {
  if (!j.is_object() || j.value("schema", std::string()) != tag) {
    throw Error(ErrorCode::kParseError, std::string("not a ") + tag + " document");
  }
  if (j.value("schema_version", 0) != kReportSchemaVersion) {
    throw Error(ErrorCode::kParseError, std::string("unsupported ") + tag + " schema version");
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("invalid JSON: ") + e.what());
  }
}

json repetition_to_json(const RepetitionRecord& r) {
  json j;
  j["index"] = r.index;
  j["seeds"] = {{"repetition", seed(r.seeds.repetition)}, {"split", seed(r.seeds.split)},
                {"synthetic", seed(r.seeds.synthetic)}, {"hyperplane", seed(r.seeds.hyperplane)},
                {"svm", seed(r.seeds.svm)}};
  j["sigma"] = real(r.sigma);
  j["k_multiplier"] = r.k_multiplier;
  j["k"] = r.k;
  j["t"] = r.t;
  j["reference_count"] = r.reference_count;
  j["synthetic_count"] = r.synthetic_count;
  j["synthetic_policy"] = r.synthetic_policy;
  j["exponent_mode"] = r.exponent_mode;
  j["clamped_mass"] = real(r.clamped_mass);
  j["accuracy"] = real(r.accuracy.accuracy);
  j["correct"] = r.accuracy.correct;
  j["total"] = r.accuracy.total;
  j["confusion"] = r.accuracy.confusion;
  if (r.knn_accuracy) j["knn_accuracy"] = real(*r.knn_accuracy);
  if (r.timing) {
    j["timing"] = {{"build_seconds", real(r.timing->build_seconds)},
                   {"embed_seconds", real(r.timing->embed_seconds)},
                   {"train_seconds", real(r.timing->train_seconds)}};
  }
  return j;
}

RepetitionRecord repetition_from_json(const json& j) {
  RepetitionRecord r;
  r.index = j.at("index").get<int>();
  const json& s = j.at("seeds");
  r.seeds = {seed_from(s.at("repetition")), seed_from(s.at("split")),
             seed_from(s.at("synthetic")), seed_from(s.at("hyperplane")),
             seed_from(s.at("svm"))};
  r.sigma = real_from(j.at("sigma"));
  r.k_multiplier = j.at("k_multiplier").get<int>();
  r.k = j.at("k").get<int>();
  r.t = j.at("t").get<int>();
  r.reference_count = j.at("reference_count").get<int>();
  r.synthetic_count = j.at("synthetic_count").get<int>();
  r.synthetic_policy = j.at("synthetic_policy").get<std::string>();
  r.exponent_mode = j.at("exponent_mode").get<std::string>();
  r.clamped_mass = real_from(j.at("clamped_mass"));
  r.accuracy.accuracy = real_from(j.at("accuracy"));
  r.accuracy.correct = j.at("correct").get<long long>();
  r.accuracy.total = j.at("total").get<long long>();
  r.accuracy.confusion = j.at("confusion").get<std::vector<std::vector<long long>>>();
  if (j.contains("knn_accuracy")) r.knn_accuracy = real_from(j.at("knn_accuracy"));
  if (j.contains("timing")) {
    const json& t = j.at("timing");
    r.timing = StageTiming{real_from(t.at("build_seconds")), real_from(t.at("embed_seconds")),
                           real_from(t.at("train_seconds"))};
  }
  return r;
}

}  // namespace

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void finalize_report(Report& report) {
  std::vector<double> acc;
  std::vector<double> knn;
  for (const auto& r : report.repetitions) {
    acc.push_back(r.accuracy.accuracy);
    if (r.knn_accuracy) knn.push_back(*r.knn_accuracy);
  }
  report.mean_accuracy = mean_of(acc);
  report.std_accuracy = sample_std_of(acc);
  report.knn_mean_accuracy.reset();
  if (!knn.empty()) report.knn_mean_accuracy = mean_of(knn);
}

json report_to_json(const Report& report) {
  json j;
  j["schema"] = kReportTag;
  j["schema_version"] = kReportSchemaVersion;
  j["mode"] = report.mode;
  j["config"] = report.config;
  j["repetitions"] = json::array();
  for (const auto& r : report.repetitions) j["repetitions"].push_back(repetition_to_json(r));
  j["mean_accuracy"] = real(report.mean_accuracy);
  j["std_accuracy"] = real(report.std_accuracy);
  if (report.knn_mean_accuracy) j["knn_mean_accuracy"] = real(*report.knn_mean_accuracy);
  return j;
}

Report report_from_json(const json& j) {
  require_tag(j, kReportTag);
  try {
    Report r;
    r.mode = j.at("mode").get<std::string>();
    r.config = j.at("config");
    for (const auto& rep : j.at("repetitions")) r.repetitions.push_back(repetition_from_json(rep));
    r.mean_accuracy = real_from(j.at("mean_accuracy"));
    r.std_accuracy = real_from(j.at("std_accuracy"));
    if (j.contains("knn_mean_accuracy")) r.knn_mean_accuracy = real_from(j.at("knn_mean_accuracy"));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed report: ") + e.what());
  }
}

std::string serialize_report(const Report& report) { return report_to_json(report).dump(2) + "\n"; }

Report deserialize_report(const std::string& text) { return report_from_json(parse_json(text)); }

std::string serialize_degradation(const DegradationReport& report) {
  json j;
  j["schema"] = kDegradationTag;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = report.config;
  j["roses_synthetic_policy"] = report.roses_synthetic_policy;
  j["points"] = json::array();
  for (const auto& p : report.points) {
    j["points"].push_back({{"excluded", p.excluded},
                           {"combination_count", p.combinations.size()},
                           {"combinations", p.combinations},
                           {"rose_by_combination", reals(p.rose_by_combination)},
                           {"roses_by_combination", reals(p.roses_by_combination)},
                           {"rose_accuracy", real(p.rose_accuracy)},
                           {"roses_accuracy", real(p.roses_accuracy)},
                           {"gap", real(p.roses_accuracy - p.rose_accuracy)}});
  }
  return j.dump(2) + "\n";
}

DegradationReport deserialize_degradation(const std::string& text) {
  const json j = parse_json(text);
  require_tag(j, kDegradationTag);
  try {
    DegradationReport r;
    r.config = j.at("config");
    r.roses_synthetic_policy = j.at("roses_synthetic_policy").get<std::string>();
    for (const auto& p : j.at("points")) {
      DegradationPoint d;
      d.excluded = p.at("excluded").get<int>();
      d.combinations = p.at("combinations").get<std::vector<std::vector<int>>>();
      d.rose_by_combination = reals_from(p.at("rose_by_combination"));
      d.roses_by_combination = reals_from(p.at("roses_by_combination"));
      d.rose_accuracy = real_from(p.at("rose_accuracy"));
      d.roses_accuracy = real_from(p.at("roses_accuracy"));
      r.points.push_back(std::move(d));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed degradation report: ") + e.what());
  }
}

std::string serialize_jl(const JlSweep& sweep) {
  json j;
  j["schema"] = kJlTag;
  j["schema_version"] = kReportSchemaVersion;
  j["epsilon"] = real(sweep.epsilon);
  j["records"] = json::array();
  for (const auto& r : sweep.records) {
    j["records"].push_back({{"k", r.k},
                            {"pair_count", r.pair_count},
                            {"epsilon", real(r.epsilon)},
                            {"fraction_within", real(r.fraction_within)},
                            {"median_distortion", real(r.median_distortion)}});
  }
  return j.dump(2) + "\n";
}

JlSweep deserialize_jl(const std::string& text) {
  const json j = parse_json(text);
  require_tag(j, kJlTag);
  try {
    JlSweep s;
    s.epsilon = real_from(j.at("epsilon"));
    for (const auto& r : j.at("records")) {
      JlReport rep;
      rep.k = r.at("k").get<int>();
      rep.pair_count = r.at("pair_count").get<long long>();
      rep.epsilon = real_from(r.at("epsilon"));
      rep.fraction_within = real_from(r.at("fraction_within"));
      rep.median_distortion = real_from(r.at("median_distortion"));
      s.records.push_back(rep);
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed JL report: ") + e.what());
  }
}

}  // namespace rose
