#include "rose/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <thread>

#include "rose/error.h"
#include "rose/matrix_io.h"
#include "rose/random.h"

namespace rose {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

std::string direction_to_string(DirectionMode m) {
  return m == DirectionMode::kTrainingPoint ? "training_point" : "tangent_gaussian";
}

DirectionMode direction_from_string(const std::string& s) {
  if (s == "training_point") return DirectionMode::kTrainingPoint;
  if (s == "tangent_gaussian") return DirectionMode::kTangentGaussian;
  config_error("unknown direction_mode '" + s + "'");
}

std::string policy_to_string(PsdPolicy p) { return p == PsdPolicy::kStrict ? "strict" : "clamp"; }

PsdPolicy policy_from_string(const std::string& s) {
  if (s == "strict") return PsdPolicy::kStrict;
  if (s == "clamp") return PsdPolicy::kClamp;
  config_error("unknown psd_policy '" + s + "'");
}

template <typename T>
std::vector<T> scalar_or_list(const json& j, const std::function<T(const json&)>& one) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(one(x));
  } else {
    out.push_back(one(j));
  }
  return out;
}

int validation_count(const ExperimentConfig& cfg) {
  if (!cfg.needs_validation()) return 0;
  return std::max(1, static_cast<int>(std::lround(cfg.validation_fraction * cfg.train_per_class)));
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) body(i);
    });
  }
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Stein divergences between the training pool (rows) and every point a
// repetition touches (columns), computed once and shared by all fits.
class DivergenceTable {
 public:
  DivergenceTable(const Dataset& data, const std::vector<int>& rows,
                  const std::vector<int>& cols, int threads)
      : row_of_(data.items.size(), -1), col_of_(data.items.size(), -1) {
    for (size_t r = 0; r < rows.size(); ++r) row_of_[static_cast<size_t>(rows[r])] = static_cast<int>(r);
    for (size_t c = 0; c < cols.size(); ++c) col_of_[static_cast<size_t>(cols[c])] = static_cast<int>(c);
    values_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    parallel_for(static_cast<int>(rows.size()), threads, [&](int r) {
      const SpdMatrix& ref = data.items[static_cast<size_t>(rows[static_cast<size_t>(r)])].point;
      for (size_t c = 0; c < cols.size(); ++c) {
        values_(r, static_cast<Eigen::Index>(c)) =
            stein_divergence(ref, data.items[static_cast<size_t>(cols[c])].point);
      }
    });
  }

  double at(int ref_index, int point_index) const {
    return values_(row_of_[static_cast<size_t>(ref_index)], col_of_[static_cast<size_t>(point_index)]);
  }

 private:
  std::vector<int> row_of_;
  std::vector<int> col_of_;
  Eigen::MatrixXd values_;
};

struct Candidate {
  double sigma = 0.0;
  int k_multiplier = 0;
  SyntheticCount synthetic;
};

struct FitOutcome {
  AccuracyReport accuracy;
  int k = 0;
  int t = 0;
  int reference_count = 0;
  int synthetic_count = 0;
  double clamped_mass = 0.0;
};

class RepetitionContext {
 public:
  RepetitionContext(const ExperimentConfig& cfg, const Dataset& data, int repetition)
      : cfg_(cfg), data_(data), seeds_(seed_chain(cfg, repetition)),
        split_(split_repetition(cfg, data, repetition)) {
    std::vector<int> pool = split_.train;
    pool.insert(pool.end(), split_.validation.begin(), split_.validation.end());
    std::vector<int> cols = pool;
    cols.insert(cols.end(), split_.test.begin(), split_.test.end());
    table_.emplace(data, pool, cols, cfg.threads);
    pool_ = std::move(pool);
  }

  const Split& split() const { return split_; }
  const SeedChain& seeds() const { return seeds_; }
  const std::vector<int>& pool() const { return pool_; }

  FitOutcome fit(const std::vector<int>& fit_idx, const std::vector<int>& eval_idx,
                 const std::vector<bool>& excluded, const Candidate& cand, std::string& stage,
                 StageTiming* timing) const {
    auto start = Clock::now();
    stage = "synthesis";
    std::vector<int> real_refs;
    for (int i : fit_idx) {
      if (!excluded[static_cast<size_t>(data_.items[static_cast<size_t>(i)].label)]) real_refs.push_back(i);
    }
    std::vector<SpdMatrix> refs;
    refs.reserve(real_refs.size());
    for (int i : real_refs) refs.push_back(data_.items[static_cast<size_t>(i)].point);
    const int per_class = static_cast<int>(fit_idx.size()) / data_.n_classes;
    const int n_synth = cand.synthetic.resolve(static_cast<int>(real_refs.size()), per_class);
    std::vector<SpdMatrix> synthetic;
    if (n_synth > 0) {
      SynthesisConfig scfg;
      scfg.count = n_synth;
      scfg.seed = seeds_.synthetic;
      scfg.direction_mode = cfg_.direction_mode;
      synthetic = generate_synthetic(refs, scfg);
      refs.insert(refs.end(), synthetic.begin(), synthetic.end());
    }

    stage = "model";
    ProjectionOptions opts;
    opts.k = cand.k_multiplier * static_cast<int>(fit_idx.size());
    opts.t = cfg_.t;
    opts.kernel = KernelParams{cand.sigma, cfg_.psd_policy};
    opts.exponent_mode = cfg_.exponent_mode;
    opts.seed = seeds_.hyperplane;
    const ProjectionModel model = build_projection_model(refs, opts);
    if (timing) timing->build_seconds += seconds_since(start);

    start = Clock::now();
    stage = "embed";
    auto embed_all = [&](const std::vector<int>& idx) {
      std::vector<LabeledVector> out(idx.size());
      parallel_for(static_cast<int>(idx.size()), cfg_.threads, [&](int n) {
        const int point = idx[static_cast<size_t>(n)];
        Eigen::VectorXd kv(model.p());
        Eigen::Index j = 0;
        for (int r : real_refs) kv(j++) = std::exp(-cand.sigma * table_->at(r, point));
        for (const auto& s : synthetic) {
          kv(j++) = std::exp(-cand.sigma * stein_divergence(s, data_.items[static_cast<size_t>(point)].point));
        }
        out[static_cast<size_t>(n)] = {model.project(kv), data_.items[static_cast<size_t>(point)].label};
      });
      return out;
    };
    const std::vector<LabeledVector> train_vecs = embed_all(fit_idx);
    const std::vector<LabeledVector> eval_vecs = embed_all(eval_idx);
    if (timing) timing->embed_seconds += seconds_since(start);

    start = Clock::now();
    stage = "train";
    SvmParams svm;
    svm.lambda = cfg_.svm_lambda;
    svm.epochs = cfg_.svm_epochs;
    svm.seed = seeds_.svm;
    const TrainedClassifier clf = train_ova_svm(train_vecs, svm);
    stage = "evaluate";
    FitOutcome out;
    out.accuracy = evaluate_accuracy(clf, eval_vecs);
    if (timing) timing->train_seconds += seconds_since(start);
    out.k = model.k();
    out.t = model.t();
    out.reference_count = model.p();
    out.synthetic_count = n_synth;
    out.clamped_mass = model.clamped_mass();
    return out;
  }

  // Picks the candidate with the best validation accuracy (first on ties),
  // then refits on train plus validation and scores on test.
  std::pair<Candidate, FitOutcome> select_and_fit(const std::vector<SyntheticCount>& synth_list,
                                                  const std::vector<bool>& excluded,
                                                  std::string& stage, StageTiming* timing) const {
    std::vector<Candidate> candidates;
    for (double s : cfg_.sigmas) {
      for (int km : cfg_.k_multipliers) {
        for (const auto& sc : synth_list) candidates.push_back({s, km, sc});
      }
    }
    Candidate best = candidates.front();
    if (candidates.size() > 1) {
      double best_acc = -1.0;
      for (const auto& c : candidates) {
        const double acc = fit(split_.train, split_.validation, excluded, c, stage, timing).accuracy.accuracy;
        if (acc > best_acc) {
          best_acc = acc;
          best = c;
        }
      }
    }
    return {best, fit(pool_, split_.test, excluded, best, stage, timing)};
  }

 private:
  const ExperimentConfig& cfg_;
  const Dataset& data_;
  SeedChain seeds_;
  Split split_;
  std::vector<int> pool_;
  std::optional<DivergenceTable> table_;
};

[[noreturn]] void rethrow_tagged(const Error& e, int repetition, const std::string& stage) {
  throw Error(e.code(), "repetition " + std::to_string(repetition) + ", stage " + stage + ": " +
                            e.what());
}

std::vector<SyntheticCount> roses_counts(const ExperimentConfig& cfg) {
  std::vector<SyntheticCount> out;
  for (const auto& s : cfg.synthetic_counts) {
    if (!s.is_none()) out.push_back(s);
  }
  if (out.empty()) out.push_back({SyntheticCount::Policy::kN, 0});
  return out;
}

bool next_combination(std::vector<int>& comb, int n) {
  const int c = static_cast<int>(comb.size());
  for (int i = c - 1; i >= 0; --i) {
    if (comb[static_cast<size_t>(i)] < n - c + i) {
      ++comb[static_cast<size_t>(i)];
      for (int j = i + 1; j < c; ++j) comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

int SyntheticCount::resolve(int reference_points, int per_class) const {
  switch (policy) {
    case Policy::kNone:
      return 0;
    case Policy::kN:
      return reference_points;
    case Policy::kM:
      return per_class;
    case Policy::kFixed:
      break;
  }
  return fixed;
}

std::string SyntheticCount::to_string() const {
  switch (policy) {
    case Policy::kNone:
      return "none";
    case Policy::kN:
      return "n";
    case Policy::kM:
      return "m";
    case Policy::kFixed:
      break;
  }
  return std::to_string(fixed);
}

SyntheticCount SyntheticCount::from_json(const json& j) {
  if (j.is_number_integer()) {
    const long long v = j.get<long long>();
    if (v < 0 || v > 1000000) config_error("synthetic count out of range");
    if (v == 0) return {Policy::kNone, 0};
    return {Policy::kFixed, static_cast<int>(v)};
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "none" || s == "0") return {Policy::kNone, 0};
    if (s == "n") return {Policy::kN, 0};
    if (s == "m") return {Policy::kM, 0};
  }
  config_error("synthetic count must be a nonnegative integer, \"n\", \"m\" or \"none\"");
}

json SyntheticCount::to_json() const {
  if (policy == Policy::kFixed) return fixed;
  return to_string();
}

bool ExperimentConfig::needs_validation() const {
  return sigmas.size() * k_multipliers.size() * synthetic_counts.size() > 1;
}

void ExperimentConfig::check() const {
  if (sigmas.empty() || k_multipliers.empty() || synthetic_counts.empty()) {
    config_error("candidate lists must be nonempty");
  }
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) config_error("sigma must be a positive real");
  }
  for (int k : k_multipliers) {
    if (k < 1) config_error("k_multipliers must be >= 1");
  }
  if (t && *t < 1) config_error("t must be >= 1");
  if (train_per_class < 1) config_error("train_per_class must be >= 1");
  if (test_per_class && *test_per_class < 1) config_error("test_per_class must be >= 1");
  if (repetitions < 1) config_error("repetitions must be >= 1");
  if (!(svm_lambda > 0.0) || !std::isfinite(svm_lambda)) config_error("svm_lambda must be positive");
  if (svm_epochs < 1) config_error("svm_epochs must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    config_error("validation_fraction must lie in (0, 1)");
  }
  if (knn_k < 1) config_error("knn_k must be >= 1");
  if (threads < 1) config_error("threads must be >= 1");
  if (needs_validation() && train_per_class - validation_count(*this) < 1) {
    config_error("train_per_class too small to hold out a validation share");
  }
}

void ExperimentConfig::check_against(const Dataset& data) const {
  check();
  if (data.n_classes < 2) config_error("experiments need at least two classes");
  std::vector<int> counts(static_cast<size_t>(data.n_classes), 0);
  for (const auto& item : data.items) ++counts[static_cast<size_t>(item.label)];
  const int needed = train_per_class + test_per_class.value_or(1);
  for (int c = 0; c < data.n_classes; ++c) {
    if (counts[static_cast<size_t>(c)] < needed) {
      config_error("class " + std::to_string(c) + " has " +
                   std::to_string(counts[static_cast<size_t>(c)]) + " descriptors; the split needs " +
                   std::to_string(needed));
    }
  }
  if (knn_baseline && knn_k > train_per_class * data.n_classes) {
    config_error("knn_k exceeds the training set size");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "sigmas") {
        cfg.sigmas = scalar_or_list<double>(v, [](const json& x) { return x.get<double>(); });
      } else if (key == "k_multipliers") {
        cfg.k_multipliers = scalar_or_list<int>(v, [](const json& x) { return x.get<int>(); });
      } else if (key == "synthetic_counts") {
        cfg.synthetic_counts = scalar_or_list<SyntheticCount>(v, SyntheticCount::from_json);
      } else if (key == "t") {
        if (v.is_null()) cfg.t.reset(); else cfg.t = v.get<int>();
      } else if (key == "exponent_mode") {
        cfg.exponent_mode = exponent_mode_from_string(v.get<std::string>());
      } else if (key == "psd_policy") {
        cfg.psd_policy = policy_from_string(v.get<std::string>());
      } else if (key == "direction_mode") {
        cfg.direction_mode = direction_from_string(v.get<std::string>());
      } else if (key == "train_per_class") {
        cfg.train_per_class = v.get<int>();
      } else if (key == "test_per_class") {
        if (v.is_null()) cfg.test_per_class.reset(); else cfg.test_per_class = v.get<int>();
      } else if (key == "repetitions") {
        cfg.repetitions = v.get<int>();
      } else if (key == "seed") {
        cfg.seed = v.is_string() ? std::stoull(v.get<std::string>()) : v.get<std::uint64_t>();
      } else if (key == "svm_lambda") {
        cfg.svm_lambda = v.get<double>();
      } else if (key == "svm_epochs") {
        cfg.svm_epochs = v.get<int>();
      } else if (key == "validation_fraction") {
        cfg.validation_fraction = v.get<double>();
      } else if (key == "knn_baseline") {
        cfg.knn_baseline = v.get<bool>();
      } else if (key == "knn_k") {
        cfg.knn_k = v.get<int>();
      } else if (key == "threads") {
        cfg.threads = v.get<int>();
      } else if (key == "record_timing") {
        cfg.record_timing = v.get<bool>();
      } else {
        config_error("unknown config field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  } catch (const std::logic_error& e) {
    config_error(std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    config_error(e.what());
  }
  cfg.check();
  return cfg;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path));
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["sigmas"] = json::array();
  for (double s : cfg.sigmas) j["sigmas"].push_back(s);
  j["k_multipliers"] = cfg.k_multipliers;
  j["synthetic_counts"] = json::array();
  for (const auto& s : cfg.synthetic_counts) j["synthetic_counts"].push_back(s.to_json());
  j["t"] = cfg.t ? json(*cfg.t) : json(nullptr);
  j["exponent_mode"] = to_string(cfg.exponent_mode);
  j["psd_policy"] = policy_to_string(cfg.psd_policy);
  j["direction_mode"] = direction_to_string(cfg.direction_mode);
  j["train_per_class"] = cfg.train_per_class;
  j["test_per_class"] = cfg.test_per_class ? json(*cfg.test_per_class) : json(nullptr);
  j["repetitions"] = cfg.repetitions;
  j["seed"] = std::to_string(cfg.seed);
  j["svm_lambda"] = cfg.svm_lambda;
  j["svm_epochs"] = cfg.svm_epochs;
  j["validation_fraction"] = cfg.validation_fraction;
  j["knn_baseline"] = cfg.knn_baseline;
  j["knn_k"] = cfg.knn_k;
  j["threads"] = cfg.threads;
  j["record_timing"] = cfg.record_timing;
  return j;
}

SeedChain seed_chain(const ExperimentConfig& cfg, int repetition) {
  SeedChain s;
  s.repetition = derive_seed(cfg.seed, stream::kRepetition, static_cast<std::uint64_t>(repetition));
  s.split = derive_seed(s.repetition, stream::kSplit, 0);
  s.synthetic = derive_seed(s.repetition, stream::kSynthetic, 0);
  s.hyperplane = derive_seed(s.repetition, stream::kHyperplane, 0);
  s.svm = derive_seed(s.repetition, stream::kSvm, 0);
  return s;
}

Split split_repetition(const ExperimentConfig& cfg, const Dataset& data, int repetition) {
  const SeedChain seeds = seed_chain(cfg, repetition);
  std::vector<std::vector<int>> by_class(static_cast<size_t>(data.n_classes));
  for (size_t i = 0; i < data.items.size(); ++i) {
    by_class[static_cast<size_t>(data.items[i].label)].push_back(static_cast<int>(i));
  }
  const int n_val = validation_count(cfg);
  Split s;
  for (int c = 0; c < data.n_classes; ++c) {
    const auto& members = by_class[static_cast<size_t>(c)];
    const int n = static_cast<int>(members.size());
    const int test_n = cfg.test_per_class.value_or(n - cfg.train_per_class);
    if (cfg.train_per_class + test_n > n || test_n < 1) {
      config_error("class " + std::to_string(c) + " is too small for the split");
    }
    Rng rng = make_rng(seeds.split, stream::kSplit, static_cast<std::uint64_t>(c));
    const std::vector<int> order = sample_without_replacement(n, n, rng);
    for (int i = 0; i < cfg.train_per_class; ++i) {
      const int idx = members[static_cast<size_t>(order[static_cast<size_t>(i)])];
      (i < cfg.train_per_class - n_val ? s.train : s.validation).push_back(idx);
    }
    for (int i = cfg.train_per_class; i < cfg.train_per_class + test_n; ++i) {
      s.test.push_back(members[static_cast<size_t>(order[static_cast<size_t>(i)])]);
    }
  }
  return s;
}

Report run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.check_against(data);
  Report report;
  bool any_synthetic = false;
  for (const auto& s : cfg.synthetic_counts) any_synthetic = any_synthetic || !s.is_none();
  report.mode = any_synthetic ? "ROSES" : "ROSE";
  report.config = config_to_json(cfg);
  const std::vector<bool> none_excluded(static_cast<size_t>(data.n_classes), false);
  for (int r = 0; r < cfg.repetitions; ++r) {
    std::string stage = "split";
    try {
      StageTiming timing;
      const RepetitionContext ctx(cfg, data, r);
      auto [cand, out] = ctx.select_and_fit(cfg.synthetic_counts, none_excluded, stage,
                                            cfg.record_timing ? &timing : nullptr);
      RepetitionRecord rec;
      rec.index = r;
      rec.seeds = ctx.seeds();
      rec.sigma = cand.sigma;
      rec.k_multiplier = cand.k_multiplier;
      rec.k = out.k;
      rec.t = out.t;
      rec.reference_count = out.reference_count;
      rec.synthetic_count = out.synthetic_count;
      rec.synthetic_policy = cand.synthetic.to_string();
      rec.exponent_mode = to_string(cfg.exponent_mode);
      rec.clamped_mass = out.clamped_mass;
      rec.accuracy = out.accuracy;
      if (cfg.knn_baseline) {
        stage = "knn";
        std::vector<LabeledSpd> train;
        for (int i : ctx.pool()) train.push_back(data.items[static_cast<size_t>(i)]);
        long long correct = 0;
        for (int i : ctx.split().test) {
          const auto& q = data.items[static_cast<size_t>(i)];
          if (knn_stein(train, q.point, cfg.knn_k) == q.label) ++correct;
        }
        rec.knn_accuracy = static_cast<double>(correct) / static_cast<double>(ctx.split().test.size());
      }
      if (cfg.record_timing) rec.timing = timing;
      report.repetitions.push_back(std::move(rec));
    } catch (const Error& e) {
      rethrow_tagged(e, r, stage);
    }
  }
  finalize_report(report);
  return report;
}

DegradationReport degradation_study(const ExperimentConfig& cfg, const Dataset& data,
                                    const std::vector<int>& excluded_counts) {
  cfg.check_against(data);
  const int n = data.n_classes;
  for (int c : excluded_counts) {
    if (c < 0 || c >= n) {
      throw Error(ErrorCode::kExclusionExceedsClasses,
                  "cannot exclude " + std::to_string(c) + " of " + std::to_string(n) +
                      " classes; at least one class must remain");
    }
  }
  const std::vector<SyntheticCount> rose_list{SyntheticCount{}};
  const std::vector<SyntheticCount> roses_list = roses_counts(cfg);

  DegradationReport report;
  report.config = config_to_json(cfg);
  for (size_t i = 0; i < roses_list.size(); ++i) {
    report.roses_synthetic_policy += (i ? "," : "") + roses_list[i].to_string();
  }
  // acc[point][combination][mode][repetition]
  std::vector<std::vector<std::array<std::vector<double>, 2>>> acc;
  for (int c : excluded_counts) {
    DegradationPoint p;
    p.excluded = c;
    std::vector<int> comb(static_cast<size_t>(c));
    for (int i = 0; i < c; ++i) comb[static_cast<size_t>(i)] = i;
    do {
      p.combinations.push_back(comb);
    } while (next_combination(comb, n));
    acc.emplace_back(p.combinations.size());
    report.points.push_back(std::move(p));
  }

  for (int r = 0; r < cfg.repetitions; ++r) {
    std::string stage = "split";
    try {
      const RepetitionContext ctx(cfg, data, r);
      for (size_t pi = 0; pi < report.points.size(); ++pi) {
        const auto& point = report.points[pi];
        for (size_t ci = 0; ci < point.combinations.size(); ++ci) {
          std::vector<bool> excluded(static_cast<size_t>(n), false);
          for (int cls : point.combinations[ci]) excluded[static_cast<size_t>(cls)] = true;
          acc[pi][ci][0].push_back(
              ctx.select_and_fit(rose_list, excluded, stage, nullptr).second.accuracy.accuracy);
          acc[pi][ci][1].push_back(
              ctx.select_and_fit(roses_list, excluded, stage, nullptr).second.accuracy.accuracy);
        }
      }
    } catch (const Error& e) {
      rethrow_tagged(e, r, stage);
    }
  }

  for (size_t pi = 0; pi < report.points.size(); ++pi) {
    auto& point = report.points[pi];
    for (const auto& modes : acc[pi]) {
      point.rose_by_combination.push_back(mean_of(modes[0]));
      point.roses_by_combination.push_back(mean_of(modes[1]));
    }
    point.rose_accuracy = mean_of(point.rose_by_combination);
    point.roses_accuracy = mean_of(point.roses_by_combination);
  }
  return report;
}

ProjectionModel truncate_model(const ProjectionModel& model, int k) {
  if (k < 1 || k > model.k()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k must lie in [1, " + std::to_string(model.k()) + "]");
  }
  return ProjectionModel(model.reference_points(), model.kernel(), model.weights().leftCols(k),
                         model.t(), model.exponent_mode(), model.seed(), model.clamped_mass());
}

JlSweep jl_sweep(const ProjectionModel& model, const std::vector<SpdMatrix>& points,
                 double epsilon, const std::vector<int>& ks) {
  JlSweep sweep;
  sweep.epsilon = epsilon;
  for (int k : ks) sweep.records.push_back(jl_distortion_report(truncate_model(model, k), points, epsilon));
  return sweep;
}

JlSetup jl_setup(const ExperimentConfig& cfg, const Dataset& data, int k) {
  cfg.check_against(data);
  const SeedChain seeds = seed_chain(cfg, 0);
  const Split split = split_repetition(cfg, data, 0);
  std::vector<SpdMatrix> refs;
  for (int i : split.train) refs.push_back(data.items[static_cast<size_t>(i)].point);
  for (int i : split.validation) refs.push_back(data.items[static_cast<size_t>(i)].point);
  const int n_synth = cfg.synthetic_counts.front().resolve(static_cast<int>(refs.size()),
                                                           cfg.train_per_class);
  if (n_synth > 0) {
    SynthesisConfig scfg;
    scfg.count = n_synth;
    scfg.seed = seeds.synthetic;
    scfg.direction_mode = cfg.direction_mode;
    const auto synthetic = generate_synthetic(refs, scfg);
    refs.insert(refs.end(), synthetic.begin(), synthetic.end());
  }
  ProjectionOptions opts;
  opts.k = k;
  opts.t = cfg.t;
  opts.kernel = KernelParams{cfg.sigmas.front(), cfg.psd_policy};
  opts.exponent_mode = cfg.exponent_mode;
  opts.seed = seeds.hyperplane;
  std::vector<SpdMatrix> points;
  for (int i : split.test) points.push_back(data.items[static_cast<size_t>(i)].point);
  return {build_projection_model(refs, opts), std::move(points)};
}

}  // namespace rose

namespace rose {

namespace {

constexpr const char* kPipelineTag = "rose-pipeline";
constexpr int kPipelineVersion = 1;

std::vector<LabeledVector> embed_dataset(const ProjectionModel& model, const Dataset& data,
                                         int threads) {
  std::vector<SpdMatrix> points;
  points.reserve(data.items.size());
  for (const auto& item : data.items) points.push_back(item.point);
  const std::vector<Embedding> emb = embed_batch(model, points, threads);
  std::vector<LabeledVector> out;
  out.reserve(emb.size());
  for (size_t i = 0; i < emb.size(); ++i) out.push_back({emb[i], data.items[i].label});
  return out;
}

}  // namespace

TrainedPipeline train_pipeline(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.check();
  if (data.n_classes < 2) config_error("training needs at least two classes");
  const SeedChain seeds = seed_chain(cfg, 0);
  std::vector<SpdMatrix> refs;
  for (const auto& item : data.items) refs.push_back(item.point);
  const int per_class = static_cast<int>(data.items.size()) / data.n_classes;
  const int n_synth = cfg.synthetic_counts.front().resolve(static_cast<int>(refs.size()), per_class);
  if (n_synth > 0) {
    SynthesisConfig scfg;
    scfg.count = n_synth;
    scfg.seed = seeds.synthetic;
    scfg.direction_mode = cfg.direction_mode;
    const auto synthetic = generate_synthetic(refs, scfg);
    refs.insert(refs.end(), synthetic.begin(), synthetic.end());
  }
  ProjectionOptions opts;
  opts.k = cfg.k_multipliers.front() * static_cast<int>(data.items.size());
  opts.t = cfg.t;
  opts.kernel = KernelParams{cfg.sigmas.front(), cfg.psd_policy};
  opts.exponent_mode = cfg.exponent_mode;
  opts.seed = seeds.hyperplane;
  ProjectionModel model = build_projection_model(refs, opts);
  SvmParams svm;
  svm.lambda = cfg.svm_lambda;
  svm.epochs = cfg.svm_epochs;
  svm.seed = seeds.svm;
  TrainedClassifier clf = train_ova_svm(embed_dataset(model, data, cfg.threads), svm);
  return {std::move(model), std::move(clf)};
}

AccuracyReport evaluate_pipeline(const TrainedPipeline& pipeline, const Dataset& data,
                                 int threads) {
  if (!data.items.empty() && data.dim() != pipeline.model.dim()) {
    throw Error(ErrorCode::kDimensionInconsistency,
                "dataset dimension " + std::to_string(data.dim()) + " differs from model " +
                    std::to_string(pipeline.model.dim()));
  }
  return evaluate_accuracy(pipeline.classifier, embed_dataset(pipeline.model, data, threads));
}

std::string serialize_pipeline(const TrainedPipeline& pipeline) {
  json j;
  j["format"] = kPipelineTag;
  j["version"] = kPipelineVersion;
  j["model"] = json::parse(serialize_model(pipeline.model));
  j["classifier"] = json::parse(serialize_classifier(pipeline.classifier));
  return j.dump(2) + "\n";
}

TrainedPipeline deserialize_pipeline(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("pipeline file is not JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kPipelineTag ||
      j.value("version", 0) != kPipelineVersion || !j.contains("model") ||
      !j.contains("classifier")) {
    throw Error(ErrorCode::kParseError, "not a supported pipeline file");
  }
  return {deserialize_model(j.at("model").dump()), deserialize_classifier(j.at("classifier").dump())};
}

}  // namespace rose
