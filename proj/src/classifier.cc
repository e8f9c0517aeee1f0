#include "rose/classifier.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "json.hpp"

#include "rose/matrix_io.h"
#include "rose/random.h"
#include "rose/stein.h"

namespace rose {

namespace {

constexpr int kClassifierFormatVersion = 1;
constexpr const char* kClassifierFormatTag = "rose-ova-svm";

double primal_objective(const Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& x,
                        const std::vector<double>& y, double lambda) {
  double hinge = 0.0;
  for (size_t i = 0; i < x.size(); ++i) hinge += std::max(0.0, 1.0 - y[i] * w.dot(x[i]));
  return 0.5 * lambda * w.squaredNorm() + hinge / static_cast<double>(x.size());
}

struct BinaryFit {
  Eigen::VectorXd w;  // last entry is the bias
  std::vector<double> history;
};

// Pegasos on bias-augmented inputs with projection onto the 1/sqrt(lambda)
// ball. At each epoch end the running average of all iterates replaces the
// kept solution only if it lowers the primal objective, so the recorded
// history is non-increasing.
BinaryFit pegasos(const std::vector<Eigen::VectorXd>& x, const std::vector<double>& y,
                  const SvmParams& params, Rng rng) {
  const Eigen::Index dim = x.front().size();
  const double radius = 1.0 / std::sqrt(params.lambda);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(dim);
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  BinaryFit fit;
  long long iter = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (int idx : order) {
      ++iter;
      const double eta = 1.0 / (params.lambda * static_cast<double>(iter));
      const auto& xi = x[static_cast<size_t>(idx)];
      const double yi = y[static_cast<size_t>(idx)];
      const double margin = yi * w.dot(xi);
      w *= 1.0 - eta * params.lambda;
      if (margin < 1.0) w += eta * yi * xi;
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
      avg += (w - avg) / static_cast<double>(iter);
    }
    const double obj = primal_objective(avg, x, y, params.lambda);
    if (fit.history.empty() || obj <= fit.history.back()) {
      fit.w = avg;
      fit.history.push_back(obj);
    } else {
      fit.history.push_back(fit.history.back());
    }
  }
  return fit;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(format_double(v(i)));
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_double(j.at(i).get<std::string>());
  }
  return v;
}

}  // namespace

TrainedClassifier::TrainedClassifier(Eigen::MatrixXd weights, Eigen::VectorXd biases,
                                     Eigen::VectorXd mean, Eigen::VectorXd scale,
                                     SvmParams params)
    : weights_(std::move(weights)),
      biases_(std::move(biases)),
      mean_(std::move(mean)),
      scale_(std::move(scale)),
      params_(params) {
  if (weights_.rows() < 2) {
    throw Error(ErrorCode::kSingleClass, "classifier needs at least two classes");
  }
  if (biases_.size() != weights_.rows() || mean_.size() != weights_.cols() ||
      scale_.size() != weights_.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent classifier shape");
  }
  if (!(scale_.array() > 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "standardization scales must be positive");
  }
}

Eigen::VectorXd TrainedClassifier::standardize(const Eigen::VectorXd& coords) const {
  if (coords.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(dim()) + " coordinates, got " +
                    std::to_string(coords.size()));
  }
  return (coords - mean_).cwiseQuotient(scale_);
}

Eigen::VectorXd TrainedClassifier::scores(const Eigen::VectorXd& coords) const {
  return weights_ * standardize(coords) + biases_;
}

TrainedClassifier train_ova_svm(const std::vector<LabeledVector>& data,
                                const SvmParams& params) {
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "no training vectors");
  if (!(params.lambda > 0.0) || params.epochs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "SVM needs lambda > 0 and epochs >= 1");
  }
  const Eigen::Index k = data.front().coords.size();
  int max_label = 0;
  for (const auto& d : data) {
    if (d.coords.size() != k) {
      throw Error(ErrorCode::kDimensionMismatch, "training vectors differ in length");
    }
    if (!d.coords.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "training vector has non-finite entries");
    }
    if (d.label < 0) throw Error(ErrorCode::kInvalidArgument, "negative class label");
    max_label = std::max(max_label, d.label);
  }
  const int n_classes = max_label + 1;
  std::vector<int> counts(static_cast<size_t>(n_classes), 0);
  for (const auto& d : data) ++counts[static_cast<size_t>(d.label)];
  const auto present = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
  if (present < 2) throw Error(ErrorCode::kSingleClass, "training data holds one class");

  const double n = static_cast<double>(data.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  for (const auto& d : data) mean += d.coords;
  mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(k);
  for (const auto& d : data) var += (d.coords - mean).cwiseAbs2();
  Eigen::VectorXd scale = (var / n).cwiseSqrt();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(scale(i) > 0.0)) scale(i) = 1.0;
  }

  std::vector<Eigen::VectorXd> x;
  x.reserve(data.size());
  for (const auto& d : data) {
    Eigen::VectorXd z(k + 1);
    z.head(k) = (d.coords - mean).cwiseQuotient(scale);
    z(k) = 1.0;
    x.push_back(std::move(z));
  }

  Eigen::MatrixXd weights(n_classes, k);
  Eigen::VectorXd biases(n_classes);
  std::vector<std::vector<double>> history;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<double> y;
    y.reserve(data.size());
    for (const auto& d : data) y.push_back(d.label == c ? 1.0 : -1.0);
    BinaryFit fit = pegasos(x, y, params,
                            make_rng(params.seed, stream::kSvm, static_cast<std::uint64_t>(c)));
    weights.row(c) = fit.w.head(k).transpose();
    biases(c) = fit.w(k);
    history.push_back(std::move(fit.history));
  }
  TrainedClassifier clf(std::move(weights), std::move(biases), std::move(mean),
                        std::move(scale), params);
  clf.objective_history = std::move(history);
  return clf;
}

int argmax_lowest(const Eigen::VectorXd& scores) {
  int best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = static_cast<int>(i);
  }
  return best;
}

Prediction predict(const TrainedClassifier& clf, const Eigen::VectorXd& coords) {
  Prediction p;
  p.scores = clf.scores(coords);
  p.label = argmax_lowest(p.scores);
  return p;
}

AccuracyReport evaluate_accuracy(const TrainedClassifier& clf,
                                 const std::vector<LabeledVector>& test) {
  if (test.empty()) throw Error(ErrorCode::kEmptyData, "empty test set");
  int n_classes = clf.n_classes();
  for (const auto& t : test) n_classes = std::max(n_classes, t.label + 1);
  AccuracyReport r;
  r.confusion.assign(static_cast<size_t>(n_classes),
                     std::vector<long long>(static_cast<size_t>(n_classes), 0));
  for (const auto& t : test) {
    const int got = predict(clf, t.coords).label;
    ++r.confusion[static_cast<size_t>(t.label)][static_cast<size_t>(got)];
    if (got == t.label) ++r.correct;
  }
  r.total = static_cast<long long>(test.size());
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

int knn_stein(const std::vector<LabeledSpd>& train, const SpdMatrix& query, int kk) {
  if (train.empty()) throw Error(ErrorCode::kEmptyTrain, "no training points");
  if (kk < 1 || kk > static_cast<int>(train.size())) {
    throw Error(ErrorCode::kInvalidArgument, "kk must lie in [1, |train|]");
  }
  std::vector<std::pair<double, size_t>> dist;
  dist.reserve(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    dist.emplace_back(stein_divergence(train[i].point, query), i);
  }
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  std::map<int, int> votes;
  for (int i = 0; i < kk; ++i) ++votes[train[dist[static_cast<size_t>(i)].second].label];
  int best = votes.begin()->first;
  for (const auto& [label, count] : votes) {
    if (count > votes[best]) best = label;
  }
  return best;
}

std::string serialize_classifier(const TrainedClassifier& clf) {
  nlohmann::json rows = nlohmann::json::array();
  for (int c = 0; c < clf.n_classes(); ++c) {
    rows.push_back(vector_to_json(clf.weights().row(c).transpose()));
  }
  nlohmann::json j = {
      {"format", kClassifierFormatTag},
      {"version", kClassifierFormatVersion},
      {"n_classes", clf.n_classes()},
      {"dim", clf.dim()},
      {"lambda", format_double(clf.params().lambda)},
      {"epochs", clf.params().epochs},
      {"seed", std::to_string(clf.params().seed)},
      {"weights", std::move(rows)},
      {"biases", vector_to_json(clf.biases())},
      {"mean", vector_to_json(clf.mean())},
      {"scale", vector_to_json(clf.scale())},
  };
  return j.dump(1) + "\n";
}

TrainedClassifier deserialize_classifier(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kClassifierFormatTag ||
        j.at("version").get<int>() != kClassifierFormatVersion) {
      throw Error(ErrorCode::kParseError, "not a supported classifier file");
    }
    const int n_classes = j.at("n_classes").get<int>();
    const int dim = j.at("dim").get<int>();
    const auto& rows = j.at("weights");
    if (static_cast<int>(rows.size()) != n_classes) {
      throw Error(ErrorCode::kParseError, "classifier weight rows != n_classes");
    }
    Eigen::MatrixXd weights(n_classes, dim);
    for (int c = 0; c < n_classes; ++c) {
      Eigen::VectorXd row = vector_from_json(rows.at(static_cast<size_t>(c)));
      if (row.size() != dim) throw Error(ErrorCode::kParseError, "weight row length != dim");
      weights.row(c) = row.transpose();
    }
    SvmParams params;
    params.lambda = parse_double(j.at("lambda").get<std::string>());
    params.epochs = j.at("epochs").get<int>();
    params.seed = std::stoull(j.at("seed").get<std::string>());
    return TrainedClassifier(std::move(weights), vector_from_json(j.at("biases")),
                             vector_from_json(j.at("mean")), vector_from_json(j.at("scale")),
                             params);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("classifier file: ") + e.what());
  }
}

void save_classifier(const TrainedClassifier& clf, const std::filesystem::path& path) {
  write_text_file(path, serialize_classifier(clf));
}

TrainedClassifier load_classifier(const std::filesystem::path& path) {
  return deserialize_classifier(read_text_file(path));
}

}  // namespace rose
