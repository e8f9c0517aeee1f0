#pragma once

// One-vs-all linear SVM trained by seeded Pegasos-style stochastic
// subgradient descent, plus a Stein-divergence nearest-neighbour baseline.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rose/spd.h"

namespace rose {

struct LabeledVector {
  Eigen::VectorXd coords;
  int label = 0;
};

struct SvmParams {
  double lambda = 1e-3;
  int epochs = 200;
  std::uint64_t seed = 0;
};

class TrainedClassifier {
 public:
  TrainedClassifier(Eigen::MatrixXd weights, Eigen::VectorXd biases,
                    Eigen::VectorXd mean, Eigen::VectorXd scale, SvmParams params);

  int n_classes() const { return static_cast<int>(weights_.rows()); }
  int dim() const { return static_cast<int>(weights_.cols()); }
  // Row c holds the weights of the class-c-vs-rest problem in the
  // standardized coordinates.
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& biases() const { return biases_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& scale() const { return scale_; }
  const SvmParams& params() const { return params_; }

  Eigen::VectorXd standardize(const Eigen::VectorXd& coords) const;
  Eigen::VectorXd scores(const Eigen::VectorXd& coords) const;

  // Per-epoch primal objective of each binary problem, evaluated on the
  // averaged iterate; filled in by training.
  std::vector<std::vector<double>> objective_history;

 private:
  Eigen::MatrixXd weights_;
  Eigen::VectorXd biases_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  SvmParams params_;
};

TrainedClassifier train_ova_svm(const std::vector<LabeledVector>& data,
                                const SvmParams& params = {});

struct Prediction {
  int label = 0;
  Eigen::VectorXd scores;
};

// Argmax of the class scores; ties go to the smaller class index.
Prediction predict(const TrainedClassifier& clf, const Eigen::VectorXd& coords);
int argmax_lowest(const Eigen::VectorXd& scores);

struct AccuracyReport {
  double accuracy = 0.0;
  long long correct = 0;
  long long total = 0;
  // confusion[true][predicted]
  std::vector<std::vector<long long>> confusion;
};

AccuracyReport evaluate_accuracy(const TrainedClassifier& clf,
                                 const std::vector<LabeledVector>& test);

struct LabeledSpd {
  SpdMatrix point;
  int label = 0;
};

// Majority label among the kk smallest Stein divergences; ties (in
// divergence and in votes) favour the smaller index / class.
int knn_stein(const std::vector<LabeledSpd>& train, const SpdMatrix& query, int kk = 1);

std::string serialize_classifier(const TrainedClassifier& clf);
TrainedClassifier deserialize_classifier(const std::string& text);
void save_classifier(const TrainedClassifier& clf, const std::filesystem::path& path);
TrainedClassifier load_classifier(const std::filesystem::path& path);

}  // namespace rose
