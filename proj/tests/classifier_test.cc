#include "rose/classifier.h"

#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "rose/stein.h"
#include "test_support.h"

namespace rose {
namespace {

using testing::TestRng;

LabeledVector lv(std::initializer_list<double> v, int label) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) c(i++) = x;
  return {c, label};
}

std::vector<LabeledVector> toy_problem() {
  return {lv({0, 0}, 0), lv({0, 1}, 0), lv({5, 5}, 1), lv({5, 6}, 1)};
}

std::vector<LabeledVector> gaussian_blobs(int per_class, int n_classes, int dim,
                                          double spread, std::uint64_t seed) {
  TestRng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<LabeledVector> out;
  for (int c = 0; c < n_classes; ++c) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
    center(c % dim) = 4.0 * (1 + c / dim);
    for (int i = 0; i < per_class; ++i) {
      Eigen::VectorXd x(dim);
      for (int j = 0; j < dim; ++j) x(j) = center(j) + spread * g(rng);
      out.push_back({x, c});
    }
  }
  return out;
}

TEST(Svm, SeparableToyProblem) {
  const TrainedClassifier clf = train_ova_svm(toy_problem());
  EXPECT_EQ(predict(clf, Eigen::Vector2d(0, 0.5)).label, 0);
  EXPECT_EQ(predict(clf, Eigen::Vector2d(5, 5.5)).label, 1);
  const AccuracyReport r = evaluate_accuracy(clf, toy_problem());
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(Svm, SingleClassRejected) {
  try {
    train_ova_svm({lv({0, 0}, 0), lv({1, 1}, 0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleClass);
  }
  try {
    train_ova_svm({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyData);
  }
}

TEST(Svm, DeterministicForFixedSeed) {
  const auto data = gaussian_blobs(20, 3, 4, 1.0, 1);
  SvmParams params;
  params.seed = 42;
  params.epochs = 30;
  const TrainedClassifier a = train_ova_svm(data, params);
  const TrainedClassifier b = train_ova_svm(data, params);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.biases(), b.biases());
  params.seed = 43;
  const TrainedClassifier c = train_ova_svm(data, params);
  EXPECT_NE(a.weights(), c.weights());
}

// Recomputes the primal objective of the returned weights in the
// standardized, bias-augmented frame.
double returned_objective(const TrainedClassifier& clf, const std::vector<LabeledVector>& data,
                          int c) {
  double hinge = 0.0;
  for (const auto& d : data) {
    const double y = d.label == c ? 1.0 : -1.0;
    const double f = clf.weights().row(c).dot(clf.standardize(d.coords)) + clf.biases()(c);
    hinge += std::max(0.0, 1.0 - y * f);
  }
  const double sq = clf.weights().row(c).squaredNorm() + clf.biases()(c) * clf.biases()(c);
  return 0.5 * clf.params().lambda * sq + hinge / static_cast<double>(data.size());
}

TEST(Svm, ObjectiveNonIncreasing) {
  for (const auto& data : {toy_problem(), gaussian_blobs(30, 2, 3, 0.5, 2)}) {
    SvmParams params;
    params.seed = 1;
    params.epochs = 60;
    const TrainedClassifier clf = train_ova_svm(data, params);
    ASSERT_EQ(clf.objective_history.size(), 2u);
    for (int c = 0; c < 2; ++c) {
      const auto& hist = clf.objective_history[static_cast<size_t>(c)];
      ASSERT_EQ(hist.size(), 60u);
      for (size_t e = 1; e < hist.size(); ++e) EXPECT_LE(hist[e], hist[e - 1]);
      EXPECT_LT(hist.back(), hist.front());
      EXPECT_NEAR(returned_objective(clf, data, c), hist.back(), 1e-12);
    }
  }
}

TEST(Predict, TieGoesToLowerIndex) {
  EXPECT_EQ(argmax_lowest(Eigen::Vector3d(0.5, 0.5, 0.1)), 0);
  EXPECT_EQ(argmax_lowest(Eigen::Vector3d(0.1, 0.7, 0.7)), 1);
  // A classifier with zero weights and equal biases ties everywhere.
  const TrainedClassifier flat(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3),
                               Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), {});
  EXPECT_EQ(predict(flat, Eigen::Vector2d(3, -1)).label, 0);
}

TEST(Accuracy, CountsAndConfusion) {
  // Weights select coordinate 0 for class 0, coordinate 1 for class 1.
  Eigen::MatrixXd w(2, 2);
  w << 1, 0, 0, 1;
  const TrainedClassifier clf(w, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2),
                              Eigen::VectorXd::Ones(2), {});
  // Predictions: 0, 1, 1, 1 against truths 0, 0, 0, 0 gives 1/4.
  const std::vector<LabeledVector> test = {lv({1, 0}, 0), lv({0, 1}, 0), lv({0, 2}, 0),
                                           lv({0, 3}, 0)};
  const AccuracyReport r = evaluate_accuracy(clf, test);
  EXPECT_EQ(r.accuracy, 0.25);
  EXPECT_EQ(r.correct, 1);
  EXPECT_EQ(r.total, 4);
  ASSERT_EQ(r.confusion.size(), 2u);
  EXPECT_EQ(r.confusion[0][0], 1);
  EXPECT_EQ(r.confusion[0][1], 3);
  long long sum = 0;
  for (const auto& row : r.confusion) sum += std::accumulate(row.begin(), row.end(), 0LL);
  EXPECT_EQ(sum, r.total);
  EXPECT_EQ(r.confusion[0][0] + r.confusion[1][1], r.correct);
}

TEST(Accuracy, EmptyTestRejected) {
  const TrainedClassifier clf = train_ova_svm(toy_problem());
  try {
    evaluate_accuracy(clf, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyData);
  }
}

TEST(Knn, ExactMatchAndTies) {
  TestRng rng(3);
  std::vector<LabeledSpd> train;
  for (int i = 0; i < 6; ++i) train.push_back({testing::random_spd(rng, 3), i % 3});
  for (const auto& t : train) EXPECT_EQ(knn_stein(train, t.point, 1), t.label);

  // Two equidistant references with different labels: the earlier one wins.
  const SpdMatrix a = SpdMatrix::diagonal(Eigen::Vector2d(2, 2));
  const std::vector<LabeledSpd> tie = {{a, 4}, {a, 1}};
  EXPECT_EQ(knn_stein(tie, SpdMatrix::identity(2), 1), 4);
  // A two-way vote tie goes to the smaller class.
  EXPECT_EQ(knn_stein(tie, SpdMatrix::identity(2), 2), 1);
  EXPECT_THROW(knn_stein({}, a, 1), Error);
}

TEST(Knn, AffineInvariant) {
  TestRng rng(4);
  const auto centers = testing::class_centers(3, 4, 1.5, 11);
  std::vector<LabeledSpd> train, queries;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 5; ++i) train.push_back({testing::wishart_cluster(rng, centers[c], 1, 40)[0], c});
    for (int i = 0; i < 5; ++i) queries.push_back({testing::wishart_cluster(rng, centers[c], 1, 40)[0], c});
  }
  const Eigen::MatrixXd g = testing::random_invertible(rng, 4);
  auto move = [&](const SpdMatrix& x) { return validate_spd(g * x.matrix() * g.transpose(), 1e-8); };
  std::vector<LabeledSpd> moved_train;
  for (const auto& t : train) moved_train.push_back({move(t.point), t.label});
  for (const auto& q : queries) {
    EXPECT_EQ(knn_stein(train, q.point, 3), knn_stein(moved_train, move(q.point), 3));
  }
}

TEST(Persistence, BitExactRoundTrip) {
  const auto data = gaussian_blobs(15, 3, 5, 1.0, 6);
  SvmParams params;
  params.seed = 9;
  params.epochs = 20;
  const TrainedClassifier clf = train_ova_svm(data, params);
  const auto path = std::filesystem::temp_directory_path() / "rose_classifier_roundtrip.json";
  save_classifier(clf, path);
  const TrainedClassifier back = load_classifier(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.weights(), clf.weights());
  EXPECT_EQ(back.biases(), clf.biases());
  EXPECT_EQ(back.mean(), clf.mean());
  EXPECT_EQ(back.scale(), clf.scale());
  for (const auto& x : data) EXPECT_EQ(back.scores(x.coords), clf.scores(x.coords));
  EXPECT_THROW(deserialize_classifier("{\"format\":\"other\"}"), Error);
}

}  // namespace
}  // namespace rose
