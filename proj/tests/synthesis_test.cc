#include "rose/synthesis.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_support.h"

namespace rose {
namespace {

using testing::TestRng;

constexpr double kE = std::numbers::e;

// Two-point geodesic midpoint X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{1/2}.
Eigen::MatrixXd oracle_midpoint(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  auto fn = [](const Eigen::MatrixXd& m, double c) {
    return testing::oracle_matrix_function(m, [c](double v) { return std::pow(v, c); });
  };
  const Eigen::MatrixXd root = fn(x, 0.5);
  const Eigen::MatrixXd inv_root = fn(x, -0.5);
  Eigen::MatrixXd inner = inv_root * y * inv_root;
  inner = 0.5 * (inner + inner.transpose());
  return root * fn(inner, 0.5) * root;
}

TEST(KarcherMean, SingleAndCoincidentPoints) {
  TestRng rng(1);
  const SpdMatrix x = testing::random_spd(rng, 4);
  EXPECT_EQ(karcher_mean({x}).mean.matrix(), x.matrix());
  const KarcherResult two = karcher_mean({x, x});
  EXPECT_LE((two.mean.matrix() - x.matrix()).norm(), 1e-12 * x.matrix().norm());
  EXPECT_TRUE(two.record.converged);
}

TEST(KarcherMean, TwoPointMidpoint) {
  const SpdMatrix a = SpdMatrix::identity(2);
  const SpdMatrix b = SpdMatrix::diagonal(Eigen::Vector2d(4, 4));
  const KarcherResult km = karcher_mean({a, b});
  EXPECT_LE((km.mean.matrix() - 2.0 * Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-6);

  TestRng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const SpdMatrix x = testing::random_spd(rng, 3);
    const SpdMatrix y = testing::random_spd(rng, 3);
    const Eigen::MatrixXd mid = oracle_midpoint(x.matrix(), y.matrix());
    EXPECT_LE((karcher_mean({x, y}).mean.matrix() - mid).norm(), 1e-6 * mid.norm());
  }
}

TEST(KarcherMean, StationarityAtReturn) {
  TestRng rng(3);
  std::vector<SpdMatrix> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(testing::random_spd(rng, 5));
  const double tol = 1e-8;
  const KarcherResult km = karcher_mean(pts, tol, 100);
  ASSERT_TRUE(km.record.converged);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(5, 5);
  for (const auto& p : pts) sum += airm_log_map(km.mean, p).value();
  EXPECT_LE((sum / 30.0).norm(), tol * (1.0 + km.mean.matrix().norm()));
  EXPECT_NEAR((sum / 30.0).norm(), km.record.residual, 1e-14);
}

TEST(KarcherMean, ErrorPaths) {
  try {
    karcher_mean({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  TestRng rng(4);
  std::vector<SpdMatrix> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(testing::random_spd(rng, 3, 1e3));
  try {
    karcher_mean(pts, 1e-15, 1);
    FAIL();
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonConvergence);
    EXPECT_FALSE(e.record().converged);
    EXPECT_GT(e.record().residual, 0.0);
    EXPECT_EQ(e.last_iterate().dim(), 3);
  }
}

TEST(TrainingBall, ClosedFormsAndPermutation) {
  SynthesisConfig cfg;
  TestRng rng(5);
  const SpdMatrix x = testing::random_spd(rng, 3);
  EXPECT_EQ(training_ball({x}, cfg).radius, 0.0);

  const TrainingBall ball = training_ball(
      {SpdMatrix::identity(2), SpdMatrix::diagonal(Eigen::Vector2d(kE * kE, kE * kE))}, cfg);
  EXPECT_LE((ball.mean.matrix() - kE * Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-6);
  EXPECT_NEAR(ball.radius, std::sqrt(2.0), 1e-6);

  std::vector<SpdMatrix> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(testing::random_spd(rng, 3));
  const double r = training_ball(pts, cfg).radius;
  std::reverse(pts.begin(), pts.end());
  std::rotate(pts.begin(), pts.begin() + 5, pts.end());
  EXPECT_NEAR(training_ball(pts, cfg).radius, r, 1e-8);
}

TEST(GeodesicRescale, UnitExponentReturnsInput) {
  TestRng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const SpdMatrix x = testing::random_spd(rng, 4);
    const SpdMatrix pole = testing::random_spd(rng, 4);
    const SpdMatrix same = geodesic_rescale(x, pole, geodesic_distance(pole, x));
    EXPECT_LE((same.matrix() - x.matrix()).norm(), 1e-8 * x.matrix().norm());
  }
}

TEST(GeodesicRescale, DiagonalClosedForm) {
  // d_g(I, e^2 I) = 2 sqrt 2, so c = 1 / (2 sqrt 2) and the result is
  // e^{1/sqrt 2} I, at unit distance from I.
  const SpdMatrix x = SpdMatrix::diagonal(Eigen::Vector2d(kE * kE, kE * kE));
  const SpdMatrix r = geodesic_rescale(x, SpdMatrix::identity(2), 1.0);
  const double expected = std::exp(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(r.matrix()(0, 0), expected, 1e-12);
  EXPECT_NEAR(r.matrix()(1, 1), expected, 1e-12);
  EXPECT_NEAR(r.matrix()(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(geodesic_distance(SpdMatrix::identity(2), r), 1.0, 1e-12);
}

TEST(GeodesicRescale, NormalisedAndArbitraryDistance) {
  TestRng rng(7);
  std::uniform_real_distribution<double> zeta_dist(0.01, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const SpdMatrix x = testing::random_spd(rng, 5);
    const SpdMatrix pole = testing::random_spd(rng, 5);
    EXPECT_NEAR(geodesic_distance(pole, geodesic_rescale(x, pole, 1.0)), 1.0, 1e-6);
    const double zeta = zeta_dist(rng);
    const double got = geodesic_distance(pole, geodesic_rescale(x, pole, zeta));
    EXPECT_NEAR(got, zeta, 1e-6 * zeta);
    // The result stays on the geodesic: its log map is parallel to X's.
    const Eigen::MatrixXd dir = whiten(pole, airm_log_map(pole, x).value());
    const Eigen::MatrixXd moved =
        whiten(pole, airm_log_map(pole, geodesic_rescale(x, pole, zeta)).value());
    EXPECT_LE((moved / moved.norm() - dir / dir.norm()).norm(), 1e-8);
  }
}

TEST(GeodesicRescale, DegenerateDirection) {
  TestRng rng(8);
  const SpdMatrix x = testing::random_spd(rng, 3);
  try {
    geodesic_rescale(x, x, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateDirection);
  }
}

std::vector<SpdMatrix> sample_training(TestRng& rng, int n, int d) {
  std::vector<SpdMatrix> pts;
  for (int i = 0; i < n; ++i) pts.push_back(testing::random_spd(rng, d, 30.0));
  return pts;
}

TEST(GenerateSynthetic, EmptyCountAndDeterminism) {
  TestRng rng(9);
  const auto train = sample_training(rng, 10, 3);
  SynthesisConfig cfg;
  cfg.count = 0;
  EXPECT_TRUE(generate_synthetic(train, cfg).empty());

  cfg.count = 25;
  cfg.seed = 77;
  for (DirectionMode mode : {DirectionMode::kTrainingPoint, DirectionMode::kTangentGaussian}) {
    cfg.direction_mode = mode;
    const auto a = generate_synthetic(train, cfg);
    const auto b = generate_synthetic(train, cfg);
    ASSERT_EQ(a.size(), 25u);
    for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].matrix(), b[i].matrix());
    cfg.seed = 78;
    const auto c = generate_synthetic(train, cfg);
    EXPECT_NE(a[0].matrix(), c[0].matrix());
    cfg.seed = 77;
  }
}

TEST(GenerateSynthetic, PointsLieInsideTheBallAndAreValid) {
  TestRng rng(10);
  const auto train = sample_training(rng, 15, 4);
  SynthesisConfig cfg;
  cfg.count = 300;
  cfg.seed = 5;
  const TrainingBall ball = training_ball(train, cfg);
  for (DirectionMode mode : {DirectionMode::kTrainingPoint, DirectionMode::kTangentGaussian}) {
    cfg.direction_mode = mode;
    for (const auto& s : generate_synthetic(train, ball, cfg)) {
      EXPECT_LE(geodesic_distance(ball.mean, s), ball.radius + 1e-8);
      EXPECT_NO_THROW(validate_spd(s.matrix()));
    }
  }
}

TEST(GenerateSynthetic, GrowingCountKeepsEarlierPoints) {
  TestRng rng(11);
  const auto train = sample_training(rng, 8, 3);
  SynthesisConfig cfg;
  cfg.seed = 3;
  cfg.count = 5;
  const auto small = generate_synthetic(train, cfg);
  cfg.count = 9;
  const auto large = generate_synthetic(train, cfg);
  for (size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].matrix(), large[i].matrix());
}

TEST(GenerateSynthetic, RequiresTwoTrainingPoints) {
  SynthesisConfig cfg;
  cfg.count = 3;
  EXPECT_THROW(generate_synthetic({SpdMatrix::identity(2)}, cfg), Error);
}

}  // namespace
}  // namespace rose
