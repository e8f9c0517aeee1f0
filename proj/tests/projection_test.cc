#include "rose/projection.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "test_support.h"

namespace rose {
namespace {

using testing::TestRng;

std::vector<SpdMatrix> two_clusters(std::uint64_t seed, int per_cluster, int d) {
  TestRng rng(seed);
  const auto centers = testing::class_centers(2, d, 2.0, seed + 1);
  std::vector<SpdMatrix> pts = testing::wishart_cluster(rng, centers[0], per_cluster, 3 * d);
  const auto second = testing::wishart_cluster(rng, centers[1], per_cluster, 3 * d);
  pts.insert(pts.end(), second.begin(), second.end());
  return pts;
}

// Test-side oracle: expected per-coordinate squared embedded distance,
// built from direct kernel calls and an SVD-based pseudo-inverse root.
Eigen::MatrixXd oracle_distances(const std::vector<SpdMatrix>& refs, int t, double sigma) {
  const int p = static_cast<int>(refs.size());
  Eigen::MatrixXd k(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) k(i, j) = stein_kernel_value(refs[i], refs[j], {sigma});
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues();
  const double cutoff = 1e-10 * s(0);
  for (int i = 0; i < p; ++i) s(i) = s(i) > cutoff ? 1.0 / std::sqrt(s(i)) : 0.0;
  const Eigen::MatrixXd inv_root = svd.matrixU() * s.asDiagonal() * svd.matrixU().transpose();
  const Eigen::MatrixXd centre =
      Eigen::MatrixXd::Identity(p, p) - Eigen::MatrixXd::Constant(p, p, 1.0 / p);
  const double scale = static_cast<double>(p - t) / (static_cast<double>(t) * p * (p - 1));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  for (int u = 0; u < p; ++u) {
    for (int v = 0; v < p; ++v) {
      const Eigen::VectorXd diff = centre * inv_root * (k.col(u) - k.col(v));
      out(u, v) = scale * diff.squaredNorm();
    }
  }
  return out;
}

double median_relative_deviation(const ProjectionModel& model,
                                 const std::vector<SpdMatrix>& pts,
                                 const Eigen::MatrixXd& oracle) {
  const auto emb = embed_batch(model, pts);
  std::vector<double> dev;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      const double est = (emb[i] - emb[j]).squaredNorm() / model.k();
      dev.push_back(std::abs(est / oracle(i, j) - 1.0));
    }
  }
  std::nth_element(dev.begin(), dev.begin() + dev.size() / 2, dev.end());
  return dev[dev.size() / 2];
}

ProjectionOptions options(int k, double sigma, ExponentMode mode, std::uint64_t seed) {
  ProjectionOptions o;
  o.k = k;
  o.kernel = {sigma};
  o.exponent_mode = mode;
  o.seed = seed;
  return o;
}

TEST(ExemplarCount, DefaultRule) {
  EXPECT_EQ(default_exemplar_count(2), 1);
  EXPECT_EQ(default_exemplar_count(40), 10);
  EXPECT_EQ(default_exemplar_count(41), 11);
  EXPECT_EQ(default_exemplar_count(1000), 30);
}

TEST(BuildModel, IdenticalReferencePointsGiveZeroWeights) {
  TestRng rng(1);
  const SpdMatrix x = testing::random_spd(rng, 4);
  const std::vector<SpdMatrix> refs(12, x);
  for (ExponentMode mode : {ExponentMode::kWhitening, ExponentMode::kPaperLiteral}) {
    const ProjectionModel m = build_projection_model(refs, options(16, 0.5, mode, 3));
    EXPECT_LE(m.weights().cwiseAbs().maxCoeff(), 1e-12);
    const SpdMatrix q = testing::random_spd(rng, 4);
    EXPECT_LE(m.embed(q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BuildModel, FullExemplarSetGivesZeroWeights) {
  const auto refs = two_clusters(2, 5, 3);
  for (ExponentMode mode : {ExponentMode::kWhitening, ExponentMode::kPaperLiteral}) {
    ProjectionOptions o = options(8, 0.5, mode, 4);
    o.t = 10;
    const ProjectionModel m = build_projection_model(refs, o);
    EXPECT_TRUE((m.weights().array() == 0.0).all());
  }
}

TEST(BuildModel, DeterministicAndNestedInK) {
  const auto refs = two_clusters(3, 10, 4);
  const ProjectionModel a = build_projection_model(refs, options(32, 1.0, ExponentMode::kWhitening, 9));
  const ProjectionModel b = build_projection_model(refs, options(32, 1.0, ExponentMode::kWhitening, 9));
  EXPECT_EQ(a.weights(), b.weights());
  const ProjectionModel big = build_projection_model(refs, options(64, 1.0, ExponentMode::kWhitening, 9));
  EXPECT_EQ(big.weights().leftCols(32), a.weights());
  const ProjectionModel other = build_projection_model(refs, options(32, 1.0, ExponentMode::kWhitening, 10));
  EXPECT_NE(other.weights(), a.weights());
}

TEST(BuildModel, ErrorPaths) {
  const auto refs = two_clusters(4, 3, 3);
  ProjectionOptions o = options(4, 0.5, ExponentMode::kWhitening, 0);
  o.t = 7;
  try {
    build_projection_model(refs, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTSampleTooLarge);
  }
  EXPECT_THROW(build_projection_model({refs[0]}, options(4, 0.5, ExponentMode::kWhitening, 0)),
               Error);
  EXPECT_THROW(build_projection_model(refs, options(0, 0.5, ExponentMode::kWhitening, 0)), Error);
  std::vector<SpdMatrix> mixed = refs;
  mixed.push_back(SpdMatrix::identity(2));
  EXPECT_THROW(build_projection_model(mixed, options(4, 0.5, ExponentMode::kWhitening, 0)), Error);
}

TEST(Embed, MatchesKernelVectorProduct) {
  const auto refs = two_clusters(5, 8, 4);
  const ProjectionModel m = build_projection_model(refs, options(20, 0.5, ExponentMode::kWhitening, 1));
  TestRng rng(5);
  const SpdMatrix q = testing::random_spd(rng, 4);
  Eigen::VectorXd kappa(m.p());
  for (int i = 0; i < m.p(); ++i) kappa(i) = stein_kernel_value(refs[i], q, {0.5});
  const Embedding direct = m.weights().transpose() * kappa;
  const Embedding got = embed(m, q);
  ASSERT_EQ(got.size(), 20);
  EXPECT_LE((got - direct).cwiseAbs().maxCoeff(), 1e-12);
  try {
    embed(m, SpdMatrix::identity(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Embed, LinearInKernelVectorAndZeroColumns) {
  const auto refs = two_clusters(6, 6, 3);
  ProjectionModel m = build_projection_model(refs, options(6, 0.5, ExponentMode::kWhitening, 2));
  const Eigen::VectorXd ka = m.kernel_vector(refs[0]);
  const Eigen::VectorXd kb = m.kernel_vector(refs[7]);
  const Embedding avg = m.project(0.5 * (ka + kb));
  EXPECT_LE((avg - 0.5 * (m.project(ka) + m.project(kb))).norm(), 1e-10);

  Eigen::MatrixXd w = m.weights();
  w.col(2).setZero();
  const ProjectionModel zeroed(refs, m.kernel(), w, m.t(), m.exponent_mode(), m.seed(), 0.0);
  TestRng rng(6);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(zeroed.embed(testing::random_spd(rng, 3))(2), 0.0);
}

TEST(EmbedBatch, MatchesSerialBitExactly) {
  const auto refs = two_clusters(7, 10, 3);
  const ProjectionModel m = build_projection_model(refs, options(12, 0.5, ExponentMode::kWhitening, 3));
  EXPECT_TRUE(embed_batch(m, {}).empty());
  TestRng rng(7);
  std::vector<SpdMatrix> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(testing::random_spd(rng, 3));
  const auto serial = embed_batch(m, pts, 1);
  const auto parallel = embed_batch(m, pts, 4);
  ASSERT_EQ(serial.size(), pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(serial[i], parallel[i]);
    if (i % 97 == 0) EXPECT_EQ(serial[i], m.embed(pts[i]));
  }
}

TEST(Binarize, SignRule) {
  EXPECT_EQ(binarize(Eigen::VectorXd::Zero(3)), std::vector<bool>({true, true, true}));
  EXPECT_EQ(binarize(Eigen::Vector3d(-1, 2, -3)), std::vector<bool>({false, true, false}));
  const Eigen::Vector4d e(0.3, -0.2, 1e-9, -5.0);
  EXPECT_EQ(binarize(3.7 * e), binarize(e));
}

TEST(Oracle, LibraryOracleMatchesIndependentOracle) {
  const auto refs = two_clusters(8, 10, 4);
  const ProjectionModel m = build_projection_model(refs, options(4, 0.5, ExponentMode::kWhitening, 0));
  const Eigen::MatrixXd lib = whitened_distance_oracle(m, refs);
  const Eigen::MatrixXd ind = oracle_distances(refs, m.t(), 0.5);
  EXPECT_LE((lib - ind).norm(), 1e-8 * ind.norm());
}

// The exemplar covariance scale is the exact mean of the per-coordinate
// squared distance: averaging over many hyperplanes recovers the oracle.
TEST(Oracle, ScaleIsTheExpectedSquaredProjection) {
  const auto refs = two_clusters(9, 8, 3);
  const ProjectionModel m = build_projection_model(refs, options(20000, 0.5, ExponentMode::kWhitening, 1));
  const Eigen::MatrixXd oracle = whitened_distance_oracle(m, refs);
  const auto emb = embed_batch(m, refs);
  const double est = (emb[0] - emb[12]).squaredNorm() / m.k();
  EXPECT_NEAR(est / oracle(0, 12), 1.0, 0.05);
}

TEST(Fidelity, MedianDeviationShrinksWithK) {
  const auto refs = two_clusters(10, 20, 5);
  ASSERT_EQ(refs.size(), 40u);
  const Eigen::MatrixXd oracle = oracle_distances(refs, default_exemplar_count(40), 0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (int k : {16, 64, 256}) {
    const ProjectionModel m = build_projection_model(refs, options(k, 0.5, ExponentMode::kWhitening, 2024));
    const double dev = median_relative_deviation(m, refs, oracle);
    EXPECT_LT(dev, prev) << "k=" << k;
    prev = dev;
  }
}

TEST(JlReport, IdenticalPointsConvention) {
  const auto refs = two_clusters(11, 5, 3);
  const ProjectionModel m = build_projection_model(refs, options(8, 0.5, ExponentMode::kWhitening, 0));
  const JlReport r = jl_distortion_report(m, std::vector<SpdMatrix>(4, refs[2]), 0.2);
  EXPECT_EQ(r.pair_count, 6);
  EXPECT_EQ(r.fraction_within, 1.0);
  EXPECT_EQ(r.median_distortion, 0.0);
  EXPECT_THROW(jl_distortion_report(m, {refs[0]}, 0.2), Error);
  EXPECT_THROW(jl_distortion_report(m, refs, 0.5), Error);
}

TEST(JlReport, FractionNonDecreasingInK) {
  const auto refs = two_clusters(12, 10, 4);
  double prev = -1.0;
  for (int k : {16, 64, 256}) {
    const ProjectionModel m = build_projection_model(refs, options(k, 0.5, ExponentMode::kWhitening, 77));
    const JlReport r = jl_distortion_report(m, refs, 0.3);
    EXPECT_GE(r.fraction_within, prev) << "k=" << k;
    prev = r.fraction_within;
  }
}

TEST(JlReport, HalfOfPairsWithinToleranceAtLargeK) {
  const auto refs = two_clusters(13, 10, 4);
  const ProjectionModel m = build_projection_model(refs, options(1024, 0.5, ExponentMode::kWhitening, 5));
  const JlReport r = jl_distortion_report(m, refs, 0.49);
  EXPECT_EQ(r.pair_count, 190);
  EXPECT_GE(r.fraction_within, 0.5);
}

TEST(CostModel, CountsScaleAsDeclared) {
  const auto small = two_clusters(14, 10, 3);
  const auto large = two_clusters(15, 20, 3);
  const ProjectionModel a = build_projection_model(small, options(8, 0.5, ExponentMode::kWhitening, 0));
  const ProjectionModel b = build_projection_model(large, options(8, 0.5, ExponentMode::kWhitening, 0));
  EXPECT_EQ(a.build_cost().kernel_evaluations, 20 * 19 / 2);
  EXPECT_EQ(b.build_cost().kernel_evaluations, 40 * 39 / 2);
  EXPECT_EQ(a.build_cost().gram_eigendecompositions, 2);
  EXPECT_EQ(a.query_cost().kernel_evaluations, 20);
  EXPECT_EQ(b.query_cost().kernel_evaluations, 40);
  EXPECT_EQ(b.query_cost().multiply_adds, 40 * 8);
}

TEST(Persistence, RoundTripIsBitExact) {
  const auto refs = two_clusters(16, 6, 4);
  for (ExponentMode mode : {ExponentMode::kWhitening, ExponentMode::kPaperLiteral}) {
    const ProjectionModel m = build_projection_model(refs, options(10, 1.5, mode, 123456789012345ULL));
    const ProjectionModel back = deserialize_model(serialize_model(m));
    EXPECT_EQ(back.weights(), m.weights());
    EXPECT_EQ(back.seed(), m.seed());
    EXPECT_EQ(back.t(), m.t());
    EXPECT_EQ(back.exponent_mode(), mode);
    EXPECT_EQ(back.kernel().sigma, 1.5);
    TestRng rng(16);
    for (int i = 0; i < 10; ++i) {
      const SpdMatrix q = testing::random_spd(rng, 4);
      EXPECT_EQ(back.embed(q), m.embed(q));
    }
  }
  EXPECT_THROW(deserialize_model("{\"format\": \"something-else\"}"), Error);
  EXPECT_THROW(deserialize_model("not json"), Error);
}

}  // namespace
}  // namespace rose
