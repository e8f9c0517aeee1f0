#pragma once

// Intrinsic (Karcher) mean, geodesic rescaling toward a pole, and generation
// of synthetic SPD points inside the ball spanned by a training set.

#include <cstdint>
#include <vector>

#include "rose/spd.h"

namespace rose {

enum class DirectionMode { kTrainingPoint, kTangentGaussian };

struct SynthesisConfig {
  int count = 0;
  std::uint64_t seed = 0;
  DirectionMode direction_mode = DirectionMode::kTangentGaussian;
  double karcher_tol = 1e-8;
  int karcher_max_iter = 100;

  void check() const;
};

struct ConvergenceRecord {
  int iterations = 0;
  double residual = 0.0;  // Frobenius norm of the mean tangent vector
  bool converged = false;
};

struct KarcherResult {
  SpdMatrix mean;
  ConvergenceRecord record;
};

// Raised when the fixed-point loop runs out of iterations; carries the last
// iterate so the caller can decide whether to use it.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(SpdMatrix last, ConvergenceRecord record);

  const SpdMatrix& last_iterate() const { return last_; }
  const ConvergenceRecord& record() const { return record_; }

 private:
  SpdMatrix last_;
  ConvergenceRecord record_;
};

KarcherResult karcher_mean(const std::vector<SpdMatrix>& points,
                           double tol = 1e-8, int max_iter = 100);

struct TrainingBall {
  SpdMatrix mean;
  double radius = 0.0;
  ConvergenceRecord record;
};

TrainingBall training_ball(const std::vector<SpdMatrix>& points,
                           const SynthesisConfig& cfg);
TrainingBall training_ball_around(const SpdMatrix& mean,
                                  const std::vector<SpdMatrix>& points);

// The point on the geodesic from `pole` through `x` at distance `zeta` from
// the pole.
SpdMatrix geodesic_rescale(const SpdMatrix& x, const SpdMatrix& pole,
                           double zeta);

std::vector<SpdMatrix> generate_synthetic(const std::vector<SpdMatrix>& training,
                                          const SynthesisConfig& cfg);
std::vector<SpdMatrix> generate_synthetic(const std::vector<SpdMatrix>& training,
                                          const TrainingBall& ball,
                                          const SynthesisConfig& cfg);

}  // namespace rose
