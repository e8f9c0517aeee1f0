#include "rose/benchmark.h"

#include <cmath>
#include <limits>

#include "rose/error.h"
#include "rose/random.h"

namespace rose {

void BenchmarkSpec::check() const {
  if (classes < 1 || dim < 1 || per_class < 0) {
    throw Error(ErrorCode::kInvalidArgument, "benchmark needs classes >= 1, dim >= 1");
  }
  if (dof < dim) throw Error(ErrorCode::kInvalidArgument, "benchmark dof must be >= dim");
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    throw Error(ErrorCode::kInvalidArgument, "benchmark separation must be positive");
  }
}

Benchmark make_benchmark(const BenchmarkSpec& spec) {
  spec.check();
  Benchmark out;
  const int d = spec.dim;
  Rng center_rng = make_rng(spec.seed, stream::kBenchmark, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.centers.push_back(SpdMatrix::identity(d));
  int attempts = 0;
  while (static_cast<int>(out.centers.size()) < spec.classes) {
    if (++attempts > 100000) {
      throw Error(ErrorCode::kInvalidArgument, "could not place separated class centres");
    }
    Eigen::MatrixXd s(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) s(i, j) = s(j, i) = gauss(center_rng);
    }
    s *= spec.separation / s.norm();
    SpdMatrix c = spd_exp(s);
    bool far = true;
    for (const auto& o : out.centers) far = far && geodesic_distance(o, c) >= 0.8 * spec.separation;
    if (far) out.centers.push_back(std::move(c));
  }

  out.samples.reserve(static_cast<size_t>(spec.classes) * static_cast<size_t>(spec.per_class));
  for (int c = 0; c < spec.classes; ++c) {
    const Eigen::MatrixXd root = spd_sqrt(out.centers[static_cast<size_t>(c)]);
    Rng rng = make_rng(spec.seed, stream::kBenchmark, 1 + static_cast<std::uint64_t>(c));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < spec.per_class; ++i) {
      Eigen::MatrixXd g(d, spec.dof);
      for (int r = 0; r < d; ++r) {
        for (int k = 0; k < spec.dof; ++k) g(r, k) = noise(rng);
      }
      const Eigen::MatrixXd w = g * g.transpose() / spec.dof;
      out.samples.push_back({validate_spd(root * w * root, 1e-8), c});
    }
  }
  return out;
}

double intra_class_spread(const Benchmark& b) {
  if (b.samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : b.samples) {
    sum += geodesic_distance_squared(b.centers[static_cast<size_t>(s.label)], s.point);
  }
  return std::sqrt(sum / static_cast<double>(b.samples.size()));
}

double min_center_distance(const Benchmark& b) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < b.centers.size(); ++i) {
    for (size_t j = i + 1; j < b.centers.size(); ++j) {
      best = std::min(best, geodesic_distance(b.centers[i], b.centers[j]));
    }
  }
  return best;
}

}  // namespace rose
