#pragma once

// Synthetic labeled SPD data: Wishart-style clusters around well-separated
// class centres. Sample i of class c is C^{1/2} (G G^T / dof) C^{1/2} with
// G a d x dof standard Gaussian matrix, so the cluster concentrates on its
// centre as dof grows.

#include <cstdint>
#include <vector>

#include "rose/classifier.h"
#include "rose/spd.h"

namespace rose {

struct BenchmarkSpec {
  int classes = 2;
  int dim = 6;
  int per_class = 100;
  // Frobenius norm of log(centre); centre 0 is the identity. Distinct centres
  // are at least 0.8 * separation apart.
  double separation = 3.0;
  int dof = 60;
  std::uint64_t seed = 0;

  void check() const;
};

struct Benchmark {
  std::vector<SpdMatrix> centers;
  // Class-major: all samples of class 0, then class 1, ...
  std::vector<LabeledSpd> samples;
};

Benchmark make_benchmark(const BenchmarkSpec& spec);

// Root-mean-square geodesic distance from each sample to its class centre.
double intra_class_spread(const Benchmark& b);
// Smallest geodesic distance between two distinct centres.
double min_center_distance(const Benchmark& b);

}  // namespace rose
