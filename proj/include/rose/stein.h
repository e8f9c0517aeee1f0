#pragma once

// Symmetrized Stein (Jensen-Bregman log-det) divergence and the kernel
// exp(-sigma * J) built on it.

#include <vector>

#include <Eigen/Dense>

#include "rose/spd.h"

namespace rose {

enum class PsdPolicy { kStrict, kClamp };

struct KernelParams {
  double sigma = 0.5;
  PsdPolicy psd_policy = PsdPolicy::kClamp;

  void check() const;
};

// True when sigma is one of 1/2, 2/2, ..., (d-1)/2, the values for which the
// kernel is guaranteed positive definite on d x d matrices.
bool sigma_guarantees_psd(double sigma, int d);

double stein_divergence(const SpdMatrix& x, const SpdMatrix& y);
double stein_kernel_value(const SpdMatrix& x, const SpdMatrix& y,
                          const KernelParams& params);

// p-vector of kernel values between `x` and every reference point.
Eigen::VectorXd kernel_vector(const std::vector<SpdMatrix>& refs,
                              const SpdMatrix& x, const KernelParams& params);

class GramMatrix {
 public:
  GramMatrix(Eigen::MatrixXd entries, double clamped_mass)
      : entries_(std::move(entries)), clamped_mass_(clamped_mass) {}

  int size() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  // Sum of |lambda| over eigenvalues removed by the clamp repair.
  double clamped_mass() const { return clamped_mass_; }

 private:
  Eigen::MatrixXd entries_;
  double clamped_mass_;
};

// Pairwise kernel matrix. A spectrum with lambda_min < -1e-10 * lambda_max
// raises IndefiniteKernel under the strict policy; under clamp the negative
// eigenvalues are zeroed and the unit diagonal restored.
GramMatrix gram_matrix(const std::vector<SpdMatrix>& points,
                       const KernelParams& params);

// K^{+1/2} or K^{-1/2} (pseudo-inverse: eigenvalues below 1e-10 * lambda_max
// are treated as zero).
Eigen::MatrixXd gram_power(const Eigen::MatrixXd& k, double exponent);
inline Eigen::MatrixXd gram_power(const GramMatrix& k, double exponent) {
  return gram_power(k.entries(), exponent);
}

}  // namespace rose
