#include "rose/stein.h"

#include <cmath>
#include <sstream>

namespace rose {

namespace {

constexpr double kSpectrumTol = 1e-10;

}  // namespace

void KernelParams::check() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "kernel sigma must be positive");
  }
}

bool sigma_guarantees_psd(double sigma, int d) {
  const double twice = 2.0 * sigma;
  const double rounded = std::round(twice);
  return std::abs(twice - rounded) <= 1e-12 && rounded >= 1.0 &&
         rounded <= d - 1;
}

double stein_divergence(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y);
  if (x.matrix() == y.matrix()) return 0.0;
  // Entrywise sum is commutative, so the expression is exactly symmetric.
  const Eigen::MatrixXd mid = 0.5 * (x.matrix() + y.matrix());
  Eigen::LLT<Eigen::MatrixXd> llt(mid);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "midpoint of two SPD matrices failed to factorize");
  }
  const double log_det_mid =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double j = log_det_mid - 0.5 * (x.log_det() + y.log_det());
  return std::max(j, 0.0);
}

double stein_kernel_value(const SpdMatrix& x, const SpdMatrix& y,
                          const KernelParams& params) {
  params.check();
  return std::exp(-params.sigma * stein_divergence(x, y));
}

Eigen::VectorXd kernel_vector(const std::vector<SpdMatrix>& refs,
                              const SpdMatrix& x, const KernelParams& params) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(refs.size()));
  for (size_t i = 0; i < refs.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = stein_kernel_value(refs[i], x, params);
  }
  return out;
}

GramMatrix gram_matrix(const std::vector<SpdMatrix>& points,
                       const KernelParams& params) {
  params.check();
  if (points.empty()) {
    throw Error(ErrorCode::kEmptyInput, "Gram matrix over an empty point set");
  }
  const auto p = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    require_same_dim(points[0], points[static_cast<size_t>(i)]);
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < p; ++j) {
      k(i, j) = stein_kernel_value(points[static_cast<size_t>(i)],
                                   points[static_cast<size_t>(j)], params);
      k(j, i) = k(i, j);
    }
  }
  if (p == 1) return GramMatrix(std::move(k), 0.0);

  const EigenPair eig = symmetric_eigen(k);
  const double hi = eig.eigenvalues(0);
  const double lo = eig.eigenvalues(p - 1);
  if (lo >= -kSpectrumTol * hi) return GramMatrix(std::move(k), 0.0);

  if (params.psd_policy == PsdPolicy::kStrict) {
    std::ostringstream os;
    os << "smallest Gram eigenvalue " << lo << " (largest " << hi
       << ") at sigma " << params.sigma;
    throw Error(ErrorCode::kIndefiniteKernel, os.str());
  }
  double clamped = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (eig.eigenvalues(i) < 0.0) clamped += -eig.eigenvalues(i);
  }
  Eigen::MatrixXd repaired = eig.apply([](double v) { return std::max(v, 0.0); });
  // Rescale back to the unit diagonal a kernel matrix must have.
  const Eigen::VectorXd inv_root = repaired.diagonal().cwiseSqrt().cwiseInverse();
  repaired = inv_root.asDiagonal() * repaired * inv_root.asDiagonal();
  repaired = 0.5 * (repaired + repaired.transpose());
  repaired.diagonal().setOnes();
  return GramMatrix(std::move(repaired), clamped);
}

Eigen::MatrixXd gram_power(const Eigen::MatrixXd& k, double exponent) {
  if (exponent != 0.5 && exponent != -0.5) {
    throw Error(ErrorCode::kInvalidArgument, "Gram exponent must be +0.5 or -0.5");
  }
  const EigenPair eig = symmetric_eigen(0.5 * (k + k.transpose()));
  const double cutoff = kSpectrumTol * std::max(eig.eigenvalues(0), 0.0);
  if (exponent > 0.0) {
    return eig.apply([cutoff](double v) { return v > cutoff ? std::sqrt(v) : 0.0; });
  }
  return eig.apply(
      [cutoff](double v) { return v > cutoff ? 1.0 / std::sqrt(v) : 0.0; });
}

}  // namespace rose
