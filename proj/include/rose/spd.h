#pragma once

// Core geometry of the manifold of symmetric positive definite matrices under
// the affine invariant Riemannian metric (AIRM).
//
// Every matrix function goes through one symmetric eigendecomposition. An
// SpdMatrix caches its own decomposition at construction, so log/power/
// distance calls on the same value do not re-factorize it.

#include <Eigen/Dense>

#include "rose/error.h"

namespace rose {

// Relative symmetry tolerance used by validation and tangent vectors.
inline constexpr double kSymmetryTol = 1e-10;
// Inputs with lambda_min <= kEigenFloor * lambda_max are rejected.
inline constexpr double kEigenFloor = 1e-12;

// Eigenvalues in descending order with matching orthonormal columns.
struct EigenPair {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  // U * diag(f(lambda)) * U^T, exactly symmetrized.
  template <typename F>
  Eigen::MatrixXd apply(F&& f) const {
    Eigen::VectorXd mapped = eigenvalues.unaryExpr(f);
    Eigen::MatrixXd out =
        eigenvectors * mapped.asDiagonal() * eigenvectors.transpose();
    return 0.5 * (out + out.transpose());
  }
};

// Symmetric eigendecomposition of an (assumed symmetric) matrix.
EigenPair symmetric_eigen(const Eigen::MatrixXd& sym);

// max_ij |M_ij - M_ji| relative to max(1, max |M_ij|).
double relative_asymmetry(const Eigen::MatrixXd& m);

class SpdMatrix {
 public:
  // validate_spd: symmetrizes when the asymmetry is within `tol` (relative),
  // then checks the spectrum against the eigenvalue floor.
  static SpdMatrix validate(const Eigen::MatrixXd& raw,
                            double tol = kSymmetryTol);

  static SpdMatrix identity(int d);
  static SpdMatrix diagonal(const Eigen::VectorXd& diag);

  // Builds from a known decomposition; used by matrix functions whose output
  // is SPD by construction. Eigenvalues must be positive.
  static SpdMatrix from_eigen(EigenPair eig);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  const EigenPair& eigen() const { return eig_; }

  double min_eigenvalue() const { return eig_.eigenvalues(dim() - 1); }
  double max_eigenvalue() const { return eig_.eigenvalues(0); }
  double log_det() const { return eig_.eigenvalues.array().log().sum(); }

  // Throws NotPositiveDefinite when the spectrum violates the floor.
  void check_conditioning() const;

 private:
  SpdMatrix(Eigen::MatrixXd m, EigenPair eig)
      : m_(std::move(m)), eig_(std::move(eig)) {}

  Eigen::MatrixXd m_;
  EigenPair eig_;
};

// A symmetric matrix attached to the point of the manifold it is tangent at.
class TangentVector {
 public:
  TangentVector(SpdMatrix pole, Eigen::MatrixXd value);

  const SpdMatrix& pole() const { return pole_; }
  const Eigen::MatrixXd& value() const { return value_; }

 private:
  SpdMatrix pole_;
  Eigen::MatrixXd value_;
};

SpdMatrix validate_spd(const Eigen::MatrixXd& raw, double tol = kSymmetryTol);

Eigen::MatrixXd spd_log(const SpdMatrix& x);
SpdMatrix spd_exp(const Eigen::MatrixXd& sym);
SpdMatrix spd_power(const SpdMatrix& x, double c);
Eigen::MatrixXd spd_sqrt(const SpdMatrix& x);
Eigen::MatrixXd spd_inv_sqrt(const SpdMatrix& x);

TangentVector airm_log_map(const SpdMatrix& pole, const SpdMatrix& x);
SpdMatrix airm_exp_map(const TangentVector& tv);

// pole^{-1/2} * x * pole^{-1/2}, symmetrized.
Eigen::MatrixXd whiten(const SpdMatrix& pole, const Eigen::MatrixXd& x);

// trace(log^2(X^{-1/2} Y X^{-1/2})).
double geodesic_distance_squared(const SpdMatrix& x, const SpdMatrix& y);
double geodesic_distance(const SpdMatrix& x, const SpdMatrix& y);

void require_same_dim(const SpdMatrix& a, const SpdMatrix& b);

}  // namespace rose
