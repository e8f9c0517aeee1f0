#include "rose/spd.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace rose {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotSquare: return "NotSquare";
    case ErrorCode::kAsymmetryExceedsTolerance: return "AsymmetryExceedsTolerance";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIndefiniteKernel: return "IndefiniteKernel";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kDegenerateDirection: return "DegenerateDirection";
    case ErrorCode::kTSampleTooLarge: return "TSampleTooLarge";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kRegionTooSmall: return "RegionTooSmall";
    case ErrorCode::kGridTooFine: return "GridTooFine";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kEmptyData: return "EmptyData";
    case ErrorCode::kEmptyTrain: return "EmptyTrain";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDimensionInconsistency: return "DimensionInconsistency";
    case ErrorCode::kExclusionExceedsClasses: return "ExclusionExceedsClasses";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

// Reorders an eigendecomposition so eigenvalues are descending.
EigenPair sorted_descending(const Eigen::VectorXd& values,
                            const Eigen::MatrixXd& vectors) {
  const Eigen::Index d = values.size();
  std::vector<Eigen::Index> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values(a) > values(b);
  });
  EigenPair out{Eigen::VectorXd(d), Eigen::MatrixXd(vectors.rows(), d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.eigenvalues(i) = values(order[static_cast<size_t>(i)]);
    out.eigenvectors.col(i) = vectors.col(order[static_cast<size_t>(i)]);
  }
  return out;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

EigenPair symmetric_eigen(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument,
                "symmetric eigendecomposition failed to converge");
  }
  return sorted_descending(solver.eigenvalues(), solver.eigenvectors());
}

double relative_asymmetry(const Eigen::MatrixXd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

SpdMatrix SpdMatrix::validate(const Eigen::MatrixXd& raw, double tol) {
  if (raw.rows() != raw.cols() || raw.rows() == 0) {
    std::ostringstream os;
    os << "matrix is " << raw.rows() << "x" << raw.cols();
    throw Error(ErrorCode::kNotSquare, os.str());
  }
  if (!raw.allFinite()) {
    throw Error(ErrorCode::kNotPositiveDefinite, "matrix has non-finite entries");
  }
  const double asym = relative_asymmetry(raw);
  if (asym > tol) {
    std::ostringstream os;
    os << "relative asymmetry " << asym << " exceeds " << tol;
    throw Error(ErrorCode::kAsymmetryExceedsTolerance, os.str());
  }
  Eigen::MatrixXd m = symmetrize(raw);
  EigenPair eig = symmetric_eigen(m);
  SpdMatrix out(std::move(m), std::move(eig));
  out.check_conditioning();
  return out;
}

SpdMatrix SpdMatrix::identity(int d) {
  return from_eigen(
      {Eigen::VectorXd::Ones(d), Eigen::MatrixXd::Identity(d, d)});
}

SpdMatrix SpdMatrix::diagonal(const Eigen::VectorXd& diag) {
  return validate(diag.asDiagonal().toDenseMatrix());
}

SpdMatrix SpdMatrix::from_eigen(EigenPair eig) {
  if (!(eig.eigenvalues.array() > 0.0).all() || !eig.eigenvalues.allFinite()) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "matrix function produced a non-positive eigenvalue");
  }
  EigenPair sorted = sorted_descending(eig.eigenvalues, eig.eigenvectors);
  Eigen::MatrixXd m = sorted.apply([](double v) { return v; });
  return SpdMatrix(std::move(m), std::move(sorted));
}

void SpdMatrix::check_conditioning() const {
  const double lo = min_eigenvalue();
  const double hi = max_eigenvalue();
  if (!(lo > 0.0) || lo <= kEigenFloor * hi) {
    std::ostringstream os;
    os.precision(17);
    os << "smallest eigenvalue " << lo << " (largest " << hi << ")";
    throw Error(ErrorCode::kNotPositiveDefinite, os.str());
  }
}

TangentVector::TangentVector(SpdMatrix pole, Eigen::MatrixXd value)
    : pole_(std::move(pole)), value_(std::move(value)) {
  if (value_.rows() != pole_.dim() || value_.cols() != pole_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "tangent value does not match pole dimension");
  }
  if (relative_asymmetry(value_) > kSymmetryTol) {
    throw Error(ErrorCode::kAsymmetryExceedsTolerance,
                "tangent value is not symmetric");
  }
  value_ = symmetrize(value_);
}

SpdMatrix validate_spd(const Eigen::MatrixXd& raw, double tol) {
  return SpdMatrix::validate(raw, tol);
}

Eigen::MatrixXd spd_log(const SpdMatrix& x) {
  x.check_conditioning();
  return x.eigen().apply([](double v) { return std::log(v); });
}

SpdMatrix spd_exp(const Eigen::MatrixXd& sym) {
  if (sym.rows() != sym.cols()) {
    throw Error(ErrorCode::kNotSquare, "spd_exp needs a square matrix");
  }
  if (relative_asymmetry(sym) > kSymmetryTol) {
    throw Error(ErrorCode::kAsymmetryExceedsTolerance,
                "spd_exp needs a symmetric matrix");
  }
  EigenPair eig = symmetric_eigen(symmetrize(sym));
  eig.eigenvalues = eig.eigenvalues.array().exp();
  return SpdMatrix::from_eigen(std::move(eig));
}

SpdMatrix spd_power(const SpdMatrix& x, double c) {
  x.check_conditioning();
  EigenPair eig = x.eigen();
  eig.eigenvalues = eig.eigenvalues.array().pow(c);
  return SpdMatrix::from_eigen(std::move(eig));
}

Eigen::MatrixXd spd_sqrt(const SpdMatrix& x) {
  return x.eigen().apply([](double v) { return std::sqrt(v); });
}

Eigen::MatrixXd spd_inv_sqrt(const SpdMatrix& x) {
  x.check_conditioning();
  return x.eigen().apply([](double v) { return 1.0 / std::sqrt(v); });
}

void require_same_dim(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << a.dim() << " vs " << b.dim();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

Eigen::MatrixXd whiten(const SpdMatrix& pole, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd inv_sqrt = spd_inv_sqrt(pole);
  return symmetrize(inv_sqrt * x * inv_sqrt);
}

TangentVector airm_log_map(const SpdMatrix& pole, const SpdMatrix& x) {
  require_same_dim(pole, x);
  const Eigen::MatrixXd inner = whiten(pole, x.matrix());
  const Eigen::MatrixXd log_inner =
      symmetric_eigen(inner).apply([](double v) { return std::log(v); });
  const Eigen::MatrixXd root = spd_sqrt(pole);
  return TangentVector(pole, symmetrize(root * log_inner * root));
}

SpdMatrix airm_exp_map(const TangentVector& tv) {
  const Eigen::MatrixXd inner = whiten(tv.pole(), tv.value());
  const Eigen::MatrixXd exp_inner =
      symmetric_eigen(inner).apply([](double v) { return std::exp(v); });
  const Eigen::MatrixXd root = spd_sqrt(tv.pole());
  return SpdMatrix::validate(symmetrize(root * exp_inner * root));
}

double geodesic_distance_squared(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y);
  if (x.matrix() == y.matrix()) return 0.0;
  const EigenPair eig = symmetric_eigen(whiten(x, y.matrix()));
  return eig.eigenvalues.array().log().square().sum();
}

double geodesic_distance(const SpdMatrix& x, const SpdMatrix& y) {
  return std::sqrt(geodesic_distance_squared(x, y));
}

}  // namespace rose
