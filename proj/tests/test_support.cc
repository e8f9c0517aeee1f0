#include "test_support.h"

#include <cmath>

namespace rose::testing {

namespace {

Eigen::MatrixXd gaussian_matrix(TestRng& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

}  // namespace

Eigen::MatrixXd random_spd_matrix(TestRng& rng, int d, double cond) {
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian_matrix(rng, d, d))
                                .householderQ();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd lambda(d);
  for (int i = 0; i < d; ++i) lambda(i) = std::pow(cond, u(rng));
  const double scale = std::pow(2.0, 2.0 * u(rng) - 1.0);
  Eigen::MatrixXd m = scale * q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

SpdMatrix random_spd(TestRng& rng, int d, double cond) {
  return validate_spd(random_spd_matrix(rng, d, cond));
}

Eigen::MatrixXd random_symmetric(TestRng& rng, int d, double scale) {
  const Eigen::MatrixXd g = gaussian_matrix(rng, d, d);
  return scale * 0.5 * (g + g.transpose());
}

Eigen::MatrixXd random_invertible(TestRng& rng, int d) {
  for (;;) {
    Eigen::MatrixXd a = gaussian_matrix(rng, d, d) + 2.0 * Eigen::MatrixXd::Identity(d, d);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto s = svd.singularValues();
    if (s(s.size() - 1) > 0.2 && s(0) / s(s.size() - 1) < 50.0) return a;
  }
}

Eigen::MatrixXd oracle_matrix_function(const Eigen::MatrixXd& spd,
                                       const std::function<double(double)>& f) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(spd, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = f(s(i));
  Eigen::MatrixXd out = svd.matrixU() * s.asDiagonal() * svd.matrixU().transpose();
  return 0.5 * (out + out.transpose());
}

double oracle_geodesic_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(x.partialPivLu().solve(y), false);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = std::log(es.eigenvalues()(i).real());
    sum += l * l;
  }
  return std::sqrt(sum);
}

double oracle_log_det(const Eigen::MatrixXd& m) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  return lu.matrixLU().diagonal().array().abs().log().sum();
}

std::vector<SpdMatrix> wishart_cluster(TestRng& rng, const SpdMatrix& center, int n,
                                       int dof) {
  const Eigen::MatrixXd root = spd_sqrt(center);
  std::vector<SpdMatrix> out;
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd g = gaussian_matrix(rng, center.dim(), dof);
    const Eigen::MatrixXd w = g * g.transpose() / dof;
    out.push_back(validate_spd(root * w * root, 1e-8));
  }
  return out;
}

std::vector<SpdMatrix> class_centers(int n_classes, int d, double separation,
                                     std::uint64_t seed) {
  TestRng rng(seed);
  std::vector<SpdMatrix> out;
  out.push_back(SpdMatrix::identity(d));
  while (static_cast<int>(out.size()) < n_classes) {
    Eigen::MatrixXd s = random_symmetric(rng, d);
    s *= separation / s.norm();
    SpdMatrix c = spd_exp(s);
    bool far = true;
    for (const auto& o : out) far = far && geodesic_distance(o, c) >= 0.8 * separation;
    if (far) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace rose::testing
