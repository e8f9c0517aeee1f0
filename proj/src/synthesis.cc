#include "rose/synthesis.h"

#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "rose/random.h"

namespace rose {

namespace {

constexpr double kDegenerateDistance = 1e-12;
constexpr int kMaxDirectionRetries = 100;

std::string describe(const ConvergenceRecord& r) {
  std::ostringstream os;
  os << "Karcher mean residual " << r.residual << " after " << r.iterations
     << " iterations";
  return os.str();
}

Eigen::MatrixXd mean_tangent(const SpdMatrix& at,
                             const std::vector<SpdMatrix>& points) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(at.dim(), at.dim());
  for (const auto& x : points) sum += airm_log_map(at, x).value();
  return sum / static_cast<double>(points.size());
}

}  // namespace

void SynthesisConfig::check() const {
  if (count < 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic count must be >= 0");
  }
  if (!(karcher_tol > 0.0) || karcher_max_iter < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "Karcher tolerance must be positive and max_iter >= 1");
  }
}

NonConvergenceError::NonConvergenceError(SpdMatrix last, ConvergenceRecord record)
    : Error(ErrorCode::kNonConvergence, describe(record)),
      last_(std::move(last)),
      record_(record) {}

KarcherResult karcher_mean(const std::vector<SpdMatrix>& points, double tol,
                           int max_iter) {
  if (points.empty()) {
    throw Error(ErrorCode::kEmptyInput, "Karcher mean of an empty set");
  }
  if (!(tol > 0.0) || max_iter < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "Karcher tolerance must be positive and max_iter >= 1");
  }
  Eigen::MatrixXd arithmetic = Eigen::MatrixXd::Zero(points[0].dim(), points[0].dim());
  for (const auto& x : points) {
    require_same_dim(points[0], x);
    arithmetic += x.matrix();
  }
  SpdMatrix current = validate_spd(arithmetic / static_cast<double>(points.size()));

  ConvergenceRecord record;
  for (int iter = 0;; ++iter) {
    const Eigen::MatrixXd step = mean_tangent(current, points);
    record.iterations = iter;
    record.residual = step.norm();
    if (record.residual <= tol) {
      record.converged = true;
      return {std::move(current), record};
    }
    if (iter == max_iter) break;
    current = airm_exp_map(TangentVector(current, step));
  }
  throw NonConvergenceError(std::move(current), record);
}

TrainingBall training_ball_around(const SpdMatrix& mean,
                                  const std::vector<SpdMatrix>& points) {
  double radius = 0.0;
  for (const auto& x : points) radius = std::max(radius, geodesic_distance(mean, x));
  return {mean, radius, {}};
}

TrainingBall training_ball(const std::vector<SpdMatrix>& points,
                           const SynthesisConfig& cfg) {
  cfg.check();
  KarcherResult km = karcher_mean(points, cfg.karcher_tol, cfg.karcher_max_iter);
  TrainingBall ball = training_ball_around(km.mean, points);
  ball.record = km.record;
  return ball;
}

SpdMatrix geodesic_rescale(const SpdMatrix& x, const SpdMatrix& pole, double zeta) {
  require_same_dim(x, pole);
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) {
    throw Error(ErrorCode::kInvalidArgument, "zeta must be a nonnegative real");
  }
  const EigenPair inner = symmetric_eigen(whiten(pole, x.matrix()));
  const double dist = std::sqrt(inner.eigenvalues.array().log().square().sum());
  if (dist <= kDegenerateDistance) {
    throw Error(ErrorCode::kDegenerateDirection,
                "point coincides with the pole; no geodesic direction");
  }
  const double c = zeta / dist;
  const Eigen::MatrixXd root = spd_sqrt(pole);
  const Eigen::MatrixXd moved = inner.apply([c](double v) { return std::pow(v, c); });
  return validate_spd(root * moved * root, 1e-8);
}

std::vector<SpdMatrix> generate_synthetic(const std::vector<SpdMatrix>& training,
                                          const SynthesisConfig& cfg) {
  cfg.check();
  if (cfg.count == 0) return {};
  if (training.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthesis needs at least two training points");
  }
  return generate_synthetic(training, training_ball(training, cfg), cfg);
}

std::vector<SpdMatrix> generate_synthetic(const std::vector<SpdMatrix>& training,
                                          const TrainingBall& ball,
                                          const SynthesisConfig& cfg) {
  cfg.check();
  std::vector<SpdMatrix> out;
  out.reserve(static_cast<size_t>(cfg.count));
  if (cfg.count == 0) return out;
  if (training.empty()) {
    throw Error(ErrorCode::kEmptyInput, "synthesis needs training points");
  }

  const SpdMatrix& mean = ball.mean;
  const int d = mean.dim();
  const Eigen::MatrixXd root = spd_sqrt(mean);

  for (int i = 0; i < cfg.count; ++i) {
    Rng rng = make_rng(cfg.seed, stream::kSynthetic, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<size_t> pick(0, training.size() - 1);

    bool done = false;
    for (int attempt = 0; attempt < kMaxDirectionRetries && !done; ++attempt) {
      const SpdMatrix* direction = nullptr;
      std::optional<SpdMatrix> drawn;
      if (cfg.direction_mode == DirectionMode::kTrainingPoint) {
        direction = &training[pick(rng)];
      } else {
        Eigen::MatrixXd g(d, d);
        for (int r = 0; r < d; ++r) {
          for (int c = 0; c < d; ++c) g(r, c) = gauss(rng);
        }
        Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
        sym /= sym.norm();
        // Unit norm in the whitened frame means unit geodesic distance.
        drawn = airm_exp_map(TangentVector(mean, root * sym * root));
        direction = &*drawn;
      }
      const double zeta = unit(rng) * ball.radius;
      if (ball.radius == 0.0) {
        out.push_back(mean);
        done = true;
        break;
      }
      try {
        out.push_back(geodesic_rescale(*direction, mean, zeta));
        done = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateDirection) throw;
      }
    }
    if (!done) {
      throw Error(ErrorCode::kDegenerateDirection,
                  "no usable direction after 100 draws for synthetic point " +
                      std::to_string(i));
    }
  }
  return out;
}

}  // namespace rose
