#include "rose/projection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "json.hpp"

#include "rose/matrix_io.h"
#include "rose/random.h"

namespace rose {

namespace {

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormatTag = "rose-projection-model";

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(format_double(m(i, j)));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& values = j.at("values");
  if (static_cast<Eigen::Index>(values.size()) != rows) {
    throw Error(ErrorCode::kParseError, "matrix row count mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = values.at(static_cast<size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::kParseError, "matrix column count mismatch");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = parse_double(row.at(static_cast<size_t>(c)).get<std::string>());
    }
  }
  return m;
}

}  // namespace

std::string to_string(ExponentMode mode) {
  return mode == ExponentMode::kWhitening ? "whitening" : "paper_literal";
}

ExponentMode exponent_mode_from_string(const std::string& s) {
  if (s == "whitening") return ExponentMode::kWhitening;
  if (s == "paper_literal") return ExponentMode::kPaperLiteral;
  throw Error(ErrorCode::kInvalidArgument, "unknown exponent mode '" + s + "'");
}

int default_exemplar_count(int p) {
  return std::max(1, std::min(30, (p + 3) / 4));
}

ProjectionModel::ProjectionModel(std::vector<SpdMatrix> reference_points,
                                 KernelParams kernel, Eigen::MatrixXd weights,
                                 int t, ExponentMode exponent_mode,
                                 std::uint64_t seed, double clamped_mass)
    : reference_points_(std::move(reference_points)),
      kernel_(kernel),
      weights_(std::move(weights)),
      t_(t),
      exponent_mode_(exponent_mode),
      seed_(seed),
      clamped_mass_(clamped_mass) {
  if (reference_points_.empty() || weights_.cols() < 1 ||
      weights_.rows() != static_cast<Eigen::Index>(reference_points_.size())) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent projection model shape");
  }
  if (t_ < 1 || t_ > p()) {
    throw Error(ErrorCode::kTSampleTooLarge, "t outside [1, p]");
  }
  for (const auto& r : reference_points_) require_same_dim(reference_points_.front(), r);
}

Eigen::VectorXd ProjectionModel::kernel_vector(const SpdMatrix& x) const {
  if (x.dim() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query is " + std::to_string(x.dim()) + "x" +
                    std::to_string(x.dim()) + ", model expects " +
                    std::to_string(dim()));
  }
  return rose::kernel_vector(reference_points_, x, kernel_);
}

Embedding ProjectionModel::project(const Eigen::VectorXd& kernel_vec) const {
  if (kernel_vec.size() != p()) {
    throw Error(ErrorCode::kDimensionMismatch, "kernel vector length != p");
  }
  return weights_.transpose() * kernel_vec;
}

Embedding ProjectionModel::embed(const SpdMatrix& x) const {
  return project(kernel_vector(x));
}

ProjectionModel build_projection_model(const std::vector<SpdMatrix>& train,
                                       const ProjectionOptions& options) {
  options.kernel.check();
  const int p = static_cast<int>(train.size());
  if (p < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "projection model needs at least two reference points");
  }
  if (options.k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "hyperplane count k must be >= 1");
  }
  const int t = options.t.value_or(default_exemplar_count(p));
  if (t > p) {
    throw Error(ErrorCode::kTSampleTooLarge,
                "t = " + std::to_string(t) + " exceeds p = " + std::to_string(p));
  }
  if (t < 1) {
    throw Error(ErrorCode::kInvalidArgument, "t must be >= 1");
  }

  BuildCost cost;
  const GramMatrix gram = gram_matrix(train, options.kernel);
  cost.kernel_evaluations = static_cast<long long>(p) * (p - 1) / 2;
  const Eigen::MatrixXd k_pow = gram_power(gram, exponent_of(options.exponent_mode));
  cost.gram_eigendecompositions = 2;

  // Column j of `centred` is (1/t) e_{S_j} - (1/p) e.
  Eigen::MatrixXd centred(p, options.k);
  for (int j = 0; j < options.k; ++j) {
    Rng rng = make_rng(options.seed, stream::kHyperplane, static_cast<std::uint64_t>(j));
    centred.col(j).setConstant(-1.0 / p);
    for (int idx : sample_without_replacement(p, t, rng)) {
      centred(idx, j) = 1.0 / t - 1.0 / p;
    }
  }
  Eigen::MatrixXd weights = k_pow * centred;
  // A double-centred Gram that is exactly zero means every reference maps to
  // the same feature point, so every hyperplane is zero.
  const Eigen::MatrixXd& g = gram.entries();
  const Eigen::VectorXd row_mean = g.rowwise().mean();
  const Eigen::MatrixXd double_centred =
      (g.colwise() - row_mean).rowwise() - row_mean.transpose() +
      Eigen::MatrixXd::Constant(p, p, row_mean.mean());
  if (double_centred.isZero(0.0)) weights.setZero();
  cost.column_accumulations = static_cast<long long>(p) * options.k;

  ProjectionModel model(train, options.kernel, std::move(weights), t,
                        options.exponent_mode, options.seed, gram.clamped_mass());
  model.set_build_cost(cost);
  return model;
}

Embedding embed(const ProjectionModel& model, const SpdMatrix& x) {
  return model.embed(x);
}

std::vector<Embedding> embed_batch(const ProjectionModel& model,
                                   const std::vector<SpdMatrix>& points,
                                   int threads) {
  std::vector<Embedding> out(points.size());
  const size_t n = points.size();
  const size_t workers =
      std::clamp<size_t>(static_cast<size_t>(std::max(threads, 1)), 1, std::max<size_t>(n, 1));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) out[i] = model.embed(points[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (size_t i = w; i < n; i += workers) out[i] = model.embed(points[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<bool> binarize(const Embedding& e) {
  std::vector<bool> bits(static_cast<size_t>(e.size()));
  for (Eigen::Index j = 0; j < e.size(); ++j) bits[static_cast<size_t>(j)] = e(j) >= 0.0;
  return bits;
}

double exemplar_covariance_scale(int p, int t) {
  if (p < 2) return 0.0;
  return static_cast<double>(p - t) / (static_cast<double>(t) * p * (p - 1));
}

Eigen::MatrixXd whitened_distance_oracle(const ProjectionModel& model,
                                         const std::vector<SpdMatrix>& points) {
  const int p = model.p();
  const GramMatrix gram = gram_matrix(model.reference_points(), model.kernel());
  const Eigen::MatrixXd k_pow = gram_power(gram, exponent_of(model.exponent_mode()));
  const auto n = static_cast<Eigen::Index>(points.size());

  // Centred images of the kernel vectors: (I - ee^T/p) K^e kappa(x).
  Eigen::MatrixXd images(p, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    images.col(i) = k_pow * model.kernel_vector(points[static_cast<size_t>(i)]);
  }
  images.rowwise() -= images.colwise().mean();

  const double scale = exemplar_covariance_scale(p, model.t());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out(i, j) = out(j, i) = scale * (images.col(i) - images.col(j)).squaredNorm();
    }
  }
  return out;
}

JlReport jl_distortion_report(const ProjectionModel& model,
                              const std::vector<SpdMatrix>& points,
                              double epsilon) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "distortion report needs >= 2 points");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1/2)");
  }
  const Eigen::MatrixXd oracle = whitened_distance_oracle(model, points);
  const std::vector<Embedding> embedded = embed_batch(model, points);

  JlReport report;
  report.epsilon = epsilon;
  report.k = model.k();
  std::vector<double> distortions;
  long long within = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t j = i + 1; j < points.size(); ++j) {
      const double truth = oracle(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double est = (embedded[i] - embedded[j]).squaredNorm() / model.k();
      double distortion = 0.0;
      if (truth == 0.0) {
        // Coincident points: within iff the embedding also coincides.
        distortion = est == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      } else {
        distortion = std::abs(est / truth - 1.0);
      }
      if (distortion <= epsilon) ++within;
      distortions.push_back(distortion);
    }
  }
  report.pair_count = static_cast<long long>(distortions.size());
  report.fraction_within = static_cast<double>(within) / static_cast<double>(report.pair_count);
  const size_t mid = distortions.size() / 2;
  std::nth_element(distortions.begin(), distortions.begin() + static_cast<std::ptrdiff_t>(mid),
                   distortions.end());
  double median = distortions[mid];
  if (distortions.size() % 2 == 0) {
    const double lower = *std::max_element(distortions.begin(),
                                           distortions.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  report.median_distortion = median;
  return report;
}

std::string serialize_model(const ProjectionModel& model) {
  nlohmann::json refs = nlohmann::json::array();
  for (const auto& r : model.reference_points()) refs.push_back(matrix_to_json(r.matrix()));
  nlohmann::json j = {
      {"format", kModelFormatTag},
      {"version", kModelFormatVersion},
      {"d", model.dim()},
      {"p", model.p()},
      {"k", model.k()},
      {"t", model.t()},
      {"sigma", format_double(model.kernel().sigma)},
      {"psd_policy", model.kernel().psd_policy == PsdPolicy::kStrict ? "strict" : "clamp"},
      {"exponent_mode", to_string(model.exponent_mode())},
      {"seed", std::to_string(model.seed())},
      {"clamped_mass", format_double(model.clamped_mass())},
      {"reference_points", std::move(refs)},
      {"weights", matrix_to_json(model.weights())},
  };
  return j.dump(1) + "\n";
}

ProjectionModel deserialize_model(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormatTag) {
      throw Error(ErrorCode::kParseError, "not a projection model file");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kParseError, "unsupported model version");
    }
    std::vector<SpdMatrix> refs;
    for (const auto& r : j.at("reference_points")) {
      refs.push_back(validate_spd(matrix_from_json(r)));
    }
    KernelParams kernel;
    kernel.sigma = parse_double(j.at("sigma").get<std::string>());
    kernel.psd_policy = j.at("psd_policy").get<std::string>() == "strict"
                            ? PsdPolicy::kStrict
                            : PsdPolicy::kClamp;
    ProjectionModel model(std::move(refs), kernel, matrix_from_json(j.at("weights")),
                          j.at("t").get<int>(),
                          exponent_mode_from_string(j.at("exponent_mode").get<std::string>()),
                          std::stoull(j.at("seed").get<std::string>()),
                          parse_double(j.at("clamped_mass").get<std::string>()));
    if (model.dim() != j.at("d").get<int>() || model.p() != j.at("p").get<int>() ||
        model.k() != j.at("k").get<int>()) {
      throw Error(ErrorCode::kParseError, "model header disagrees with its payload");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
}

void save_model(const ProjectionModel& model, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(model));
}

ProjectionModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_text_file(path));
}

}  // namespace rose
