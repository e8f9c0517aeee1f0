#pragma once

// Random projection of SPD matrices through the Stein-kernel feature space.
//
// Each hyperplane is an implicit, approximately Gaussian direction built from
// the average of t randomly chosen reference points, centred on the mean of
// all p references and (in whitening mode) multiplied by the inverse square
// root of the kernel matrix. In kernel terms column j of W is
//
//   w_j = K^e ((1/t) e_{S_j} - (1/p) e),   e = -1/2 or +1/2,
//
// and a point X projects to coords_j = sum_i W_ij k(ref_i, X).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rose/spd.h"
#include "rose/stein.h"

namespace rose {

enum class ExponentMode {
  kWhitening,     // K^{-1/2}, pseudo-inverse square root
  kPaperLiteral,  // K^{+1/2}
};

std::string to_string(ExponentMode mode);
ExponentMode exponent_mode_from_string(const std::string& s);
inline double exponent_of(ExponentMode mode) {
  return mode == ExponentMode::kWhitening ? -0.5 : 0.5;
}

// min(30, ceil(p / 4)), at least 1.
int default_exemplar_count(int p);

using Embedding = Eigen::VectorXd;

// Work performed while building a model; used to check the cost model
// O(p^3) build, O(p) kernel evaluations plus O(p k) multiply-adds per query.
struct BuildCost {
  long long kernel_evaluations = 0;
  long long gram_eigendecompositions = 0;
  long long column_accumulations = 0;  // reference columns summed into W
};

struct QueryCost {
  long long kernel_evaluations = 0;
  long long multiply_adds = 0;
};

struct ProjectionOptions {
  int k = 1;
  std::optional<int> t;  // default_exemplar_count(p) when unset
  KernelParams kernel;
  ExponentMode exponent_mode = ExponentMode::kWhitening;
  std::uint64_t seed = 0;
};

class ProjectionModel {
 public:
  ProjectionModel(std::vector<SpdMatrix> reference_points, KernelParams kernel,
                  Eigen::MatrixXd weights, int t, ExponentMode exponent_mode,
                  std::uint64_t seed, double clamped_mass);

  int dim() const { return reference_points_.front().dim(); }
  int p() const { return static_cast<int>(reference_points_.size()); }
  int k() const { return static_cast<int>(weights_.cols()); }
  int t() const { return t_; }

  const std::vector<SpdMatrix>& reference_points() const { return reference_points_; }
  const KernelParams& kernel() const { return kernel_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  ExponentMode exponent_mode() const { return exponent_mode_; }
  std::uint64_t seed() const { return seed_; }
  double clamped_mass() const { return clamped_mass_; }
  const BuildCost& build_cost() const { return build_cost_; }
  void set_build_cost(const BuildCost& c) { build_cost_ = c; }

  QueryCost query_cost() const {
    return {p(), static_cast<long long>(p()) * k()};
  }

  Eigen::VectorXd kernel_vector(const SpdMatrix& x) const;
  Embedding project(const Eigen::VectorXd& kernel_vec) const;
  Embedding embed(const SpdMatrix& x) const;

 private:
  std::vector<SpdMatrix> reference_points_;
  KernelParams kernel_;
  Eigen::MatrixXd weights_;
  int t_;
  ExponentMode exponent_mode_;
  std::uint64_t seed_;
  double clamped_mass_;
  BuildCost build_cost_;
};

ProjectionModel build_projection_model(const std::vector<SpdMatrix>& train,
                                       const ProjectionOptions& options);

Embedding embed(const ProjectionModel& model, const SpdMatrix& x);

// Evaluates on up to `threads` workers; results are identical to serial
// evaluation because each point is computed independently.
std::vector<Embedding> embed_batch(const ProjectionModel& model,
                                   const std::vector<SpdMatrix>& points,
                                   int threads = 1);

// Sign quantization: bit j is set iff coords_j >= 0.
std::vector<bool> binarize(const Embedding& e);

struct JlReport {
  long long pair_count = 0;
  double epsilon = 0.0;
  double fraction_within = 1.0;
  double median_distortion = 0.0;  // median |embedded / oracle - 1|
  int k = 0;
};

// Exact expected squared embedded distance per coordinate for the model's
// hyperplane distribution:
//   c(p,t) * d^T K^{e} (I - ee^T/p) K^{e} d,   d = kappa(u) - kappa(v),
// with c(p,t) = (p - t) / (t p (p - 1)) the covariance scale of the centred
// exemplar indicator (1/t) e_S - (1/p) e.
double exemplar_covariance_scale(int p, int t);
Eigen::MatrixXd whitened_distance_oracle(const ProjectionModel& model,
                                         const std::vector<SpdMatrix>& points);

JlReport jl_distortion_report(const ProjectionModel& model,
                              const std::vector<SpdMatrix>& points,
                              double epsilon);

// Versioned JSON container; coordinates survive a save/load round trip
// bit-exactly.
std::string serialize_model(const ProjectionModel& model);
ProjectionModel deserialize_model(const std::string& text);
void save_model(const ProjectionModel& model, const std::filesystem::path& path);
ProjectionModel load_model(const std::filesystem::path& path);

}  // namespace rose
