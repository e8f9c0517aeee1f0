#pragma once

// Per-pixel feature maps and region covariance descriptors.
//
// Derivatives use the central difference [-1/2, 0, 1/2] and the second
// difference [1, -2, 1] with replicate padding; x runs along columns.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rose/image.h"
#include "rose/spd.h"

namespace rose {

class FeatureImage {
 public:
  FeatureImage(int height, int width, std::vector<std::string> channel_tags);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return static_cast<int>(tags_.size()); }
  const std::vector<std::string>& channel_tags() const { return tags_; }

  double at(int y, int x, int c) const { return values_[index(y, x, c)]; }
  double& at(int y, int x, int c) { return values_[index(y, x, c)]; }

 private:
  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)) *
               tags_.size() +
           static_cast<size_t>(c);
  }

  int height_;
  int width_;
  std::vector<std::string> tags_;
  std::vector<double> values_;
};

// Inclusive pixel bounds.
struct RegionSpec {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int area() const { return (x1 - x0 + 1) * (y1 - y0 + 1); }
};

struct GaborBank {
  // Centre wavelengths in pixels, one per scale.
  std::array<double, 5> wavelengths{4.0, 4.0 * 1.4142135623730951, 8.0,
                                    8.0 * 1.4142135623730951, 16.0};
  int orientations = 8;
  double bandwidth_octaves = 1.0;
  // Kernel half-width in units of the envelope sigma.
  double support_sigmas = 3.0;

  double sigma(int scale) const;
  int half_width(int scale) const;
  // Side length of the largest kernel; images must be at least this big.
  int support() const;
};

// [I, |dI/dx|, |dI/dy|, |d2I/dx2|, |d2I/dy2|]
FeatureImage intensity_feature_map(const GrayImage& img);

// [x, y, R, G, B, |grad R|, |grad G|, |grad B|, lap R, lap G, lap B]
FeatureImage color_feature_map(const ColorImage& img);

// [I, x, y, |G_{u,v}| for u = 0..4, v = 0..7]
FeatureImage gabor_feature_map(const GrayImage& img, const GaborBank& bank = {});

// Complex Gabor kernel for one (scale, orientation), zero-DC corrected and
// normalized by the envelope mass. Rows index dy, columns dx.
struct GaborKernel {
  Eigen::MatrixXd real;
  Eigen::MatrixXd imag;
};
GaborKernel gabor_kernel(const GaborBank& bank, int scale, int orientation);

inline constexpr double kDefaultShrinkage = 1e-5;
inline constexpr double kAbsoluteShrinkageFloor = 1e-8;

// Sample covariance (1/(N-1)) of the region's feature vectors plus
// (eps_rel * trace / C + 1e-8) * I.
SpdMatrix region_covariance(const FeatureImage& fi, const RegionSpec& region,
                            double eps_rel = kDefaultShrinkage);

// Even rows x cols partition, remainders go to the last row/column; output
// is row-major.
std::vector<RegionSpec> grid_regions(int height, int width, int rows, int cols);
std::vector<SpdMatrix> grid_covariances(const FeatureImage& fi, int rows, int cols,
                                        double eps_rel = kDefaultShrinkage);

}  // namespace rose
