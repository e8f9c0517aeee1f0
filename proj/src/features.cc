#include "rose/features.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rose {

namespace {

void require_min_size(int height, int width, int min_side, const char* what) {
  if (height < min_side || width < min_side) {
    throw Error(ErrorCode::kImageTooSmall,
                std::string(what) + " needs at least " + std::to_string(min_side) + "x" +
                    std::to_string(min_side) + " pixels, got " + std::to_string(height) +
                    "x" + std::to_string(width));
  }
}

// Replicate-padded sample accessor.
double sample(const GrayImage& img, int y, int x) {
  return img.at(std::clamp(y, 0, img.height() - 1), std::clamp(x, 0, img.width() - 1));
}

struct Derivatives {
  double dx, dy, dxx, dyy;
};

Derivatives derivatives_at(const GrayImage& img, int y, int x) {
  const double c = img.at(y, x);
  const double l = sample(img, y, x - 1);
  const double r = sample(img, y, x + 1);
  const double u = sample(img, y - 1, x);
  const double d = sample(img, y + 1, x);
  return {0.5 * (r - l), 0.5 * (d - u), l - 2.0 * c + r, u - 2.0 * c + d};
}

double normalized_coord(int i, int n) {
  return n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
}

}  // namespace

FeatureImage::FeatureImage(int height, int width, std::vector<std::string> channel_tags)
    : height_(height),
      width_(width),
      tags_(std::move(channel_tags)),
      values_(static_cast<size_t>(height) * static_cast<size_t>(width) * tags_.size(), 0.0) {
  if (height_ < 1 || width_ < 1 || tags_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "feature image needs a positive shape");
  }
}

double GaborBank::sigma(int scale) const {
  const double b = std::pow(2.0, bandwidth_octaves);
  return wavelengths[static_cast<size_t>(scale)] / std::numbers::pi *
         std::sqrt(std::log(2.0) / 2.0) * (b + 1.0) / (b - 1.0);
}

int GaborBank::half_width(int scale) const {
  return static_cast<int>(std::ceil(support_sigmas * sigma(scale)));
}

int GaborBank::support() const {
  int widest = 0;
  for (int u = 0; u < static_cast<int>(wavelengths.size()); ++u) {
    widest = std::max(widest, 2 * half_width(u) + 1);
  }
  return widest;
}

GaborKernel gabor_kernel(const GaborBank& bank, int scale, int orientation) {
  const int half = bank.half_width(scale);
  const int side = 2 * half + 1;
  const double sigma = bank.sigma(scale);
  const double theta = std::numbers::pi * orientation / bank.orientations;
  const double freq = 2.0 * std::numbers::pi / bank.wavelengths[static_cast<size_t>(scale)];

  Eigen::MatrixXd env(side, side), phase(side, side);
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      env(dy + half, dx + half) = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      phase(dy + half, dx + half) = freq * (dx * std::cos(theta) + dy * std::sin(theta));
    }
  }
  const double mass = env.sum();
  const Eigen::MatrixXd cos_part = env.cwiseProduct(phase.array().cos().matrix());
  const Eigen::MatrixXd sin_part = env.cwiseProduct(phase.array().sin().matrix());
  // Subtract the envelope times the carrier's weighted mean so that both
  // parts sum to zero.
  const double dc_re = cos_part.sum() / mass;
  const double dc_im = sin_part.sum() / mass;
  GaborKernel k;
  k.real = (cos_part - dc_re * env) / mass;
  k.imag = (sin_part - dc_im * env) / mass;
  return k;
}

FeatureImage intensity_feature_map(const GrayImage& img) {
  require_min_size(img.height(), img.width(), 3, "intensity feature map");
  FeatureImage out(img.height(), img.width(), {"I", "|Ix|", "|Iy|", "|Ixx|", "|Iyy|"});
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Derivatives d = derivatives_at(img, y, x);
      out.at(y, x, 0) = img.at(y, x);
      out.at(y, x, 1) = std::abs(d.dx);
      out.at(y, x, 2) = std::abs(d.dy);
      out.at(y, x, 3) = std::abs(d.dxx);
      out.at(y, x, 4) = std::abs(d.dyy);
    }
  }
  return out;
}

FeatureImage color_feature_map(const ColorImage& img) {
  require_min_size(img.height(), img.width(), 3, "color feature map");
  FeatureImage out(img.height(), img.width(),
                   {"x", "y", "R", "G", "B", "R'", "G'", "B'", "R''", "G''", "B''"});
  for (int c = 0; c < 3; ++c) {
    const GrayImage plane = img.channel(c);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const Derivatives d = derivatives_at(plane, y, x);
        out.at(y, x, 2 + c) = plane.at(y, x);
        out.at(y, x, 5 + c) = std::hypot(d.dx, d.dy);
        out.at(y, x, 8 + c) = d.dxx + d.dyy;
      }
    }
  }
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(y, x, 0) = normalized_coord(x, img.width());
      out.at(y, x, 1) = normalized_coord(y, img.height());
    }
  }
  return out;
}

FeatureImage gabor_feature_map(const GrayImage& img, const GaborBank& bank) {
  require_min_size(img.height(), img.width(), bank.support(), "Gabor feature map");
  const int scales = static_cast<int>(bank.wavelengths.size());
  std::vector<std::string> tags = {"I", "x", "y"};
  for (int u = 0; u < scales; ++u) {
    for (int v = 0; v < bank.orientations; ++v) {
      tags.push_back("|G" + std::to_string(u) + "," + std::to_string(v) + "|");
    }
  }
  FeatureImage out(img.height(), img.width(), std::move(tags));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(y, x, 0) = img.at(y, x);
      out.at(y, x, 1) = normalized_coord(x, img.width());
      out.at(y, x, 2) = normalized_coord(y, img.height());
    }
  }

  for (int u = 0; u < scales; ++u) {
    const int half = bank.half_width(u);
    const int side = 2 * half + 1;
    // Replicate-padded copy so the inner loop needs no bounds checks.
    const int ph = img.height() + 2 * half;
    const int pw = img.width() + 2 * half;
    Eigen::MatrixXd padded(ph, pw);
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) padded(y, x) = sample(img, y - half, x - half);
    }
    for (int v = 0; v < bank.orientations; ++v) {
      const GaborKernel k = gabor_kernel(bank, u, v);
      const int channel = 3 + u * bank.orientations + v;
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          const auto window = padded.block(y, x, side, side);
          const double re = window.cwiseProduct(k.real).sum();
          const double im = window.cwiseProduct(k.imag).sum();
          out.at(y, x, channel) = std::hypot(re, im);
        }
      }
    }
  }
  return out;
}

SpdMatrix region_covariance(const FeatureImage& fi, const RegionSpec& region,
                            double eps_rel) {
  if (!(eps_rel > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "eps_rel must be positive");
  }
  if (region.x0 < 0 || region.y0 < 0 || region.x1 >= fi.width() ||
      region.y1 >= fi.height() || region.x1 < region.x0 || region.y1 < region.y0) {
    throw Error(ErrorCode::kInvalidArgument, "region outside the image");
  }
  const int n = region.area();
  if (n < 2) {
    throw Error(ErrorCode::kRegionTooSmall, "covariance needs at least two pixels");
  }
  const int c = fi.channels();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(c);
  for (int y = region.y0; y <= region.y1; ++y) {
    for (int x = region.x0; x <= region.x1; ++x) {
      for (int i = 0; i < c; ++i) mean(i) += fi.at(y, x, i);
    }
  }
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(c, c);
  Eigen::VectorXd centred(c);
  for (int y = region.y0; y <= region.y1; ++y) {
    for (int x = region.x0; x <= region.x1; ++x) {
      for (int i = 0; i < c; ++i) centred(i) = fi.at(y, x, i) - mean(i);
      cov.selfadjointView<Eigen::Lower>().rankUpdate(centred);
    }
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= (n - 1);
  const double shrink = eps_rel * cov.trace() / c + kAbsoluteShrinkageFloor;
  cov.diagonal().array() += shrink;
  return validate_spd(cov);
}

std::vector<RegionSpec> grid_regions(int height, int width, int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least one row and column");
  }
  const int cell_h = height / rows;
  const int cell_w = width / cols;
  if (cell_h < 1 || cell_w < 1 || cell_h * cell_w < 2) {
    throw Error(ErrorCode::kGridTooFine,
                std::to_string(rows) + "x" + std::to_string(cols) + " grid over a " +
                    std::to_string(height) + "x" + std::to_string(width) + " image");
  }
  std::vector<RegionSpec> out;
  for (int r = 0; r < rows; ++r) {
    for (int col = 0; col < cols; ++col) {
      RegionSpec s;
      s.y0 = r * cell_h;
      s.y1 = r == rows - 1 ? height - 1 : s.y0 + cell_h - 1;
      s.x0 = col * cell_w;
      s.x1 = col == cols - 1 ? width - 1 : s.x0 + cell_w - 1;
      out.push_back(s);
    }
  }
  return out;
}

std::vector<SpdMatrix> grid_covariances(const FeatureImage& fi, int rows, int cols,
                                        double eps_rel) {
  std::vector<SpdMatrix> out;
  for (const RegionSpec& r : grid_regions(fi.height(), fi.width(), rows, cols)) {
    out.push_back(region_covariance(fi, r, eps_rel));
  }
  return out;
}

}  // namespace rose
