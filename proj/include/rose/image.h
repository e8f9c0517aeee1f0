#pragma once

// Gray and RGB images with values in [0, 1], binary PGM/PPM ingestion and
// box-filter downsampling.

#include <filesystem>
#include <string_view>
#include <vector>

namespace rose {

class GrayImage {
 public:
  GrayImage(int height, int width, std::vector<double> pixels);
  GrayImage(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  double at(int y, int x) const { return pixels_[index(y, x)]; }
  double& at(int y, int x) { return pixels_[index(y, x)]; }
  const std::vector<double>& pixels() const { return pixels_; }

 private:
  size_t index(int y, int x) const {
    return static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x);
  }

  int height_;
  int width_;
  std::vector<double> pixels_;
};

// Interleaved RGB.
class ColorImage {
 public:
  ColorImage(int height, int width, std::vector<double> rgb);
  ColorImage(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  double at(int y, int x, int channel) const { return rgb_[index(y, x, channel)]; }
  double& at(int y, int x, int channel) { return rgb_[index(y, x, channel)]; }

  GrayImage channel(int c) const;

 private:
  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)) * 3 +
           static_cast<size_t>(c);
  }

  int height_;
  int width_;
  std::vector<double> rgb_;
};

// Binary P5 / P6 with maxval 255; sample v maps to v / 255.
GrayImage parse_pgm(std::string_view bytes);
ColorImage parse_ppm(std::string_view bytes);
GrayImage read_pgm(const std::filesystem::path& path);
ColorImage read_ppm(const std::filesystem::path& path);

std::string encode_pgm(const GrayImage& img);
std::string encode_ppm(const ColorImage& img);

// Averages factor x factor blocks; trailing partial blocks are dropped.
GrayImage downsample(const GrayImage& img, int factor);
ColorImage downsample(const ColorImage& img, int factor);

}  // namespace rose
