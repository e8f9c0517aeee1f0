#include "rose/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "rose/error.h"
#include "rose/matrix_io.h"

namespace rose {

namespace {

void check_shape(int height, int width, size_t values, size_t per_pixel) {
  if (height < 1 || width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image must be at least 1x1");
  }
  if (values != static_cast<size_t>(height) * static_cast<size_t>(width) * per_pixel) {
    throw Error(ErrorCode::kInvalidArgument, "pixel buffer size does not match shape");
  }
}

void check_range(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "pixel value outside [0, 1]");
    }
  }
}

struct NetpbmHeader {
  int width = 0;
  int height = 0;
  size_t data_offset = 0;
};

// Parses "Px <w> <h> <maxval>" plus comments; exactly one whitespace byte
// separates maxval from the raster.
NetpbmHeader parse_header(std::string_view bytes, std::string_view magic) {
  if (bytes.substr(0, 2) != magic) {
    throw Error(ErrorCode::kParseError,
                "bad magic number, expected " + std::string(magic));
  }
  size_t pos = 2;
  auto next_int = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw Error(ErrorCode::kParseError, "malformed header");
    if (pos - start > 9) throw Error(ErrorCode::kParseError, "header value too large");
    return std::stoi(std::string(bytes.substr(start, pos - start)));
  };
  NetpbmHeader h;
  h.width = next_int();
  h.height = next_int();
  const int maxval = next_int();
  if (h.width < 1 || h.height < 1) {
    throw Error(ErrorCode::kParseError, "image dimensions must be positive");
  }
  if (maxval != 255) {
    throw Error(ErrorCode::kParseError, "only maxval 255 is supported");
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw Error(ErrorCode::kParseError, "missing whitespace before raster");
  }
  h.data_offset = pos + 1;
  return h;
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

GrayImage::GrayImage(int height, int width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  check_shape(height_, width_, pixels_.size(), 1);
  check_range(pixels_);
}

GrayImage::GrayImage(int height, int width, double fill)
    : GrayImage(height, width,
                std::vector<double>(static_cast<size_t>(std::max(height, 0)) *
                                        static_cast<size_t>(std::max(width, 0)),
                                    fill)) {}

ColorImage::ColorImage(int height, int width, std::vector<double> rgb)
    : height_(height), width_(width), rgb_(std::move(rgb)) {
  check_shape(height_, width_, rgb_.size(), 3);
  check_range(rgb_);
}

ColorImage::ColorImage(int height, int width)
    : ColorImage(height, width,
                 std::vector<double>(static_cast<size_t>(std::max(height, 0)) *
                                         static_cast<size_t>(std::max(width, 0)) * 3,
                                     0.0)) {}

GrayImage ColorImage::channel(int c) const {
  GrayImage out(height_, width_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out.at(y, x) = at(y, x, c);
  }
  return out;
}

GrayImage parse_pgm(std::string_view bytes) {
  const NetpbmHeader h = parse_header(bytes, "P5");
  const size_t n = static_cast<size_t>(h.width) * static_cast<size_t>(h.height);
  if (bytes.size() - h.data_offset < n) {
    throw Error(ErrorCode::kParseError, "truncated PGM raster");
  }
  std::vector<double> pixels(n);
  for (size_t i = 0; i < n; ++i) {
    pixels[i] = static_cast<unsigned char>(bytes[h.data_offset + i]) / 255.0;
  }
  return GrayImage(h.height, h.width, std::move(pixels));
}

ColorImage parse_ppm(std::string_view bytes) {
  const NetpbmHeader h = parse_header(bytes, "P6");
  const size_t n = static_cast<size_t>(h.width) * static_cast<size_t>(h.height) * 3;
  if (bytes.size() - h.data_offset < n) {
    throw Error(ErrorCode::kParseError, "truncated PPM raster");
  }
  std::vector<double> rgb(n);
  for (size_t i = 0; i < n; ++i) {
    rgb[i] = static_cast<unsigned char>(bytes[h.data_offset + i]) / 255.0;
  }
  return ColorImage(h.height, h.width, std::move(rgb));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  try {
    return parse_pgm(bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

ColorImage read_ppm(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  try {
    return parse_ppm(bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  for (double v : img.pixels()) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

std::string encode_ppm(const ColorImage& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.push_back(static_cast<char>(to_byte(img.at(y, x, c))));
    }
  }
  return out;
}

GrayImage downsample(const GrayImage& img, int factor) {
  if (factor < 1) throw Error(ErrorCode::kInvalidArgument, "downsample factor must be >= 1");
  if (factor == 1) return img;
  const int h = img.height() / factor;
  const int w = img.width() / factor;
  if (h < 1 || w < 1) throw Error(ErrorCode::kImageTooSmall, "downsample factor too large");
  GrayImage out(h, w);
  const double norm = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) sum += img.at(y * factor + dy, x * factor + dx);
      }
      out.at(y, x) = std::clamp(sum * norm, 0.0, 1.0);
    }
  }
  return out;
}

ColorImage downsample(const ColorImage& img, int factor) {
  if (factor < 1) throw Error(ErrorCode::kInvalidArgument, "downsample factor must be >= 1");
  if (factor == 1) return img;
  const int h = img.height() / factor;
  const int w = img.width() / factor;
  if (h < 1 || w < 1) throw Error(ErrorCode::kImageTooSmall, "downsample factor too large");
  ColorImage out(h, w);
  const double norm = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) sum += img.at(y * factor + dy, x * factor + dx, c);
        }
        out.at(y, x, c) = std::clamp(sum * norm, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace rose
