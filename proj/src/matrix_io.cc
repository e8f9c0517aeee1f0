#include "rose/matrix_io.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rose/error.h"

namespace rose {

namespace {

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  // Next whitespace-delimited token, or empty at end of input.
  std::string_view next() {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    const size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  int line() const { return line_; }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

double parse_double(std::string_view token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kParseError,
                "not a decimal number: '" + std::string(token) + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<Eigen::MatrixXd> parse_matrices(std::string_view text) {
  Tokenizer tok(text);
  std::vector<Eigen::MatrixXd> out;
  for (std::string_view head = tok.next(); !head.empty(); head = tok.next()) {
    int d = 0;
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), d);
    if (ec != std::errc() || ptr != head.data() + head.size() || d <= 0) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(tok.line()) +
                      ": expected a positive dimension, got '" +
                      std::string(head) + "'");
    }
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        std::string_view cell = tok.next();
        if (cell.empty()) {
          throw Error(ErrorCode::kParseError, "truncated matrix block");
        }
        m(i, j) = parse_double(cell);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

Eigen::MatrixXd parse_matrix(std::string_view text) {
  auto ms = parse_matrices(text);
  if (ms.size() != 1) {
    throw Error(ErrorCode::kParseError,
                "expected exactly one matrix, found " + std::to_string(ms.size()));
  }
  return std::move(ms.front());
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out = std::to_string(m.rows()) + "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string format_matrices(const std::vector<Eigen::MatrixXd>& ms) {
  std::string out;
  for (const auto& m : ms) out += format_matrix(m);
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kFileNotFound, "cannot write " + path.string());
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::vector<Eigen::MatrixXd> read_matrix_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_matrices(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

void write_matrix_file(const std::filesystem::path& path,
                       const std::vector<Eigen::MatrixXd>& ms) {
  write_text_file(path, format_matrices(ms));
}

}  // namespace rose
