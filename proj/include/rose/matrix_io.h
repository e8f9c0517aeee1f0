#pragma once

// Plain-text matrix format: a line holding the dimension d followed by d
// lines of d whitespace-separated decimal values. A file may hold several
// such blocks back to back. Numbers are parsed and printed with
// std::from_chars/std::to_chars, so the format is locale-independent and
// printing round-trips every double exactly.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rose {

std::vector<Eigen::MatrixXd> parse_matrices(std::string_view text);
Eigen::MatrixXd parse_matrix(std::string_view text);

std::string format_matrix(const Eigen::MatrixXd& m);
std::string format_matrices(const std::vector<Eigen::MatrixXd>& ms);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view token);

std::vector<Eigen::MatrixXd> read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path,
                       const std::vector<Eigen::MatrixXd>& ms);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace rose
