#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gesp {

/// Shortest round-trip decimal form of a double (deterministic across runs,
/// so emitted artifacts are byte-stable).
std::string format_double(double value);

/// CSV serialization: one header line, then rows formatted with
/// format_double. `columns` must match the matrix column count.
std::string matrix_to_csv(const std::vector<std::string>& columns, const Eigen::MatrixXd& values);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace gesp
