#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace msgd {

/// Shortest decimal round-trip representation of a double ("%.17g" trimmed),
/// identical across runs for identical bits. NaN prints as "nan".
std::string format_double(double v);

/// Line-oriented CSV writer with deterministic number formatting and "\n"
/// line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& field(const std::string& v);
  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(int v) { return field(static_cast<long>(v)); }
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// Row-major sparse-style dump: header "i,j,value", one row per entry.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& mat);

std::string read_file(const std::filesystem::path& path);

}  // namespace msgd
