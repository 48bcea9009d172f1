#include "msgd/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace msgd {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  // Shortest representation that round-trips.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << (i ? "," : "") << header[i];
  }
  out_ << "\n";
}

CsvWriter& CsvWriter::field(const std::string& v) {
  if (in_row_) out_ << ",";
  out_ << v;
  ++in_row_;
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }

CsvWriter& CsvWriter::field(long v) { return field(std::to_string(v)); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv row has wrong arity");
  out_ << "\n";
  in_row_ = 0;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& mat) {
  CsvWriter csv(path, {"i", "j", "value"});
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      csv.field(static_cast<long>(i)).field(static_cast<long>(j)).field(mat(i, j));
      csv.end_row();
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace msgd
