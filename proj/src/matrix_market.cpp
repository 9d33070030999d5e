#include "enprop/matrix_market.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace enprop {

namespace {

std::runtime_error parse_error(const std::string& path, int line_no, const std::string& what) {
  return std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

void write_matrix_market(const std::string& path, const CrsMatrix<double>& a) {
  a.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.num_rows << " " << a.num_cols << " " << a.num_entries() << "\n";
  char buf[64];
  for (int row = 0; row < a.num_rows; ++row) {
    for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", row + 1, a.col_entry[k] + 1,
                    a.values[k]);
      out << buf;
    }
  }
  if (!out) throw std::runtime_error("write failed on " + path);
}

CrsMatrix<double> read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw parse_error(path, 1, "empty file");
  ++line_no;
  {
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
        field != "real" || symmetry != "general")
      throw parse_error(path, line_no,
                        "expected header '%%MatrixMarket matrix coordinate real general'");
  }

  int num_rows = 0, num_cols = 0, num_entries = 0;
  bool have_sizes = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '%') continue;
    std::istringstream sizes(line);
    if (!(sizes >> num_rows >> num_cols >> num_entries))
      throw parse_error(path, line_no, "malformed size line");
    have_sizes = true;
    break;
  }
  if (!have_sizes) throw parse_error(path, line_no, "missing size line");
  if (num_rows < 0 || num_cols < 0 || num_entries < 0)
    throw parse_error(path, line_no, "negative size");

  std::vector<std::tuple<int, int, double>> triplets;
  triplets.reserve(num_entries);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    int row, col;
    double value;
    if (!(entry >> row >> col >> value))
      throw parse_error(path, line_no, "malformed entry line");
    if (row < 1 || row > num_rows || col < 1 || col > num_cols)
      throw parse_error(path, line_no, "coordinate out of range");
    triplets.emplace_back(row - 1, col - 1, value);
  }
  if (static_cast<int>(triplets.size()) != num_entries)
    throw parse_error(path, line_no,
                      "entry count mismatch: header declares " + std::to_string(num_entries) +
                          ", file holds " + std::to_string(triplets.size()));
  return crs_from_triplets<double>(num_rows, num_cols, triplets);
}

}  // namespace enprop
