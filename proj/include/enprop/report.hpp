#pragma once

#include <optional>
#include <string>
#include <vector>

namespace enprop {

/// One benchmark measurement row. Fields that do not apply to a kernel
/// (gflops outside spmv, iterations outside solve, speedup on scalar
/// reference rows) stay empty and serialize as empty CSV cells or JSON null.
struct BenchRecord {
  std::string kernel;
  std::string layout;
  int mesh_n = 0;
  int ensemble_size = 1;
  std::optional<double> time_ms;
  std::optional<double> gflops;
  std::optional<double> speedup;
  std::optional<int> iterations;
  std::string status = "ok";

  bool operator==(const BenchRecord&) const = default;
};

enum class ReportFormat { csv, json };

/// Header plus one line per record; floats carry 6 significant digits.
std::string format_report_csv(const std::vector<BenchRecord>& records);

/// The same records as a JSON array of flat objects.
std::string format_report_json(const std::vector<BenchRecord>& records);

/// Writes the formatted report to path.
void emit_report(const std::vector<BenchRecord>& records, ReportFormat format,
                 const std::string& path);

/// Inverse of format_report_csv, for report post-processing.
std::vector<BenchRecord> parse_report_csv(const std::string& text);

}  // namespace enprop
