#include "enprop/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace enprop {

namespace {

constexpr const char* kCsvHeader = "kernel,layout,mesh_n,ensemble_size,time_ms,gflops,speedup,iterations,status";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string csv_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string csv_cell(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string();
}

// Cells are comma-separated without quoting, so free-text fields must not
// introduce separators of their own.
std::string sanitize(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

std::string json_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\u%04x", c);
      out += buf;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string json_value(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("null");
}

std::string json_value(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string("null");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::optional<double> parse_optional_double(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return std::strtod(field.c_str(), nullptr);
}

std::optional<int> parse_optional_int(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return std::stoi(field);
}

}  // namespace

std::string format_report_csv(const std::vector<BenchRecord>& records) {
  std::string out = kCsvHeader;
  out.push_back('\n');
  for (const auto& r : records) {
    out += sanitize(r.kernel);
    out.push_back(',');
    out += sanitize(r.layout);
    out.push_back(',');
    out += std::to_string(r.mesh_n);
    out.push_back(',');
    out += std::to_string(r.ensemble_size);
    out.push_back(',');
    out += csv_cell(r.time_ms);
    out.push_back(',');
    out += csv_cell(r.gflops);
    out.push_back(',');
    out += csv_cell(r.speedup);
    out.push_back(',');
    out += csv_cell(r.iterations);
    out.push_back(',');
    out += sanitize(r.status);
    out.push_back('\n');
  }
  return out;
}

std::string format_report_json(const std::vector<BenchRecord>& records) {
  std::ostringstream out;
  out << "[\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << "  {\"kernel\": \"" << json_escape(r.kernel) << "\", \"layout\": \""
        << json_escape(r.layout) << "\", \"mesh_n\": " << r.mesh_n
        << ", \"ensemble_size\": " << r.ensemble_size << ", \"time_ms\": " << json_value(r.time_ms)
        << ", \"gflops\": " << json_value(r.gflops) << ", \"speedup\": " << json_value(r.speedup)
        << ", \"iterations\": " << json_value(r.iterations) << ", \"status\": \""
        << json_escape(r.status) << "\"}";
    if (i + 1 < records.size()) out << ',';
    out << '\n';
  }
  out << "]\n";
  return out.str();
}

void emit_report(const std::vector<BenchRecord>& records, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << (format == ReportFormat::csv ? format_report_csv(records) : format_report_json(records));
  if (!out) throw std::runtime_error("write failed on " + path);
}

std::vector<BenchRecord> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::invalid_argument("report csv: missing or unexpected header");
  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 9)
      throw std::invalid_argument("report csv: expected 9 fields, got " +
                                  std::to_string(fields.size()));
    BenchRecord r;
    r.kernel = fields[0];
    r.layout = fields[1];
    r.mesh_n = std::stoi(fields[2]);
    r.ensemble_size = std::stoi(fields[3]);
    r.time_ms = parse_optional_double(fields[4]);
    r.gflops = parse_optional_double(fields[5]);
    r.speedup = parse_optional_double(fields[6]);
    r.iterations = parse_optional_int(fields[7]);
    r.status = fields[8];
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace enprop
