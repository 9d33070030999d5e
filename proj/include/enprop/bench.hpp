#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "enprop/halo.hpp"
#include "enprop/multigrid.hpp"
#include "enprop/pcg.hpp"
#include "enprop/report.hpp"

namespace enprop {

enum class BenchKernel { spmv, assembly, solve, halo };
enum class EnsembleLayout { commuted, outer };

/// The uncertain-diffusion problem the benchmarks assemble: random-field
/// parameters, the extra PDE terms, and the x-face boundary values.
struct ProblemConfig {
  int mesh_n = 64;
  int num_terms = 5;
  double mean = 1.0;
  double sigma = 0.1;
  double correlation_length = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double bc_x0 = 1.0;
  double bc_x1 = 0.0;
};

struct BenchConfig {
  BenchKernel kernel = BenchKernel::spmv;
  ProblemConfig problem;
  std::vector<int> ensemble_sizes = {1, 2, 4, 8, 16, 32};
  int repetitions = 5;
  std::uint64_t seed = 0;
  EnsembleLayout layout = EnsembleLayout::commuted;
  SolverConfig solver;
  MgOptions multigrid;
  TransportModel transport;
  int ranks = 2;
  ReportFormat format = ReportFormat::csv;
  std::string output_path;
};

struct SpeedupReport {
  std::vector<BenchRecord> records;
  bool gates_passed = true;
};

/// For every requested width s: checks the fused kernel against s scalar
/// runs on the same samples (bitwise for spmv and assembly, 1e-10 relative
/// for solves), then times the scalar path s times sequentially and the
/// fused path once, keeping the best of config.repetitions, and reports
/// Speed-Up = s * mean scalar time / fused time. A failed check yields a
/// row with a gate_failed status and no timings; a solver failure yields an
/// error row and the sweep continues.
SpeedupReport run_bench(const BenchConfig& config);

const char* to_string(BenchKernel kernel);
const char* to_string(EnsembleLayout layout);
const char* to_string(ReportFormat format);
BenchKernel kernel_from_string(const std::string& name);
EnsembleLayout layout_from_string(const std::string& name);
ReportFormat format_from_string(const std::string& name);

/// Flat key = value rendering of the whole benchmark configuration,
/// problem and solver blocks included.
std::string format_config(const BenchConfig& config);

/// Parses the key = value text back onto the defaults; unknown keys are
/// rejected.
BenchConfig parse_config(const std::string& text);

/// File round trip for the problem block alone.
void write_problem_config(const std::string& path, const ProblemConfig& problem);
ProblemConfig read_problem_config(const std::string& path);

}  // namespace enprop
