#pragma once

#include <string>

#include "enprop/crs.hpp"
#include "enprop/kernels.hpp"

namespace enprop {

/// Writes a in MatrixMarket coordinate format (real, general, 1-based),
/// entries in row-major order, values with 17 significant digits.
void write_matrix_market(const std::string& path, const CrsMatrix<double>& a);

/// Reads a MatrixMarket coordinate file. Entries may appear in any order;
/// duplicate coordinates are summed. Throws std::runtime_error on malformed
/// input, naming the offending line.
CrsMatrix<double> read_matrix_market(const std::string& path);

/// Writes one file per ensemble component, named <prefix>_c<e>.mtx. Every
/// file shares the same sparsity pattern.
template <typename Scalar>
void write_matrix_market_components(const std::string& prefix, const CrsMatrix<Scalar>& a) {
  using ET = EnsembleTraits<Scalar>;
  CrsMatrix<double> part;
  for (int e = 0; e < ET::ensemble_size; ++e) {
    extract_component(a, e, part);
    write_matrix_market(prefix + "_c" + std::to_string(e) + ".mtx", part);
  }
}

}  // namespace enprop
