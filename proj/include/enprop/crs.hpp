#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enprop/ensemble.hpp"

namespace enprop {

template <typename Scalar>
using DenseVector = std::vector<Scalar>;

/// Sparsity pattern in compressed row form: row_map has num_rows+1 offsets
/// into col_entry, and column indices are strictly increasing within a row.
struct Graph {
  int num_rows = 0;
  int num_cols = 0;
  std::vector<int> row_map;
  std::vector<int> col_entry;

  int num_entries() const { return static_cast<int>(col_entry.size()); }
};

/// Compressed row sparse matrix. The graph is stored once regardless of the
/// scalar type; instantiating with an ensemble scalar keeps one copy of the
/// structure shared by all ensemble components, with the component values of
/// each stored entry contiguous.
template <typename Scalar>
struct CrsMatrix {
  int num_rows = 0;
  int num_cols = 0;
  std::vector<int> row_map;
  std::vector<int> col_entry;
  std::vector<Scalar> values;

  int num_entries() const { return static_cast<int>(col_entry.size()); }

  Graph graph() const { return Graph{num_rows, num_cols, row_map, col_entry}; }

  /// Throws std::invalid_argument when the compressed row invariants are
  /// violated (offsets not monotone, columns out of range or not strictly
  /// increasing within a row, array lengths inconsistent).
  void validate() const {
    if (num_rows < 0 || num_cols < 0)
      throw std::invalid_argument("CrsMatrix: negative dimension");
    if (static_cast<int>(row_map.size()) != num_rows + 1)
      throw std::invalid_argument("CrsMatrix: row_map size must be num_rows+1");
    if (row_map.front() != 0)
      throw std::invalid_argument("CrsMatrix: row_map must start at 0");
    if (row_map.back() != num_entries())
      throw std::invalid_argument("CrsMatrix: row_map must end at the entry count");
    if (values.size() != col_entry.size())
      throw std::invalid_argument("CrsMatrix: values and col_entry length mismatch");
    for (int row = 0; row < num_rows; ++row) {
      if (row_map[row] > row_map[row + 1])
        throw std::invalid_argument("CrsMatrix: row_map must be non-decreasing");
      for (int k = row_map[row]; k < row_map[row + 1]; ++k) {
        if (col_entry[k] < 0 || col_entry[k] >= num_cols)
          throw std::invalid_argument("CrsMatrix: column index out of range");
        if (k > row_map[row] && col_entry[k] <= col_entry[k - 1])
          throw std::invalid_argument("CrsMatrix: columns must be strictly increasing per row");
      }
    }
  }
};

/// Builds a matrix from (row, col, value) triplets. Triplets may arrive in
/// any order; duplicates of the same coordinate are summed in input order.
template <typename Scalar>
CrsMatrix<Scalar> crs_from_triplets(int num_rows, int num_cols,
                                    const std::vector<std::tuple<int, int, Scalar>>& triplets) {
  if (num_rows < 0 || num_cols < 0)
    throw std::invalid_argument("crs_from_triplets: negative dimension");
  std::map<std::pair<int, int>, Scalar> entries;
  for (const auto& [row, col, value] : triplets) {
    if (row < 0 || row >= num_rows || col < 0 || col >= num_cols)
      throw std::invalid_argument("crs_from_triplets: coordinate out of range");
    auto [it, inserted] = entries.try_emplace({row, col}, value);
    if (!inserted) it->second += value;
  }
  CrsMatrix<Scalar> a;
  a.num_rows = num_rows;
  a.num_cols = num_cols;
  a.row_map.assign(num_rows + 1, 0);
  a.col_entry.reserve(entries.size());
  a.values.reserve(entries.size());
  for (const auto& [coord, value] : entries) {
    ++a.row_map[coord.first + 1];
    a.col_entry.push_back(coord.second);
    a.values.push_back(value);
  }
  for (int row = 0; row < num_rows; ++row) a.row_map[row + 1] += a.row_map[row];
  return a;
}

template <typename Scalar>
CrsMatrix<Scalar> crs_identity(int n) {
  CrsMatrix<Scalar> a;
  a.num_rows = a.num_cols = n;
  a.row_map.resize(n + 1);
  a.col_entry.resize(n);
  a.values.assign(n, Scalar(1.0));
  for (int row = 0; row <= n; ++row) a.row_map[row] = row;
  for (int row = 0; row < n; ++row) a.col_entry[row] = row;
  return a;
}

/// Index of the stored entry (row, col), or -1 when the graph has no such
/// entry. Columns are sorted within the row, so this is a binary search.
inline int find_entry(const std::vector<int>& row_map, const std::vector<int>& col_entry,
                      int row, int col) {
  auto first = col_entry.begin() + row_map[row];
  auto last = col_entry.begin() + row_map[row + 1];
  auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return -1;
  return static_cast<int>(it - col_entry.begin());
}

template <typename Scalar>
DenseVector<Scalar> diagonal_of(const CrsMatrix<Scalar>& a) {
  if (a.num_rows != a.num_cols)
    throw std::invalid_argument("diagonal_of: matrix must be square");
  DenseVector<Scalar> d(a.num_rows, Scalar(0.0));
  for (int row = 0; row < a.num_rows; ++row) {
    int k = find_entry(a.row_map, a.col_entry, row, row);
    if (k >= 0) d[row] = a.values[k];
  }
  return d;
}

/// Ensemble matrix in the sample-major layout: all entry values of component
/// 0 first, then component 1, and so on. Block e occupies
/// values[e*nnz, (e+1)*nnz). The graph is shared across components.
struct OuterEnsembleMatrix {
  int num_rows = 0;
  int num_cols = 0;
  int ensemble_size = 0;
  std::vector<int> row_map;
  std::vector<int> col_entry;
  std::vector<double> values;

  int num_entries() const { return static_cast<int>(col_entry.size()); }
};

}  // namespace enprop
