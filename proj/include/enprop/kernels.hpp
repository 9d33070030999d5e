#pragma once

#include <stdexcept>
#include <vector>

#include "enprop/crs.hpp"
#include "enprop/ensemble.hpp"

namespace enprop {

/// z = A*x. One definition serves both the scalar and the ensemble case:
/// instantiated with an ensemble scalar, the innermost work per stored entry
/// is a componentwise multiply-add across the ensemble, with the matrix graph
/// traversed once for all components.
template <typename Scalar>
void spmv(const CrsMatrix<Scalar>& a, const DenseVector<Scalar>& x, DenseVector<Scalar>& z) {
  if (static_cast<int>(x.size()) != a.num_cols)
    throw std::invalid_argument("spmv: x length must equal num_cols");
  z.resize(a.num_rows);
  for (int row = 0; row < a.num_rows; ++row) {
    Scalar sum = 0.0;
    for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k)
      sum += a.values[k] * x[a.col_entry[k]];
    z[row] = sum;
  }
}

template <typename Scalar>
DenseVector<Scalar> spmv(const CrsMatrix<Scalar>& a, const DenseVector<Scalar>& x) {
  DenseVector<Scalar> z;
  spmv(a, x, z);
  return z;
}

/// z = A*x for the sample-major ensemble layout: an outer loop over
/// components, each sweeping the shared graph once against its own value
/// block. x and z hold ensemble_size stacked vectors in the same layout.
inline void spmv_outer(const OuterEnsembleMatrix& a, const DenseVector<double>& x,
                       DenseVector<double>& z) {
  const int nnz = a.num_entries();
  const long long cols = static_cast<long long>(a.num_cols);
  if (static_cast<long long>(x.size()) != cols * a.ensemble_size)
    throw std::invalid_argument("spmv_outer: x length must equal num_cols*ensemble_size");
  z.resize(static_cast<std::size_t>(a.num_rows) * a.ensemble_size);
  for (int e = 0; e < a.ensemble_size; ++e) {
    const double* values = a.values.data() + static_cast<std::size_t>(e) * nnz;
    const double* xe = x.data() + static_cast<std::size_t>(e) * a.num_cols;
    double* ze = z.data() + static_cast<std::size_t>(e) * a.num_rows;
    for (int row = 0; row < a.num_rows; ++row) {
      double sum = 0.0;
      for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k)
        sum += values[k] * xe[a.col_entry[k]];
      ze[row] = sum;
    }
  }
}

/// Coupled inner product: componentwise products accumulated over all rows,
/// then summed across components into one scalar. All ensemble components
/// therefore share a single inner product value, which is what couples their
/// iteration counts inside Krylov solvers.
template <typename Scalar>
double dot(const DenseVector<Scalar>& u, const DenseVector<Scalar>& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("dot: length mismatch");
  Scalar acc = 0.0;
  for (std::size_t row = 0; row < u.size(); ++row) acc += u[row] * v[row];
  return reduce_sum(acc);
}

template <typename Scalar>
double norm2(const DenseVector<Scalar>& u) {
  return std::sqrt(dot(u, u));
}

/// y = alpha*x + beta*y. Coefficients may be plain doubles or ensembles with
/// per-component values.
template <typename Coef, typename Scalar>
void axpby(const Coef& alpha, const DenseVector<Scalar>& x, const Coef& beta,
           DenseVector<Scalar>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("axpby: length mismatch");
  for (std::size_t row = 0; row < x.size(); ++row)
    y[row] = alpha * x[row] + beta * y[row];
}

// Conversions between per-sample scalar data and the two ensemble layouts.
// Packing requires every component to carry the same graph; differing graphs
// are rejected rather than merged.

namespace detail {
inline void require_same_graph(const std::vector<int>& row_map_a,
                               const std::vector<int>& col_entry_a,
                               const std::vector<int>& row_map_b,
                               const std::vector<int>& col_entry_b,
                               const char* what) {
  if (row_map_a != row_map_b || col_entry_a != col_entry_b)
    throw std::invalid_argument(std::string(what) + ": component graphs differ");
}
}  // namespace detail

template <int S>
CrsMatrix<Ensemble<S>> pack_matrix(const std::vector<CrsMatrix<double>>& parts) {
  if (static_cast<int>(parts.size()) != S)
    throw std::invalid_argument("pack_matrix: wrong number of components");
  CrsMatrix<Ensemble<S>> a;
  a.num_rows = parts[0].num_rows;
  a.num_cols = parts[0].num_cols;
  a.row_map = parts[0].row_map;
  a.col_entry = parts[0].col_entry;
  for (int e = 1; e < S; ++e) {
    if (parts[e].num_rows != a.num_rows || parts[e].num_cols != a.num_cols)
      throw std::invalid_argument("pack_matrix: component dimensions differ");
    detail::require_same_graph(a.row_map, a.col_entry, parts[e].row_map, parts[e].col_entry,
                               "pack_matrix");
  }
  a.values.resize(a.col_entry.size());
  for (std::size_t k = 0; k < a.values.size(); ++k)
    for (int e = 0; e < S; ++e) a.values[k][e] = parts[e].values[k];
  return a;
}

/// Copies component e of an ensemble matrix into a scalar matrix sharing the
/// same graph. With Scalar = double only component 0 exists.
template <typename Scalar>
void extract_component(const CrsMatrix<Scalar>& a, int e, CrsMatrix<double>& out) {
  using ET = EnsembleTraits<Scalar>;
  if (e < 0 || e >= ET::ensemble_size)
    throw std::invalid_argument("extract_component: component out of range");
  out.num_rows = a.num_rows;
  out.num_cols = a.num_cols;
  out.row_map = a.row_map;
  out.col_entry = a.col_entry;
  out.values.resize(a.values.size());
  for (std::size_t k = 0; k < a.values.size(); ++k)
    out.values[k] = ET::coeff(a.values[k], e);
}

template <typename Scalar>
CrsMatrix<double> extract_component(const CrsMatrix<Scalar>& a, int e) {
  CrsMatrix<double> out;
  extract_component(a, e, out);
  return out;
}

template <typename Scalar>
void extract_component(const DenseVector<Scalar>& x, int e, DenseVector<double>& out) {
  using ET = EnsembleTraits<Scalar>;
  if (e < 0 || e >= ET::ensemble_size)
    throw std::invalid_argument("extract_component: component out of range");
  out.resize(x.size());
  for (std::size_t row = 0; row < x.size(); ++row) out[row] = ET::coeff(x[row], e);
}

template <typename Scalar>
DenseVector<double> extract_component(const DenseVector<Scalar>& x, int e) {
  DenseVector<double> out;
  extract_component(x, e, out);
  return out;
}

template <int S>
std::vector<CrsMatrix<double>> unpack_matrix(const CrsMatrix<Ensemble<S>>& a) {
  std::vector<CrsMatrix<double>> parts(S);
  for (int e = 0; e < S; ++e) extract_component(a, e, parts[e]);
  return parts;
}

template <int S>
DenseVector<Ensemble<S>> pack_vector(const std::vector<DenseVector<double>>& parts) {
  if (static_cast<int>(parts.size()) != S)
    throw std::invalid_argument("pack_vector: wrong number of components");
  for (int e = 1; e < S; ++e)
    if (parts[e].size() != parts[0].size())
      throw std::invalid_argument("pack_vector: component lengths differ");
  DenseVector<Ensemble<S>> x(parts[0].size());
  for (std::size_t row = 0; row < x.size(); ++row)
    for (int e = 0; e < S; ++e) x[row][e] = parts[e][row];
  return x;
}

template <int S>
std::vector<DenseVector<double>> unpack_vector(const DenseVector<Ensemble<S>>& x) {
  std::vector<DenseVector<double>> parts(S);
  for (int e = 0; e < S; ++e) extract_component(x, e, parts[e]);
  return parts;
}

template <int S>
OuterEnsembleMatrix matrix_to_outer(const CrsMatrix<Ensemble<S>>& a) {
  OuterEnsembleMatrix out;
  out.num_rows = a.num_rows;
  out.num_cols = a.num_cols;
  out.ensemble_size = S;
  out.row_map = a.row_map;
  out.col_entry = a.col_entry;
  const std::size_t nnz = a.values.size();
  out.values.resize(nnz * S);
  for (int e = 0; e < S; ++e)
    for (std::size_t k = 0; k < nnz; ++k) out.values[e * nnz + k] = a.values[k][e];
  return out;
}

template <int S>
CrsMatrix<Ensemble<S>> matrix_from_outer(const OuterEnsembleMatrix& a) {
  if (a.ensemble_size != S)
    throw std::invalid_argument("matrix_from_outer: ensemble size mismatch");
  CrsMatrix<Ensemble<S>> out;
  out.num_rows = a.num_rows;
  out.num_cols = a.num_cols;
  out.row_map = a.row_map;
  out.col_entry = a.col_entry;
  const std::size_t nnz = a.col_entry.size();
  out.values.resize(nnz);
  for (int e = 0; e < S; ++e)
    for (std::size_t k = 0; k < nnz; ++k) out.values[k][e] = a.values[e * nnz + k];
  return out;
}

/// Stacks the components of x as ensemble_size consecutive scalar vectors
/// (the vector layout matching OuterEnsembleMatrix).
template <int S>
DenseVector<double> vector_to_outer(const DenseVector<Ensemble<S>>& x) {
  DenseVector<double> out(x.size() * S);
  for (int e = 0; e < S; ++e)
    for (std::size_t row = 0; row < x.size(); ++row) out[e * x.size() + row] = x[row][e];
  return out;
}

template <int S>
DenseVector<Ensemble<S>> vector_from_outer(const DenseVector<double>& x) {
  if (x.size() % S != 0)
    throw std::invalid_argument("vector_from_outer: length not a multiple of ensemble size");
  const std::size_t n = x.size() / S;
  DenseVector<Ensemble<S>> out(n);
  for (int e = 0; e < S; ++e)
    for (std::size_t row = 0; row < n; ++row) out[row][e] = x[e * n + row];
  return out;
}

}  // namespace enprop
