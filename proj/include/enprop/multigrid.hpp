#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "enprop/crs.hpp"
#include "enprop/ensemble.hpp"
#include "enprop/kernels.hpp"

namespace enprop {

struct MgOptions {
  int coarse_row_threshold = 500;
  int chebyshev_degree = 2;
  double eigenvalue_ratio = 30.0;
  double eigenvalue_boost = 1.1;
  int power_iterations = 40;
};

/// Assignment of every fine row to one aggregate (a coarse degree of
/// freedom). Aggregate ids are dense, 0..num_aggregates-1.
struct Aggregation {
  int num_aggregates = 0;
  std::vector<int> aggregate_of;
};

/// Greedy root aggregation over a symmetric sparsity pattern. Rows are
/// visited in ascending order; an unaggregated row with unaggregated
/// neighbors becomes a root and absorbs them; a leftover row whose
/// neighbors are all taken joins the neighboring aggregate with the
/// smallest id; an isolated row forms a singleton. Deterministic.
Aggregation aggregate_graph(const Graph& g);

/// Edge graph of the stored entries whose value is nonzero in at least one
/// ensemble component, symmetrized with the transpose. Rows whose stored
/// couplings are all zero (eliminated constraints) come out isolated.
template <typename Scalar>
Graph connection_graph(const CrsMatrix<Scalar>& a) {
  using ET = EnsembleTraits<Scalar>;
  std::vector<char> keep(a.col_entry.size(), 0);
  for (int row = 0; row < a.num_rows; ++row) {
    for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k) {
      if (keep[k]) continue;
      bool nonzero = false;
      for (int e = 0; e < ET::ensemble_size && !nonzero; ++e)
        nonzero = ET::coeff(a.values[k], e) != 0.0;
      if (!nonzero) continue;
      keep[k] = 1;
      const int col = a.col_entry[k];
      if (col == row || col >= a.num_rows) continue;
      const auto begin = a.col_entry.begin() + a.row_map[col];
      const auto end = a.col_entry.begin() + a.row_map[col + 1];
      const auto it = std::lower_bound(begin, end, row);
      if (it != end && *it == row)
        keep[a.row_map[col] + (it - begin)] = 1;
    }
  }
  Graph g;
  g.num_rows = a.num_rows;
  g.num_cols = a.num_cols;
  g.row_map.assign(a.num_rows + 1, 0);
  for (int row = 0; row < a.num_rows; ++row) {
    int count = 0;
    for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k) count += keep[k];
    g.row_map[row + 1] = g.row_map[row] + count;
  }
  g.col_entry.reserve(g.row_map.back());
  for (int row = 0; row < a.num_rows; ++row)
    for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k)
      if (keep[k]) g.col_entry.push_back(a.col_entry[k]);
  return g;
}

/// Piecewise-constant prolongator: P(i, aggregate_of[i]) = 1.
template <typename Scalar>
CrsMatrix<Scalar> prolongator_from(const Aggregation& agg) {
  CrsMatrix<Scalar> p;
  p.num_rows = static_cast<int>(agg.aggregate_of.size());
  p.num_cols = agg.num_aggregates;
  p.row_map.resize(p.num_rows + 1);
  p.col_entry.resize(p.num_rows);
  p.values.assign(p.num_rows, Scalar(1.0));
  for (int i = 0; i <= p.num_rows; ++i) p.row_map[i] = i;
  for (int i = 0; i < p.num_rows; ++i) p.col_entry[i] = agg.aggregate_of[i];
  return p;
}

template <typename Scalar>
CrsMatrix<Scalar> transpose(const CrsMatrix<Scalar>& a) {
  CrsMatrix<Scalar> t;
  t.num_rows = a.num_cols;
  t.num_cols = a.num_rows;
  t.row_map.assign(t.num_rows + 1, 0);
  for (int col : a.col_entry) ++t.row_map[col + 1];
  for (int i = 0; i < t.num_rows; ++i) t.row_map[i + 1] += t.row_map[i];
  t.col_entry.resize(a.col_entry.size());
  t.values.resize(a.values.size());
  std::vector<int> at(t.row_map.begin(), t.row_map.end() - 1);
  for (int row = 0; row < a.num_rows; ++row)
    for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k) {
      int pos = at[a.col_entry[k]]++;
      t.col_entry[pos] = row;
      t.values[pos] = a.values[k];
    }
  return t;
}

/// Galerkin coarse operator Pᵀ A P for the piecewise-constant P of an
/// aggregation: coarse entry (I, J) sums A(i, j) over fine rows i in
/// aggregate I and columns j in aggregate J. Accumulation order is fixed
/// (fine rows ascending within an aggregate, entries ascending within a
/// row), keeping the product deterministic.
template <typename Scalar>
CrsMatrix<Scalar> galerkin_coarse(const CrsMatrix<Scalar>& a, const Aggregation& agg) {
  const int nc = agg.num_aggregates;
  if (a.num_rows != a.num_cols || a.num_rows != static_cast<int>(agg.aggregate_of.size()))
    throw std::invalid_argument("galerkin_coarse: aggregation does not match matrix");

  // Fine rows grouped by aggregate, preserving ascending row order.
  std::vector<int> group_map(nc + 1, 0), group_rows(a.num_rows);
  for (int i = 0; i < a.num_rows; ++i) ++group_map[agg.aggregate_of[i] + 1];
  for (int g = 0; g < nc; ++g) group_map[g + 1] += group_map[g];
  {
    std::vector<int> at(group_map.begin(), group_map.end() - 1);
    for (int i = 0; i < a.num_rows; ++i) group_rows[at[agg.aggregate_of[i]]++] = i;
  }

  CrsMatrix<Scalar> c;
  c.num_rows = c.num_cols = nc;
  c.row_map.assign(nc + 1, 0);

  std::vector<Scalar> accum(nc, Scalar(0.0));
  std::vector<int> touched;
  std::vector<char> seen(nc, 0);
  touched.reserve(64);

  for (int big = 0; big < nc; ++big) {
    touched.clear();
    for (int idx = group_map[big]; idx < group_map[big + 1]; ++idx) {
      const int i = group_rows[idx];
      for (int k = a.row_map[i]; k < a.row_map[i + 1]; ++k) {
        const int cj = agg.aggregate_of[a.col_entry[k]];
        if (!seen[cj]) {
          seen[cj] = 1;
          touched.push_back(cj);
          accum[cj] = a.values[k];
        } else {
          accum[cj] += a.values[k];
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int cj : touched) {
      c.col_entry.push_back(cj);
      c.values.push_back(accum[cj]);
      seen[cj] = 0;
    }
    c.row_map[big + 1] = static_cast<int>(c.col_entry.size());
  }
  return c;
}

/// Largest eigenvalue of D⁻¹A, estimated per ensemble component: the stated
/// number of power iterations from the all-ones vector, each component
/// normalized by its own max-abs so the estimates stay decoupled, finished
/// with a per-component Rayleigh quotient. The default iteration count is
/// sized for operators with eliminated boundary rows, which pin the early
/// Rayleigh quotients near one; an undershot estimate makes the Chebyshev
/// window miss the top of the spectrum and the smoother amplify it.
template <typename Scalar>
Scalar power_lambda_max(const CrsMatrix<Scalar>& a, int iterations = 40) {
  using ET = EnsembleTraits<Scalar>;
  if (a.num_rows != a.num_cols)
    throw std::invalid_argument("power_lambda_max: matrix must be square");
  if (a.num_rows == 0) throw std::invalid_argument("power_lambda_max: empty matrix");
  DenseVector<Scalar> diag = diagonal_of(a);
  for (const Scalar& d : diag)
    for (int e = 0; e < ET::ensemble_size; ++e)
      if (ET::coeff(d, e) == 0.0)
        throw std::domain_error("power_lambda_max: zero diagonal entry");

  DenseVector<Scalar> v(a.num_rows, Scalar(1.0)), w;
  for (int it = 0; it < iterations; ++it) {
    spmv(a, v, w);
    for (int row = 0; row < a.num_rows; ++row) w[row] /= diag[row];
    if (it + 1 == iterations) {
      Scalar num = 0.0, den = 0.0;
      for (int row = 0; row < a.num_rows; ++row) {
        num += v[row] * w[row];
        den += v[row] * v[row];
      }
      return num / den;
    }
    using std::abs;
    using std::max;
    Scalar scale = 0.0;
    for (int row = 0; row < a.num_rows; ++row) scale = max(scale, abs(w[row]));
    for (int e = 0; e < ET::ensemble_size; ++e)
      if (ET::coeff(scale, e) == 0.0)
        throw std::domain_error("power_lambda_max: iteration collapsed to zero");
    for (int row = 0; row < a.num_rows; ++row) v[row] = w[row] / scale;
  }
  // iterations == 0: spectrum of D^-1 A is centered near 1 for the intended
  // operators; callers always request at least one iteration in practice.
  return Scalar(1.0);
}

/// Degree and per-component spectral target of one level's smoother.
/// The smoothed interval is [lambda_max/ratio, boost*lambda_max].
template <typename Scalar>
struct ChebyshevParams {
  int degree = 2;
  Scalar lambda_max = 1.0;
  double eigenvalue_ratio = 30.0;
  double eigenvalue_boost = 1.1;
};

/// One smoother application: the degree-d Chebyshev polynomial in D⁻¹A via
/// the standard three-term recurrence, updating x in place toward A x = b.
/// All recurrence coefficients are per-component scalars, so each ensemble
/// component is smoothed by the polynomial for its own spectrum.
template <typename Scalar>
void chebyshev_apply(const CrsMatrix<Scalar>& a, const DenseVector<Scalar>& diag,
                     const ChebyshevParams<Scalar>& params, const DenseVector<Scalar>& b,
                     DenseVector<Scalar>& x) {
  const int n = a.num_rows;
  const Scalar lambda_top = params.lambda_max * params.eigenvalue_boost;
  const Scalar lambda_bottom = params.lambda_max / params.eigenvalue_ratio;
  const Scalar theta = (lambda_top + lambda_bottom) * 0.5;
  const Scalar delta = (lambda_top - lambda_bottom) * 0.5;
  const Scalar sigma = theta / delta;
  Scalar rho = 1.0 / sigma;

  DenseVector<Scalar> r(n), p(n), tmp;
  spmv(a, x, tmp);
  for (int row = 0; row < n; ++row) r[row] = b[row] - tmp[row];
  for (int row = 0; row < n; ++row) p[row] = (r[row] / diag[row]) / theta;
  for (int row = 0; row < n; ++row) x[row] += p[row];

  for (int k = 2; k <= params.degree; ++k) {
    spmv(a, p, tmp);
    for (int row = 0; row < n; ++row) r[row] -= tmp[row];
    const Scalar rho_next = 1.0 / (2.0 * sigma - rho);
    const Scalar p_coeff = rho_next * rho;
    const Scalar z_coeff = 2.0 * rho_next / delta;
    for (int row = 0; row < n; ++row)
      p[row] = p_coeff * p[row] + z_coeff * (r[row] / diag[row]);
    for (int row = 0; row < n; ++row) x[row] += p[row];
    rho = rho_next;
  }
}

/// Dense LU with partial pivoting, factored once per ensemble component so
/// each component is solved against its own coarse matrix.
template <typename Scalar>
class DenseLuSolver {
  static constexpr int kComponents = EnsembleTraits<Scalar>::ensemble_size;

 public:
  explicit DenseLuSolver(const CrsMatrix<Scalar>& a) : n_(a.num_rows) {
    using ET = EnsembleTraits<Scalar>;
    if (a.num_rows != a.num_cols)
      throw std::invalid_argument("DenseLuSolver: matrix must be square");
    lu_.assign(static_cast<std::size_t>(kComponents) * n_ * n_, 0.0);
    pivot_.assign(static_cast<std::size_t>(kComponents) * n_, 0);
    for (int e = 0; e < kComponents; ++e) {
      double* lu = lu_.data() + static_cast<std::size_t>(e) * n_ * n_;
      int* piv = pivot_.data() + static_cast<std::size_t>(e) * n_;
      for (int row = 0; row < n_; ++row)
        for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k)
          lu[row * n_ + a.col_entry[k]] = ET::coeff(a.values[k], e);
      factor(lu, piv);
    }
  }

  int size() const { return n_; }

  void solve(const DenseVector<Scalar>& b, DenseVector<Scalar>& x) const {
    using ET = EnsembleTraits<Scalar>;
    if (static_cast<int>(b.size()) != n_)
      throw std::invalid_argument("DenseLuSolver: right-hand side length mismatch");
    x.resize(n_);
    std::vector<double> y(n_);
    for (int e = 0; e < kComponents; ++e) {
      const double* lu = lu_.data() + static_cast<std::size_t>(e) * n_ * n_;
      const int* piv = pivot_.data() + static_cast<std::size_t>(e) * n_;
      for (int row = 0; row < n_; ++row) y[row] = ET::coeff(b[row], e);
      for (int k = 0; k < n_; ++k)
        if (piv[k] != k) std::swap(y[k], y[piv[k]]);
      for (int row = 1; row < n_; ++row) {
        double acc = y[row];
        for (int col = 0; col < row; ++col) acc -= lu[row * n_ + col] * y[col];
        y[row] = acc;
      }
      for (int row = n_ - 1; row >= 0; --row) {
        double acc = y[row];
        for (int col = row + 1; col < n_; ++col) acc -= lu[row * n_ + col] * y[col];
        y[row] = acc / lu[row * n_ + row];
      }
      for (int row = 0; row < n_; ++row) ET::coeff(x[row], e) = y[row];
    }
  }

 private:
  void factor(double* lu, int* piv) {
    for (int k = 0; k < n_; ++k) {
      int pivot_row = k;
      double best = std::fabs(lu[k * n_ + k]);
      for (int row = k + 1; row < n_; ++row) {
        double cand = std::fabs(lu[row * n_ + k]);
        if (cand > best) {
          best = cand;
          pivot_row = row;
        }
      }
      if (best == 0.0) throw std::runtime_error("DenseLuSolver: singular matrix");
      piv[k] = pivot_row;
      if (pivot_row != k)
        for (int col = 0; col < n_; ++col) std::swap(lu[k * n_ + col], lu[pivot_row * n_ + col]);
      const double inv_pivot = 1.0 / lu[k * n_ + k];
      for (int row = k + 1; row < n_; ++row) {
        const double mult = lu[row * n_ + k] * inv_pivot;
        lu[row * n_ + k] = mult;
        for (int col = k + 1; col < n_; ++col) lu[row * n_ + col] -= mult * lu[k * n_ + col];
      }
    }
  }

  int n_;
  std::vector<double> lu_;
  std::vector<int> pivot_;
};

template <typename Scalar>
struct MgLevel {
  CrsMatrix<Scalar> a;
  CrsMatrix<Scalar> p;  // empty on the coarsest level
  CrsMatrix<Scalar> r;  // transpose of p
  DenseVector<Scalar> diag;
  ChebyshevParams<Scalar> smoother;
  int level_index = 0;
};

template <typename Scalar>
struct MgHierarchy {
  std::vector<MgLevel<Scalar>> levels;
  std::optional<DenseLuSolver<Scalar>> coarse_lu;
  MgOptions options;

  int num_levels() const { return static_cast<int>(levels.size()); }
};

/// Builds the multigrid hierarchy: aggregate the nonzero connection graph,
/// form the exact Galerkin coarse operator, and repeat until the row count
/// falls below the coarse threshold or aggregation stops shrinking the
/// matrix; every non-coarsest level gets Chebyshev parameters from its own
/// eigenvalue estimate, and the coarsest matrix is factored by dense LU per
/// ensemble component.
template <typename Scalar>
MgHierarchy<Scalar> build_hierarchy(CrsMatrix<Scalar> a, const MgOptions& options = {}) {
  using ET = EnsembleTraits<Scalar>;
  if (a.num_rows != a.num_cols)
    throw std::invalid_argument("build_hierarchy: matrix must be square");
  if (a.num_rows == 0) throw std::invalid_argument("build_hierarchy: empty matrix");

  MgHierarchy<Scalar> h;
  h.options = options;
  while (a.num_rows >= options.coarse_row_threshold) {
    Aggregation agg = aggregate_graph(connection_graph(a));
    if (agg.num_aggregates >= a.num_rows) break;
    MgLevel<Scalar> level;
    level.level_index = h.num_levels();
    level.p = prolongator_from<Scalar>(agg);
    level.r = transpose(level.p);
    level.diag = diagonal_of(a);
    level.smoother.degree = options.chebyshev_degree;
    level.smoother.eigenvalue_ratio = options.eigenvalue_ratio;
    level.smoother.eigenvalue_boost = options.eigenvalue_boost;
    level.smoother.lambda_max = power_lambda_max(a, options.power_iterations);
    for (int e = 0; e < ET::ensemble_size; ++e)
      if (ET::coeff(level.smoother.lambda_max, e) <= 0.0)
        throw std::runtime_error("build_hierarchy: non-positive eigenvalue estimate");
    CrsMatrix<Scalar> coarse = galerkin_coarse(a, agg);
    level.a = std::move(a);
    a = std::move(coarse);
    h.levels.push_back(std::move(level));
  }
  MgLevel<Scalar> last;
  last.level_index = h.num_levels();
  last.a = std::move(a);
  h.levels.push_back(std::move(last));
  h.coarse_lu.emplace(h.levels.back().a);
  return h;
}

/// One V-cycle on level k of the hierarchy, updating x in place:
/// pre-smooth, restrict the residual, recurse from a zero coarse guess,
/// prolongate the correction, post-smooth. The coarsest level applies the
/// LU solve directly.
template <typename Scalar>
void vcycle(const MgHierarchy<Scalar>& h, const DenseVector<Scalar>& b, DenseVector<Scalar>& x,
            int level = 0) {
  const MgLevel<Scalar>& lvl = h.levels[level];
  if (level + 1 == h.num_levels()) {
    h.coarse_lu->solve(b, x);
    return;
  }
  chebyshev_apply(lvl.a, lvl.diag, lvl.smoother, b, x);

  DenseVector<Scalar> tmp;
  spmv(lvl.a, x, tmp);
  for (std::size_t row = 0; row < tmp.size(); ++row) tmp[row] = b[row] - tmp[row];
  DenseVector<Scalar> rc = spmv(lvl.r, tmp);

  DenseVector<Scalar> z(rc.size(), Scalar(0.0));
  vcycle(h, rc, z, level + 1);

  for (int row = 0; row < lvl.p.num_rows; ++row)
    for (int k = lvl.p.row_map[row]; k < lvl.p.row_map[row + 1]; ++k)
      x[row] += lvl.p.values[k] * z[lvl.p.col_entry[k]];

  chebyshev_apply(lvl.a, lvl.diag, lvl.smoother, b, x);
}

/// Ready-to-use preconditioner callable for the conjugate gradient solver:
/// one V-cycle from a zero initial guess.
template <typename Scalar>
struct MgPreconditioner {
  const MgHierarchy<Scalar>* hierarchy;

  explicit MgPreconditioner(const MgHierarchy<Scalar>& h) : hierarchy(&h) {}

  DenseVector<Scalar> operator()(const DenseVector<Scalar>& r) const {
    DenseVector<Scalar> z(r.size(), Scalar(0.0));
    vcycle(*hierarchy, r, z);
    return z;
  }
};

}  // namespace enprop
