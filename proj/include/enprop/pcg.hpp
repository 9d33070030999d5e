#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enprop/crs.hpp"
#include "enprop/kernels.hpp"

namespace enprop {

struct SolverConfig {
  double tol = 1e-8;
  int max_iterations = 1000;
};

/// Thrown when an iterative solver fails; carries the residual history up
/// to the failure so callers can report partial progress.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

template <typename Scalar>
struct SolveResult {
  DenseVector<Scalar> solution;
  int iterations = 0;
  std::vector<double> residual_history;  // relative coupled norms, entry 0 = initial
};

struct IdentityPreconditioner {
  template <typename Vector>
  const Vector& operator()(const Vector& r) const {
    return r;
  }
};

/// Preconditioned conjugate gradient from a zero initial guess. All inner
/// products and norms are the coupled ensemble reductions, so an ensemble
/// system makes one convergence decision shared by every component: the
/// iteration stops when the coupled norm of the residual drops below
/// tol * coupled norm of b.
template <typename Scalar, typename Precond>
SolveResult<Scalar> pcg_solve(const CrsMatrix<Scalar>& a, const DenseVector<Scalar>& b,
                              Precond&& precond, const SolverConfig& config = {}) {
  if (a.num_rows != a.num_cols)
    throw std::invalid_argument("pcg_solve: matrix must be square");
  if (static_cast<int>(b.size()) != a.num_rows)
    throw std::invalid_argument("pcg_solve: right-hand side length mismatch");

  SolveResult<Scalar> result;
  result.solution.assign(b.size(), Scalar(0.0));

  const double b_norm = norm2(b);
  if (b_norm == 0.0) {
    result.residual_history.push_back(0.0);
    return result;
  }

  DenseVector<Scalar> r = b;
  DenseVector<Scalar> z = precond(r);
  DenseVector<Scalar> p = z;
  DenseVector<Scalar> q;
  double rz = dot(r, z);

  for (int it = 0;; ++it) {
    const double relative = norm2(r) / b_norm;
    result.residual_history.push_back(relative);
    if (relative < config.tol) {
      result.iterations = it;
      return result;
    }
    if (it >= config.max_iterations)
      throw SolverError("pcg_solve: no convergence within " +
                            std::to_string(config.max_iterations) + " iterations",
                        std::move(result.residual_history));

    spmv(a, p, q);
    const double pq = dot(p, q);
    if (pq <= 0.0)
      throw SolverError("pcg_solve: operator not positive definite (p'Ap = " +
                            std::to_string(pq) + ")",
                        std::move(result.residual_history));
    const double alpha = rz / pq;
    axpby(alpha, p, 1.0, result.solution);
    axpby(-alpha, q, 1.0, r);

    z = precond(r);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    axpby(1.0, z, beta, p);
  }
}

/// Writes a residual history as CSV with columns iteration,residual.
inline void write_residual_history_csv(const std::string& path,
                                       const std::vector<double>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "iteration,residual\n";
  char buf[48];
  for (std::size_t it = 0; it < history.size(); ++it) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", it, history[it]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed on " + path);
}

}  // namespace enprop
