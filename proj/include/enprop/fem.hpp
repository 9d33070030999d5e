#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "enprop/crs.hpp"
#include "enprop/kernels.hpp"
#include "enprop/kl.hpp"
#include "enprop/mesh.hpp"
#include "enprop/multigrid.hpp"
#include "enprop/pcg.hpp"

namespace enprop {

/// Weights of the non-diffusive weak-form terms
/// alpha * (v . grad u) phi + beta * u^2 phi. The velocity only matters
/// when alpha is nonzero.
struct PdeCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  std::array<double, 3> velocity = {1.0, 0.0, 0.0};
};

/// Dirichlet values on the two x-faces of the unit cube; the remaining
/// faces keep natural (do-nothing) conditions.
struct DirichletBc {
  double x0_value = 1.0;
  double x1_value = 0.0;
};

template <typename Scalar>
struct AssembledSystem {
  CrsMatrix<Scalar> matrix;      // Jacobian of the residual
  DenseVector<Scalar> residual;  // f(u); the Newton step solves A du = -f
};

/// Mesh-dependent assembly tables built once and reused across assemblies:
/// the node adjacency graph and, per cell, the position in the value array
/// of every (corner, corner) coupling.
class AssemblyContext {
 public:
  explicit AssemblyContext(const StructuredMesh& mesh) : mesh_(mesh), graph_(build_node_graph(mesh)) {
    const int num_cells = mesh.num_cells();
    entry_of_pair_.resize(static_cast<std::size_t>(num_cells) * 64);
    for (int cell = 0; cell < num_cells; ++cell) {
      const auto nodes = mesh.cell_nodes(cell);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          const int entry = find_entry(graph_.row_map, graph_.col_entry, nodes[i], nodes[j]);
          entry_of_pair_[static_cast<std::size_t>(cell) * 64 + i * 8 + j] = entry;
        }
    }
  }

  const StructuredMesh& mesh() const { return mesh_; }
  const Graph& graph() const { return graph_; }

  int entry_of_pair(int cell, int corner_i, int corner_j) const {
    return entry_of_pair_[static_cast<std::size_t>(cell) * 64 + corner_i * 8 + corner_j];
  }

 private:
  StructuredMesh mesh_;
  Graph graph_;
  std::vector<int> entry_of_pair_;
};

namespace fem_detail {

// 2x2x2 Gauss rule on the reference hex [-1,1]^3 (all weights 1) and the
// trilinear basis evaluated at those points. Corner and point orderings
// both follow the x-fastest convention of the mesh.
struct BasisTables {
  double value[8][8];     // [quadrature point][corner]
  double gradient[8][8][3];
  double offset[8][3];    // quadrature point position in [0,1]^3 cell coords

  BasisTables() {
    const double g = 1.0 / std::sqrt(3.0);
    for (int q = 0; q < 8; ++q) {
      const double xi[3] = {(q & 1) ? g : -g, (q & 2) ? g : -g, (q & 4) ? g : -g};
      for (int axis = 0; axis < 3; ++axis) offset[q][axis] = 0.5 * (xi[axis] + 1.0);
      for (int c = 0; c < 8; ++c) {
        const double sign[3] = {(c & 1) ? 1.0 : -1.0, (c & 2) ? 1.0 : -1.0,
                                (c & 4) ? 1.0 : -1.0};
        const double lin[3] = {0.5 * (1.0 + sign[0] * xi[0]), 0.5 * (1.0 + sign[1] * xi[1]),
                             0.5 * (1.0 + sign[2] * xi[2])};
        value[q][c] = lin[0] * lin[1] * lin[2];
        gradient[q][c][0] = 0.5 * sign[0] * lin[1] * lin[2];
        gradient[q][c][1] = lin[0] * 0.5 * sign[1] * lin[2];
        gradient[q][c][2] = lin[0] * lin[1] * 0.5 * sign[2];
      }
    }
  }
};

inline const BasisTables& basis_tables() {
  static const BasisTables tables;
  return tables;
}

}  // namespace fem_detail

/// Residual and Jacobian of the weak form
///   kappa grad u . grad phi + alpha (v . grad u) phi + beta u^2 phi
/// assembled cell by cell: gather the element solution, loop the 8 Gauss
/// points, evaluate the diffusion field once per point (one evaluation
/// serves every ensemble component), and scatter-accumulate the element
/// contributions. The cell loop is sequential, so the accumulation order
/// per global entry is fixed and the ensemble assembly reproduces s scalar
/// assemblies component by component, bitwise.
template <typename Scalar>
void assemble(const AssemblyContext& ctx, const KlField& field, const PdeCoefficients& coeffs,
              const DenseVector<Scalar>& u, std::span<const Scalar> samples,
              AssembledSystem<Scalar>& out) {
  const StructuredMesh& mesh = ctx.mesh();
  if (static_cast<int>(u.size()) != mesh.num_nodes())
    throw std::invalid_argument("assemble: solution vector length mismatch");
  if (static_cast<int>(samples.size()) != field.num_terms())
    throw std::invalid_argument("assemble: sample vector length mismatch");

  const Graph& graph = ctx.graph();
  out.matrix.num_rows = graph.num_rows;
  out.matrix.num_cols = graph.num_cols;
  out.matrix.row_map = graph.row_map;
  out.matrix.col_entry = graph.col_entry;
  out.matrix.values.assign(graph.num_entries(), Scalar(0.0));
  out.residual.assign(mesh.num_nodes(), Scalar(0.0));

  const auto& basis = fem_detail::basis_tables();
  const double h = mesh.spacing();
  const double grad_scale = 2.0 / h;           // reference-to-physical gradient map
  const double weighted_det = (h / 2.0) * (h / 2.0) * (h / 2.0);
  const int n = mesh.cells_per_axis();
  const auto [vx, vy, vz] = coeffs.velocity;

  Scalar element_residual[8];
  Scalar element_jacobian[64];

  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    const int ci = cell % n;
    const int cj = (cell / n) % n;
    const int ck = cell / (n * n);

    Scalar ue[8];
    for (int c = 0; c < 8; ++c) ue[c] = u[nodes[c]];
    for (int c = 0; c < 8; ++c) element_residual[c] = 0.0;
    for (int c = 0; c < 64; ++c) element_jacobian[c] = 0.0;

    for (int q = 0; q < 8; ++q) {
      const std::array<double, 3> point = {(ci + basis.offset[q][0]) * h,
                                           (cj + basis.offset[q][1]) * h,
                                           (ck + basis.offset[q][2]) * h};
      const Scalar kappa = field.evaluate(point, samples);

      Scalar u_q = 0.0, grad_x = 0.0, grad_y = 0.0, grad_z = 0.0;
      for (int c = 0; c < 8; ++c) {
        u_q += basis.value[q][c] * ue[c];
        grad_x += (basis.gradient[q][c][0] * grad_scale) * ue[c];
        grad_y += (basis.gradient[q][c][1] * grad_scale) * ue[c];
        grad_z += (basis.gradient[q][c][2] * grad_scale) * ue[c];
      }
      const Scalar advected = coeffs.alpha * (vx * grad_x + vy * grad_y + vz * grad_z);
      const Scalar reaction = coeffs.beta * (u_q * u_q);
      const Scalar reaction_derivative = (2.0 * coeffs.beta) * u_q;

      for (int i = 0; i < 8; ++i) {
        const double gx_i = basis.gradient[q][i][0] * grad_scale;
        const double gy_i = basis.gradient[q][i][1] * grad_scale;
        const double gz_i = basis.gradient[q][i][2] * grad_scale;
        const double n_i = basis.value[q][i];

        element_residual[i] +=
            weighted_det *
            (kappa * (grad_x * gx_i + grad_y * gy_i + grad_z * gz_i) + advected * n_i +
             reaction * n_i);

        for (int j = 0; j < 8; ++j) {
          const double gx_j = basis.gradient[q][j][0] * grad_scale;
          const double gy_j = basis.gradient[q][j][1] * grad_scale;
          const double gz_j = basis.gradient[q][j][2] * grad_scale;
          const double n_j = basis.value[q][j];
          const double advect_ij = coeffs.alpha * (vx * gx_j + vy * gy_j + vz * gz_j) * n_i;

          element_jacobian[i * 8 + j] +=
              weighted_det * (kappa * (gx_j * gx_i + gy_j * gy_i + gz_j * gz_i) +
                              advect_ij + reaction_derivative * (n_j * n_i));
        }
      }
    }

    for (int i = 0; i < 8; ++i) {
      out.residual[nodes[i]] += element_residual[i];
      for (int j = 0; j < 8; ++j)
        out.matrix.values[ctx.entry_of_pair(cell, i, j)] += element_jacobian[i * 8 + j];
    }
  }
}

template <typename Scalar>
AssembledSystem<Scalar> assemble(const AssemblyContext& ctx, const KlField& field,
                                 const PdeCoefficients& coeffs, const DenseVector<Scalar>& u,
                                 std::span<const Scalar> samples) {
  AssembledSystem<Scalar> out;
  assemble(ctx, field, coeffs, u, samples, out);
  return out;
}

/// Imposes u = x0_value on the x=0 face and u = x1_value on the x=1 face of
/// the assembled Newton system, symmetrically: each boundary row becomes an
/// identity row whose step solves to (boundary value - current u), and
/// boundary columns of interior rows are eliminated into the residual. The
/// sparsity graph is untouched; eliminated entries are stored as zeros.
template <typename Scalar>
void apply_dirichlet(AssembledSystem<Scalar>& system, const StructuredMesh& mesh,
                     const DirichletBc& bc, const DenseVector<Scalar>& u) {
  if (static_cast<int>(u.size()) != mesh.num_nodes())
    throw std::invalid_argument("apply_dirichlet: solution vector length mismatch");
  auto boundary_value = [&](int node) {
    return mesh.on_x0_face(node) ? bc.x0_value : bc.x1_value;
  };
  CrsMatrix<Scalar>& a = system.matrix;
  for (int row = 0; row < a.num_rows; ++row) {
    const bool row_on_boundary = mesh.on_x0_face(row) || mesh.on_x1_face(row);
    if (row_on_boundary) {
      for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k)
        a.values[k] = (a.col_entry[k] == row) ? Scalar(1.0) : Scalar(0.0);
      system.residual[row] = u[row] - boundary_value(row);
    } else {
      for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k) {
        const int col = a.col_entry[k];
        if (mesh.on_x0_face(col) || mesh.on_x1_face(col)) {
          system.residual[row] += a.values[k] * (boundary_value(col) - u[col]);
          a.values[k] = 0.0;
        }
      }
    }
  }
}

struct NewtonOptions {
  double tol = 1e-8;  // on the coupled residual norm, relative to the first
  int max_iterations = 20;
  SolverConfig linear;
  MgOptions multigrid;
};

template <typename Scalar>
struct NewtonResult {
  DenseVector<Scalar> solution;
  int iterations = 0;  // Newton steps taken (each one linear solve)
  int total_cg_iterations = 0;
  std::vector<double> residual_norms;  // coupled norm before each step
};

/// Newton iteration for the assembled nonlinear system: assemble residual
/// and Jacobian at the current iterate, impose the boundary conditions,
/// solve A du = -f by multigrid-preconditioned CG, and update u += du until
/// the coupled residual norm falls below tol relative to the initial one.
/// With alpha = beta = 0 the system is linear and exactly one step is taken.
template <typename Scalar>
NewtonResult<Scalar> newton_solve(const StructuredMesh& mesh, const KlField& field,
                                  const PdeCoefficients& coeffs,
                                  const std::vector<Scalar>& samples, const DirichletBc& bc = {},
                                  const NewtonOptions& options = {}) {
  AssemblyContext ctx(mesh);
  NewtonResult<Scalar> result;
  result.solution.assign(mesh.num_nodes(), Scalar(0.0));

  AssembledSystem<Scalar> system;
  double initial_norm = 0.0;
  for (int step = 0;; ++step) {
    assemble<Scalar>(ctx, field, coeffs, result.solution, samples, system);
    apply_dirichlet(system, mesh, bc, result.solution);
    const double residual_norm = norm2(system.residual);
    result.residual_norms.push_back(residual_norm);

    if (step == 0) {
      initial_norm = residual_norm;
      if (initial_norm == 0.0) return result;
    } else if (residual_norm < options.tol * initial_norm) {
      result.iterations = step;
      return result;
    }
    if (step >= options.max_iterations)
      throw SolverError("newton_solve: no convergence within " +
                            std::to_string(options.max_iterations) + " iterations",
                        result.residual_norms);

    MgHierarchy<Scalar> hierarchy = build_hierarchy(system.matrix, options.multigrid);
    DenseVector<Scalar> rhs(system.residual.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -system.residual[i];
    SolveResult<Scalar> linear =
        pcg_solve(system.matrix, rhs, MgPreconditioner<Scalar>(hierarchy), options.linear);
    result.total_cg_iterations += linear.iterations;
    axpby(1.0, linear.solution, 1.0, result.solution);
  }
}

}  // namespace enprop
