#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "enprop/ensemble.hpp"
#include "enprop/fem.hpp"
#include "enprop/kernels.hpp"
#include "enprop/mesh.hpp"
#include "enprop/multigrid.hpp"
#include "enprop/pcg.hpp"
#include "oracles.hpp"

using namespace enprop;

namespace {

CrsMatrix<double> path_matrix(int n) {
  std::vector<std::tuple<int, int, double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0);
    if (i > 0) t.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
  }
  return crs_from_triplets<double>(n, n, t);
}

CrsMatrix<double> complete_matrix(int n) {
  std::vector<std::tuple<int, int, double>> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.emplace_back(i, j, i == j ? double(n) : -1.0);
  return crs_from_triplets<double>(n, n, t);
}

/// Independent dense accumulation of the aggregate-summed coarse matrix.
/// Fine rows are visited in ascending order and entries in row order, which
/// reproduces the accumulation sequence per coarse bucket.
std::vector<std::vector<double>> coarse_oracle(const CrsMatrix<double>& a,
                                               const Aggregation& agg) {
  std::vector<std::vector<double>> c(agg.num_aggregates,
                                     std::vector<double>(agg.num_aggregates, 0.0));
  for (int i = 0; i < a.num_rows; ++i)
    for (int k = a.row_map[i]; k < a.row_map[i + 1]; ++k)
      c[agg.aggregate_of[i]][agg.aggregate_of[a.col_entry[k]]] += a.values[k];
  return c;
}

/// Constrained diffusion matrix on an n^3 mesh, fixed sample vector.
CrsMatrix<double> mesh_matrix(int n, unsigned seed = 3u) {
  StructuredMesh mesh(n);
  AssemblyContext ctx(mesh);
  KlField field(5, 1.0, 0.2, 1.0);
  std::mt19937_64 rng(seed);
  std::vector<double> y(5);
  for (auto& v : y) v = testutil::uniform_pm1(rng);
  std::vector<double> u(mesh.num_nodes(), 0.0);
  auto system = assemble<double>(ctx, field, PdeCoefficients{}, u, y);
  apply_dirichlet(system, mesh, DirichletBc{}, u);
  return system.matrix;
}

double residual_norm(const CrsMatrix<double>& a, const std::vector<double>& b,
                     const std::vector<double>& x) {
  auto ax = spmv(a, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) sum += (b[i] - ax[i]) * (b[i] - ax[i]);
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("aggregation pairs up a path graph") {
  auto agg = aggregate_graph(path_matrix(6).graph());
  CHECK(agg.num_aggregates == 3);
  CHECK(agg.aggregate_of == std::vector<int>{0, 0, 1, 1, 2, 2});
}

TEST_CASE("aggregation collapses a complete graph to one aggregate") {
  auto agg = aggregate_graph(complete_matrix(5).graph());
  CHECK(agg.num_aggregates == 1);
  CHECK(agg.aggregate_of == std::vector<int>{0, 0, 0, 0, 0});
}

TEST_CASE("a leftover node joins an adjacent aggregate") {
  auto agg = aggregate_graph(path_matrix(3).graph());
  CHECK(agg.num_aggregates == 1);
  CHECK(agg.aggregate_of == std::vector<int>{0, 0, 0});
}

TEST_CASE("isolated nodes become singleton aggregates") {
  auto agg = aggregate_graph(crs_identity<double>(4).graph());
  CHECK(agg.num_aggregates == 4);
  CHECK(agg.aggregate_of == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("aggregation ids are contiguous and aggregates are non-empty") {
  StructuredMesh mesh(6);
  auto agg = aggregate_graph(build_node_graph(mesh));
  REQUIRE(agg.num_aggregates > 0);
  CHECK(agg.num_aggregates * 4 <= mesh.num_nodes());
  std::vector<int> size(agg.num_aggregates, 0);
  for (int id : agg.aggregate_of) {
    REQUIRE(id >= 0);
    REQUIRE(id < agg.num_aggregates);
    ++size[id];
  }
  for (int s : size) CHECK(s >= 1);
}

TEST_CASE("aggregation rejects malformed graphs") {
  Graph empty;
  CHECK_THROWS_AS(aggregate_graph(empty), std::invalid_argument);
  Graph rect;
  rect.num_rows = 2;
  rect.num_cols = 3;
  rect.row_map = {0, 0, 0};
  CHECK_THROWS_AS(aggregate_graph(rect), std::invalid_argument);
}

TEST_CASE("prolongator has one unit entry per fine row") {
  auto agg = aggregate_graph(path_matrix(6).graph());
  auto p = prolongator_from<double>(agg);
  CHECK(p.num_rows == 6);
  CHECK(p.num_cols == 3);
  for (int row = 0; row < p.num_rows; ++row) {
    CHECK(p.row_map[row + 1] - p.row_map[row] == 1);
    CHECK(p.col_entry[p.row_map[row]] == agg.aggregate_of[row]);
    CHECK(p.values[p.row_map[row]] == 1.0);
  }
}

TEST_CASE("transpose matches the dense oracle and round trips") {
  std::mt19937_64 rng(8u);
  auto a = testutil::random_crs(rng, 20, 13, 0.2);
  auto t = transpose(a);
  CHECK(t.num_rows == 13);
  CHECK(t.num_cols == 20);

  auto dense = testutil::to_dense(a);
  auto dense_t = testutil::to_dense(t);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 13; ++j) CHECK(dense[i][j] == dense_t[j][i]);

  auto back = transpose(t);
  CHECK(back.row_map == a.row_map);
  CHECK(back.col_entry == a.col_entry);
  CHECK(back.values == a.values);
}

TEST_CASE("coarse operator equals the aggregate-summed oracle exactly") {
  std::mt19937_64 rng(21u);
  auto a = testutil::random_spd_crs(rng, 40, 0.15);
  auto agg = aggregate_graph(a.graph());
  REQUIRE(agg.num_aggregates < 40);
  auto c = galerkin_coarse(a, agg);
  CHECK(c.num_rows == agg.num_aggregates);
  CHECK(c.num_cols == agg.num_aggregates);
  c.validate();

  auto oracle = coarse_oracle(a, agg);
  auto dense_c = testutil::to_dense(c);
  for (int i = 0; i < c.num_rows; ++i)
    for (int j = 0; j < c.num_cols; ++j) CHECK(dense_c[i][j] == oracle[i][j]);

  // The same matrix, derived independently as a dense triple product with
  // the boolean prolongator.
  auto p = prolongator_from<double>(agg);
  auto dense_a = testutil::to_dense(a);
  auto dense_p = testutil::to_dense(p);
  for (int bi = 0; bi < c.num_rows; ++bi)
    for (int bj = 0; bj < c.num_cols; ++bj) {
      double sum = 0.0;
      for (int i = 0; i < a.num_rows; ++i)
        for (int j = 0; j < a.num_cols; ++j)
          sum += dense_p[i][bi] * dense_a[i][j] * dense_p[j][bj];
      CHECK(dense_c[bi][bj] == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("coarse operator keeps symmetry and positive definiteness") {
  auto a = mesh_matrix(4);
  auto agg = aggregate_graph(a.graph());
  auto c = galerkin_coarse(a, agg);
  auto dense = testutil::to_dense(c);
  for (std::size_t i = 0; i < dense.size(); ++i)
    for (std::size_t j = 0; j < dense.size(); ++j)
      CHECK(std::abs(dense[i][j] - dense[j][i]) < 1e-12);
  CHECK(testutil::dense_cholesky_succeeds(dense));
}

TEST_CASE("eigenvalue estimate recovers the dominant mode of a 2x2 system") {
  auto a = crs_from_triplets<double>(
      2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}});
  // Scaled by the diagonal the eigenvalues are 0.5 and 1.5.
  const double estimate = power_lambda_max(a);
  CHECK(estimate == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("eigenvalue estimate is exactly one for diagonal matrices") {
  auto a = crs_from_triplets<double>(3, 3, {{0, 0, 4.0}, {1, 1, 9.0}, {2, 2, 0.5}});
  CHECK(power_lambda_max(a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eigenvalue estimate ignores a global matrix scaling") {
  std::mt19937_64 rng(33u);
  auto a = testutil::random_spd_crs(rng, 25, 0.2);
  auto scaled = a;
  for (auto& v : scaled.values) v *= 3.0;
  CHECK(power_lambda_max(scaled) ==
        doctest::Approx(power_lambda_max(a)).epsilon(1e-12));
}

TEST_CASE("ensemble eigenvalue estimates stay component-decoupled") {
  constexpr int S = 4;
  std::mt19937_64 rng(14u);
  auto base = testutil::random_spd_crs(rng, 30, 0.15);
  std::vector<CrsMatrix<double>> parts;
  for (int e = 0; e < S; ++e) {
    auto m = base;
    for (int row = 0; row < m.num_rows; ++row) {
      const int k = find_entry(m.row_map, m.col_entry, row, row);
      m.values[k] += 0.5 * e;
    }
    parts.push_back(std::move(m));
  }
  auto fused = pack_matrix<S>(parts);
  const Ensemble<S> estimate = power_lambda_max(fused);
  for (int e = 0; e < S; ++e) CHECK(estimate[e] == power_lambda_max(parts[e]));
}

TEST_CASE("eigenvalue estimate rejects zero diagonals") {
  auto a = crs_from_triplets<double>(2, 2,
                                     {{0, 0, 0.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  CHECK_THROWS_AS(power_lambda_max(a), std::domain_error);
}

TEST_CASE("smoother leaves an exact solution untouched") {
  std::mt19937_64 rng(9u);
  auto a = testutil::random_spd_crs(rng, 20, 0.2);
  std::vector<double> x(20);
  for (auto& v : x) v = testutil::uniform_pm1(rng);
  auto b = spmv(a, x);

  ChebyshevParams<double> params;
  params.lambda_max = power_lambda_max(a);
  auto x_before = x;
  chebyshev_apply(a, diagonal_of(a), params, b, x);
  for (int i = 0; i < 20; ++i) CHECK(x[i] == x_before[i]);
}

TEST_CASE("smoother reduces the energy norm of every tested error") {
  auto a = path_matrix(32);
  auto diag = diagonal_of(a);
  ChebyshevParams<double> params;
  params.lambda_max = power_lambda_max(a);

  std::mt19937_64 rng(70u);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x_true(32), x(32);
    for (auto& v : x_true) v = testutil::uniform_pm1(rng);
    for (auto& v : x) v = testutil::uniform_pm1(rng);
    auto b = spmv(a, x_true);

    auto energy = [&](const std::vector<double>& v) {
      std::vector<double> err(32);
      for (int i = 0; i < 32; ++i) err[i] = v[i] - x_true[i];
      auto ae = spmv(a, err);
      double sum = 0.0;
      for (int i = 0; i < 32; ++i) sum += err[i] * ae[i];
      return sum;
    };

    const double before = energy(x);
    chebyshev_apply(a, diag, params, b, x);
    const double after = energy(x);
    CHECK(after < before);
  }
}

TEST_CASE("ensemble smoother applies per-component coefficients") {
  constexpr int S = 2;
  std::mt19937_64 rng(44u);
  auto a0 = testutil::random_spd_crs(rng, 24, 0.2);
  auto a1 = a0;
  for (auto& v : a1.values) v *= 4.0;
  auto fused = pack_matrix<S>({a0, a1});

  std::vector<double> b0(24), x0(24);
  for (auto& v : b0) v = testutil::uniform_pm1(rng);
  for (auto& v : x0) v = testutil::uniform_pm1(rng);

  ChebyshevParams<Ensemble<S>> fused_params;
  fused_params.lambda_max = power_lambda_max(fused);
  DenseVector<Ensemble<S>> b(24), x(24);
  for (int i = 0; i < 24; ++i) {
    b[i] = Ensemble<S>(b0[i]);
    x[i] = Ensemble<S>(x0[i]);
  }
  chebyshev_apply(fused, diagonal_of(fused), fused_params, b, x);

  for (int e = 0; e < S; ++e) {
    const auto& part = (e == 0) ? a0 : a1;
    ChebyshevParams<double> params;
    params.lambda_max = power_lambda_max(part);
    auto xe = x0;
    chebyshev_apply(part, diagonal_of(part), params, b0, xe);
    for (int i = 0; i < 24; ++i) CHECK(x[i][e] == xe[i]);
  }
}

TEST_CASE("dense solver inverts small systems to roundoff") {
  std::mt19937_64 rng(5u);
  auto a = testutil::random_spd_crs(rng, 30, 0.2);
  DenseLuSolver<double> lu(a);
  std::vector<double> b(30), x;
  for (auto& v : b) v = testutil::uniform_pm1(rng);
  lu.solve(b, x);
  double bn = 0.0;
  for (double v : b) bn += v * v;
  CHECK(residual_norm(a, b, x) < 1e-12 * std::sqrt(bn));
}

TEST_CASE("dense solver pivots through zero leading entries") {
  auto a = crs_from_triplets<double>(2, 2,
                                     {{0, 0, 0.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 0.0}});
  DenseLuSolver<double> lu(a);
  std::vector<double> b = {3.0, 7.0}, x;
  lu.solve(b, x);
  CHECK(x[0] == doctest::Approx(7.0));
  CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("dense solver reports singular matrices") {
  auto a = crs_from_triplets<double>(2, 2,
                                     {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  auto factor = [&] { return DenseLuSolver<double>(a); };
  CHECK_THROWS_AS(factor(), std::runtime_error);
}

TEST_CASE("ensemble dense solves stay component-decoupled") {
  constexpr int S = 2;
  std::mt19937_64 rng(61u);
  auto a0 = testutil::random_spd_crs(rng, 15, 0.25);
  auto a1 = a0;
  for (int row = 0; row < 15; ++row) {
    const int k = find_entry(a1.row_map, a1.col_entry, row, row);
    a1.values[k] += 2.0;
  }
  auto fused = pack_matrix<S>({a0, a1});

  std::vector<double> b0(15);
  for (auto& v : b0) v = testutil::uniform_pm1(rng);
  DenseVector<Ensemble<S>> b(15), x;
  for (int i = 0; i < 15; ++i) b[i] = Ensemble<S>(b0[i]);

  DenseLuSolver<Ensemble<S>> lu(fused);
  lu.solve(b, x);

  for (int e = 0; e < S; ++e) {
    DenseLuSolver<double> part((e == 0) ? a0 : a1);
    std::vector<double> xe;
    part.solve(b0, xe);
    for (int i = 0; i < 15; ++i) CHECK(x[i][e] == xe[i]);
  }
}

TEST_CASE("a matrix below the coarse threshold gets a direct solve only") {
  std::mt19937_64 rng(2u);
  auto a = testutil::random_spd_crs(rng, 100, 0.1);
  auto h = build_hierarchy(a);
  CHECK(h.num_levels() == 1);
  REQUIRE(h.coarse_lu.has_value());

  std::vector<double> b(100), x;
  for (auto& v : b) v = testutil::uniform_pm1(rng);
  x.assign(100, 0.0);
  vcycle(h, b, x);
  double bn = 0.0;
  for (double v : b) bn += v * v;
  CHECK(residual_norm(a, b, x) < 1e-12 * std::sqrt(bn));
}

TEST_CASE("hierarchy levels shrink to the uncoupled-row floor") {
  auto a = mesh_matrix(16);

  // Constrained face rows carry only zero-valued couplings; they stay
  // singleton aggregates at every level, so they bound the coarsening.
  int floor_rows = 0;
  for (int i = 0; i < a.num_rows; ++i) {
    bool coupled = false;
    for (int k = a.row_map[i]; k < a.row_map[i + 1] && !coupled; ++k)
      coupled = a.col_entry[k] != i && a.values[k] != 0.0;
    floor_rows += !coupled;
  }
  CHECK(floor_rows == 2 * 17 * 17);

  auto h = build_hierarchy(a);
  REQUIRE(h.num_levels() >= 3);
  for (int k = 0; k + 1 < h.num_levels(); ++k) {
    const auto& lvl = h.levels[k];
    CHECK(lvl.a.num_rows >= h.options.coarse_row_threshold);
    CHECK(lvl.a.num_rows > h.levels[k + 1].a.num_rows);
    CHECK(h.levels[k + 1].a.num_rows >= floor_rows);
    CHECK(lvl.p.num_rows == lvl.a.num_rows);
    CHECK(lvl.p.num_cols == h.levels[k + 1].a.num_rows);
    CHECK(lvl.r.num_rows == lvl.p.num_cols);
    CHECK(lvl.r.num_cols == lvl.p.num_rows);
  }

  const int coupled0 = h.levels[0].a.num_rows - floor_rows;
  const int coupled1 = h.levels[1].a.num_rows - floor_rows;
  CHECK(coupled0 >= 4 * coupled1);
  CHECK(h.levels.back().a.num_rows < h.options.coarse_row_threshold + floor_rows);

  // Every uncoupled fine row keeps a coarse column of its own.
  const auto& p = h.levels[0].p;
  std::vector<int> fan_in(p.num_cols, 0);
  for (int i = 0; i < p.num_rows; ++i) ++fan_in[p.col_entry[p.row_map[i]]];
  int singles = 0;
  for (int c : fan_in) singles += (c == 1);
  CHECK(singles >= floor_rows);
}

TEST_CASE("a matrix that cannot coarsen falls back to a single direct solve") {
  auto a = crs_identity<double>(600);
  auto h = build_hierarchy(a);
  CHECK(h.num_levels() == 1);
  REQUIRE(h.coarse_lu.has_value());

  std::mt19937_64 rng(4u);
  std::vector<double> b(600), x;
  for (auto& v : b) v = testutil::uniform_pm1(rng);
  x.assign(600, 0.0);
  vcycle(h, b, x);
  for (int i = 0; i < 600; ++i) CHECK(x[i] == b[i]);
}

TEST_CASE("two-level cycles contract the error monotonically in the energy norm") {
  const int n = 600;
  auto a = path_matrix(n);
  MgOptions options;
  options.coarse_row_threshold = 400;
  auto h = build_hierarchy(a, options);
  REQUIRE(h.num_levels() == 2);

  std::mt19937_64 rng(12u);
  std::vector<double> x_true(n), x(n, 0.0);
  for (auto& v : x_true) v = testutil::uniform_pm1(rng);
  auto b = spmv(a, x_true);

  auto energy_norm = [&] {
    std::vector<double> e(n);
    for (int i = 0; i < n; ++i) e[i] = x[i] - x_true[i];
    auto ae = spmv(a, e);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += e[i] * ae[i];
    return std::sqrt(sum);
  };

  const double initial = energy_norm();
  double prev = initial;
  for (int sweep = 0; sweep < 15; ++sweep) {
    vcycle(h, b, x);
    const double cur = energy_norm();
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 0.01 * initial);
}

TEST_CASE("repeated v-cycles solve a mesh diffusion system") {
  auto a = mesh_matrix(10);
  auto h = build_hierarchy(a);
  REQUIRE(h.num_levels() == 2);

  const int n = a.num_rows;
  std::mt19937_64 rng(12u);
  std::vector<double> b(n), x(n, 0.0);
  for (auto& v : b) v = testutil::uniform_pm1(rng);
  double bn = 0.0;
  for (double v : b) bn += v * v;
  bn = std::sqrt(bn);

  for (int sweep = 0; sweep < 10; ++sweep) vcycle(h, b, x);
  CHECK(residual_norm(a, b, x) < 0.05 * bn);
  for (int sweep = 0; sweep < 15; ++sweep) vcycle(h, b, x);
  CHECK(residual_norm(a, b, x) < 0.01 * bn);
}

TEST_CASE("a deep hierarchy accelerates conjugate gradients") {
  const int n = 600;
  auto a = path_matrix(n);
  MgOptions options;
  options.coarse_row_threshold = 50;
  auto h = build_hierarchy(a, options);
  REQUIRE(h.num_levels() >= 4);

  std::mt19937_64 rng(12u);
  std::vector<double> b(n);
  for (auto& v : b) v = testutil::uniform_pm1(rng);

  SolverConfig config;
  config.tol = 1e-10;
  auto plain = pcg_solve(a, b, IdentityPreconditioner{}, config);
  auto mg = pcg_solve(a, b, MgPreconditioner<double>(h), config);
  CHECK(mg.iterations < 120);
  CHECK(4 * mg.iterations < plain.iterations);
}

TEST_CASE("the v-cycle is linear in the right-hand side") {
  auto a = mesh_matrix(6);
  MgOptions options;
  options.coarse_row_threshold = 60;
  auto h = build_hierarchy(a, options);
  REQUIRE(h.num_levels() >= 2);

  std::mt19937_64 rng(90u);
  const int n = a.num_rows;
  std::vector<double> b1(n), b2(n), sum(n);
  for (int i = 0; i < n; ++i) {
    b1[i] = testutil::uniform_pm1(rng);
    b2[i] = testutil::uniform_pm1(rng);
    sum[i] = b1[i] + b2[i];
  }
  std::vector<double> x1(n, 0.0), x2(n, 0.0), xs(n, 0.0);
  vcycle(h, b1, x1);
  vcycle(h, b2, x2);
  vcycle(h, sum, xs);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(xs[i] - (x1[i] + x2[i])) <
          1e-11 * std::max(1.0, std::abs(xs[i])));
}

TEST_CASE("an ensemble v-cycle decomposes into independent scalar v-cycles") {
  constexpr int S = 4;
  StructuredMesh mesh(4);
  AssemblyContext ctx(mesh);
  KlField field(5, 1.0, 0.2, 1.0);
  std::mt19937_64 rng(27u);

  // Four sample vectors, one per component, sharing the mesh graph.
  std::vector<Ensemble<S>> y(5);
  for (auto& v : y)
    for (int e = 0; e < S; ++e) v[e] = testutil::uniform_pm1(rng);
  DenseVector<Ensemble<S>> u(mesh.num_nodes(), Ensemble<S>(0.0));
  auto fused_system = assemble<Ensemble<S>>(ctx, field, PdeCoefficients{}, u, y);
  apply_dirichlet(fused_system, mesh, DirichletBc{}, u);

  MgOptions options;
  options.coarse_row_threshold = 40;
  auto fused_h = build_hierarchy(fused_system.matrix, options);
  REQUIRE(fused_h.num_levels() >= 2);

  const int n = mesh.num_nodes();
  std::vector<double> b0(n);
  for (auto& v : b0) v = testutil::uniform_pm1(rng);
  DenseVector<Ensemble<S>> b(n), x(n, Ensemble<S>(0.0));
  for (int i = 0; i < n; ++i) b[i] = Ensemble<S>(b0[i]);
  vcycle(fused_h, b, x);

  for (int e = 0; e < S; ++e) {
    auto a_e = extract_component(fused_system.matrix, e);
    auto h_e = build_hierarchy(a_e, options);
    std::vector<double> x_e(n, 0.0);
    vcycle(h_e, b0, x_e);
    for (int i = 0; i < n; ++i) CHECK(x[i][e] == x_e[i]);
  }
}
