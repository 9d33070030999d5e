// Built with ENPROP_COUNT_FLOPS so every ensemble arithmetic operation is
// tallied. Pins the operation count that the performance model divides by
// bytes moved: one multiply and one add per stored entry per component.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "enprop/kernels.hpp"
#include "oracles.hpp"

using namespace enprop;

namespace {
std::mt19937_64 rng(98231u);
}

TEST_CASE("fused spmv performs exactly 2*s*nnz flops") {
  auto base = testutil::random_crs(rng, 80, 80, 0.1);
  const long long nnz = base.num_entries();
  REQUIRE(nnz > 0);

  auto run = [&]<int S>() {
    std::vector<CrsMatrix<double>> parts(S, base);
    auto a = pack_matrix<S>(parts);
    DenseVector<Ensemble<S>> x(80, Ensemble<S>(1.0)), z;
    flop_tally::reset();
    spmv(a, x, z);
    CHECK(flop_tally::count == 2 * static_cast<long long>(S) * nnz);
  };
  run.operator()<1>();
  run.operator()<2>();
  run.operator()<8>();
  run.operator()<32>();
}

TEST_CASE("axpby performs exactly 3*s*n flops") {
  constexpr int S = 4;
  const int n = 100;
  DenseVector<Ensemble<S>> x(n, Ensemble<S>(2.0)), y(n, Ensemble<S>(1.0));
  flop_tally::reset();
  axpby(0.5, x, 2.0, y);
  CHECK(flop_tally::count == 3LL * S * n);
}

TEST_CASE("coupled dot performs 2*s*n componentwise flops plus the reduction") {
  constexpr int S = 4;
  const int n = 64;
  DenseVector<Ensemble<S>> u(n, Ensemble<S>(1.0)), v(n, Ensemble<S>(3.0));
  flop_tally::reset();
  double d = dot(u, v);
  CHECK(d == 3.0 * S * n);
  CHECK(flop_tally::count == 2LL * S * n);
}
