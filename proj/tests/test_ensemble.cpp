#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <random>
#include <vector>

#include "enprop/ensemble.hpp"

using enprop::Ensemble;
using enprop::EnsembleTraits;

namespace {

std::mt19937_64 rng(20240817u);

double random_value() {
  // 53 uniform bits mapped to [-1, 1); avoids distribution classes whose
  // output can differ between standard library implementations.
  double u = static_cast<double>(rng() >> 11) * 0x1p-53;
  return 2.0 * u - 1.0;
}

template <int S>
Ensemble<S> random_ensemble() {
  Ensemble<S> a;
  for (int e = 0; e < S; ++e) a[e] = random_value();
  return a;
}

}  // namespace

TEST_CASE("broadcast constructor fills every component") {
  Ensemble<8> a(3.25);
  for (int e = 0; e < 8; ++e) CHECK(a[e] == 3.25);
}

TEST_CASE("layout is contiguous with no padding") {
  static_assert(sizeof(Ensemble<1>) == sizeof(double));
  static_assert(sizeof(Ensemble<2>) == 2 * sizeof(double));
  static_assert(sizeof(Ensemble<32>) == 32 * sizeof(double));
  static_assert(std::is_trivially_copyable_v<Ensemble<32>>);

  std::vector<Ensemble<4>> v(3, Ensemble<4>(0.0));
  CHECK(&v[1][0] == &v[0][0] + 4);
  CHECK(&v[2][3] == &v[0][0] + 11);
}

TEST_CASE("arithmetic matches per-component scalar arithmetic bitwise") {
  constexpr int S = 8;
  for (int trial = 0; trial < 200; ++trial) {
    Ensemble<S> a = random_ensemble<S>();
    Ensemble<S> b = random_ensemble<S>();
    double c = random_value();

    Ensemble<S> sum = a + b, dif = a - b, prd = a * b, quo = a / b;
    Ensemble<S> neg = -a;
    Ensemble<S> scl = a * c, scr = c * a, shl = a + c, shr = c - a, dvl = a / c, dvr = c / a;
    for (int e = 0; e < S; ++e) {
      CHECK(sum[e] == a[e] + b[e]);
      CHECK(dif[e] == a[e] - b[e]);
      CHECK(prd[e] == a[e] * b[e]);
      CHECK(quo[e] == a[e] / b[e]);
      CHECK(neg[e] == -a[e]);
      CHECK(scl[e] == a[e] * c);
      CHECK(scr[e] == c * a[e]);
      CHECK(shl[e] == a[e] + c);
      CHECK(shr[e] == c - a[e]);
      CHECK(dvl[e] == a[e] / c);
      CHECK(dvr[e] == c / a[e]);
    }

    Ensemble<S> acc = a;
    acc += b;
    acc *= a;
    acc -= b;
    acc /= b;
    for (int e = 0; e < S; ++e) {
      double ref = a[e];
      ref += b[e];
      ref *= a[e];
      ref -= b[e];
      ref /= b[e];
      CHECK(acc[e] == ref);
    }
  }
}

TEST_CASE("comparisons are decided by the first component only") {
  Ensemble<4> a(0.0), b(0.0);
  a[0] = 1.0; a[1] = -100.0; a[2] = -100.0; a[3] = -100.0;
  b[0] = 2.0; b[1] = 100.0;  b[2] = -200.0; b[3] = 0.0;
  CHECK(a < b);
  CHECK(b > a);
  CHECK(a <= b);
  CHECK(b >= a);
  CHECK_FALSE(a == b);

  // Equal first components compare equal even when the rest differ.
  b[0] = 1.0;
  CHECK(a == b);
  CHECK(a <= b);
  CHECK(a >= b);
  CHECK_FALSE(a < b);

  // Mixed comparisons against plain doubles broadcast the double.
  CHECK(a < 5.0);
  CHECK(a > 0.5);
  CHECK(Ensemble<4>(2.0) == 2.0);
}

TEST_CASE("reduce_sum accumulates components left to right") {
  Ensemble<5> a;
  for (int e = 0; e < 5; ++e) a[e] = random_value();
  double expected = ((((0.0 + a[0]) + a[1]) + a[2]) + a[3]) + a[4];
  CHECK(enprop::reduce_sum(a) == expected);
  CHECK(enprop::reduce_sum(2.75) == 2.75);
}

TEST_CASE("math overloads apply the scalar function per component") {
  constexpr int S = 4;
  for (int trial = 0; trial < 50; ++trial) {
    Ensemble<S> a = random_ensemble<S>();
    Ensemble<S> b = random_ensemble<S>();
    Ensemble<S> pos = enprop::abs(a) + 0.5;

    Ensemble<S> sq = enprop::sqrt(pos), ex = enprop::exp(a), lg = enprop::log(pos);
    Ensemble<S> sn = enprop::sin(a), cs = enprop::cos(a), pw = enprop::pow(pos, 1.7);
    Ensemble<S> mn = enprop::min(a, b), mx = enprop::max(a, b);
    for (int e = 0; e < S; ++e) {
      CHECK(sq[e] == std::sqrt(pos[e]));
      CHECK(ex[e] == std::exp(a[e]));
      CHECK(lg[e] == std::log(pos[e]));
      CHECK(sn[e] == std::sin(a[e]));
      CHECK(cs[e] == std::cos(a[e]));
      CHECK(pw[e] == std::pow(pos[e], 1.7));
      CHECK(mn[e] == (a[e] < b[e] ? a[e] : b[e]));
      CHECK(mx[e] == (a[e] > b[e] ? a[e] : b[e]));
      CHECK(enprop::fabs(a)[e] == std::fabs(a[e]));
    }
  }
}

TEST_CASE("traits expose components of both double and ensemble scalars") {
  static_assert(EnsembleTraits<double>::ensemble_size == 1);
  static_assert(EnsembleTraits<Ensemble<16>>::ensemble_size == 16);
  static_assert(std::is_same_v<EnsembleTraits<Ensemble<2>>::value_type, double>);

  double x = 4.5;
  CHECK(EnsembleTraits<double>::coeff(x, 0) == 4.5);
  EnsembleTraits<double>::coeff(x, 0) = 2.0;
  CHECK(x == 2.0);

  Ensemble<3> a(0.0);
  EnsembleTraits<Ensemble<3>>::coeff(a, 2) = 7.0;
  CHECK(a[2] == 7.0);
}

TEST_CASE("component_loop recovers per-component branching") {
  Ensemble<4> a(0.0);
  a[0] = -2.0; a[1] = 3.0; a[2] = -0.5; a[3] = 0.0;
  auto clamped = enprop::component_loop(a, [](double x) { return x < 0.0 ? 0.0 : x; });
  CHECK(clamped[0] == 0.0);
  CHECK(clamped[1] == 3.0);
  CHECK(clamped[2] == 0.0);
  CHECK(clamped[3] == 0.0);

  double d = enprop::component_loop(-1.5, [](double x) { return x < 0.0 ? 0.0 : x; });
  CHECK(d == 0.0);
}

TEST_CASE("bitwise_equal inspects every component") {
  Ensemble<3> a(1.0), b(1.0);
  CHECK(enprop::bitwise_equal(a, b));
  b[2] = std::nextafter(1.0, 2.0);
  CHECK_FALSE(enprop::bitwise_equal(a, b));
  CHECK(a == b);  // first-component comparison cannot tell them apart
}

TEST_CASE("debug rendering round-trips every component through 17 digits") {
  for (int trial = 0; trial < 50; ++trial) {
    Ensemble<3> a = random_ensemble<3>();
    a = a * std::exp(40.0 * random_value());
    std::string text = enprop::to_debug_string(a);
    REQUIRE(text.front() == '[');
    REQUIRE(text.back() == ']');

    const char* cursor = text.c_str() + 1;
    for (int e = 0; e < 3; ++e) {
      char* end = nullptr;
      double parsed = std::strtod(cursor, &end);
      CHECK(parsed == a[e]);
      cursor = (*end == ',') ? end + 2 : end;
    }
  }
  CHECK(enprop::to_debug_string(0.5) == "[0.5]");
}
