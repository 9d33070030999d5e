#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "enprop/ensemble.hpp"
#include "enprop/kl.hpp"
#include "oracles.hpp"

using enprop::AxisMode;
using enprop::Ensemble;
using enprop::KlField;
using enprop::solve_axis_eigenproblem;

namespace {

/// Midpoint-rule quadrature of f over [0, 1].
template <typename F>
double integrate(F&& f, int points) {
  double sum = 0.0;
  const double h = 1.0 / points;
  for (int i = 0; i < points; ++i) sum += f((i + 0.5) * h);
  return sum * h;
}

}  // namespace

TEST_CASE("axis frequencies satisfy their transcendental equations") {
  const double L = 1.0;
  auto modes = solve_axis_eigenproblem(8, L);
  REQUIRE(modes.size() == 8);
  const double c = 1.0 / L;
  for (std::size_t t = 0; t < modes.size(); ++t) {
    const double w = modes[t].frequency;
    // Even-index modes are cosines with w*tan(w/2) = c, odd-index modes are
    // sines with tan(w/2) = -w/c. Both checked in product form.
    if (t % 2 == 0) {
      CHECK(std::abs(w * std::sin(w / 2) - c * std::cos(w / 2)) < 1e-9);
      CHECK(modes[t].cosine_branch);
    } else {
      CHECK(std::abs(c * std::sin(w / 2) + w * std::cos(w / 2)) < 1e-9);
      CHECK(!modes[t].cosine_branch);
    }
  }
}

TEST_CASE("axis frequencies are increasing and bracketed") {
  for (double L : {0.25, 1.0, 4.0}) {
    auto modes = solve_axis_eigenproblem(10, L);
    const double pi = std::numbers::pi;
    for (std::size_t t = 0; t < modes.size(); ++t) {
      const double lo = t * pi;
      const double hi = (t + 1) * pi;
      CHECK(modes[t].frequency > lo);
      CHECK(modes[t].frequency < hi);
      if (t > 0) CHECK(modes[t].frequency > modes[t - 1].frequency);
    }
  }
}

TEST_CASE("axis eigenvalues are positive and strictly decreasing") {
  for (double L : {0.5, 1.0, 2.0}) {
    auto modes = solve_axis_eigenproblem(12, L);
    for (std::size_t t = 0; t < modes.size(); ++t) {
      CHECK(modes[t].eigenvalue > 0.0);
      if (t > 0) CHECK(modes[t].eigenvalue < modes[t - 1].eigenvalue);
    }
  }
}

TEST_CASE("axis eigenvalues match an independent integral-operator solve") {
  // Nystrom discretization of the exponential kernel, solved by power
  // iteration with deflation, is the oracle for the analytic values.
  const double L = 1.0;
  auto analytic = solve_axis_eigenproblem(3, L);
  auto numeric = testutil::nystrom_axis_eigenvalues(2000, L, 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(std::abs(numeric[t] - analytic[t].eigenvalue) <
          1e-4 * analytic[t].eigenvalue);
  }
}

TEST_CASE("leading axis eigenvalues capture nearly all the variance") {
  // The eigenvalues of the exponential-kernel operator on [0,1] sum to the
  // integrated variance, which is exactly 1. The tail beyond mode t decays
  // like 2/(pi^2 t), so 20 modes leave roughly one percent behind.
  auto modes = solve_axis_eigenproblem(20, 1.0);
  double total = 0.0;
  for (const auto& m : modes) total += m.eigenvalue;
  CHECK(total >= 0.98);
  CHECK(total <= 1.0 + 1e-12);
}

TEST_CASE("axis eigenfunctions are orthonormal under quadrature") {
  auto modes = solve_axis_eigenproblem(6, 1.0);
  for (std::size_t a = 0; a < modes.size(); ++a) {
    for (std::size_t b = a; b < modes.size(); ++b) {
      const double ip = integrate(
          [&](double x) { return modes[a].evaluate(x) * modes[b].evaluate(x); }, 20000);
      const double expected = (a == b) ? 1.0 : 0.0;
      CHECK(std::abs(ip - expected) < 1e-6);
    }
  }
}

TEST_CASE("axis eigenpairs satisfy the integral equation pointwise") {
  // lambda * phi(x) = integral exp(-|x-y|/L) phi(y) dy, spot-checked by
  // quadrature at a few abscissae.
  const double L = 1.0;
  auto modes = solve_axis_eigenproblem(4, L);
  for (const auto& mode : modes) {
    for (double x : {0.1, 0.5, 0.85}) {
      const double applied = integrate(
          [&](double y) { return std::exp(-std::abs(x - y) / L) * mode.evaluate(y); },
          40000);
      CHECK(std::abs(applied - mode.eigenvalue * mode.evaluate(x)) < 1e-7);
    }
  }
}

TEST_CASE("retained 3D modes are the largest triple products") {
  KlField field(5, 1.0, 0.2, 1.0);
  auto axis = field.axis_eigenpairs();
  REQUIRE(axis.size() >= 3);

  // Brute-force all triples from the axis solve and sort descending.
  std::vector<double> products;
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < axis.size(); ++j)
      for (std::size_t k = 0; k < axis.size(); ++k)
        products.push_back(axis[i].eigenvalue * axis[j].eigenvalue * axis[k].eigenvalue);
  std::sort(products.begin(), products.end(), std::greater<>());

  for (int m = 0; m < 5; ++m) {
    CHECK(field.eigenvalue(m) == doctest::Approx(products[m]).epsilon(1e-12));
    if (m > 0) CHECK(field.eigenvalue(m) <= field.eigenvalue(m - 1));
  }

  // With L = 1 the top mode is the all-first triple and the next three are
  // the permutations that use the second axis mode once.
  CHECK(field.eigenvalue(0) ==
        doctest::Approx(std::pow(axis[0].eigenvalue, 3)).epsilon(1e-12));
  const double second =
      axis[1].eigenvalue * axis[0].eigenvalue * axis[0].eigenvalue;
  for (int m = 1; m <= 3; ++m)
    CHECK(field.eigenvalue(m) == doctest::Approx(second).epsilon(1e-12));
}

TEST_CASE("3D eigenfunctions factor into axis evaluations") {
  KlField field(4, 1.0, 0.1, 1.0);
  std::mt19937_64 rng(77u);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 3> x = {0.5 * (testutil::uniform_pm1(rng) + 1.0),
                               0.5 * (testutil::uniform_pm1(rng) + 1.0),
                               0.5 * (testutil::uniform_pm1(rng) + 1.0)};
    for (int m = 0; m < 4; ++m) {
      const auto& triple = field.axis_modes(m);
      const auto& axis = field.axis_eigenpairs();
      const double expected = axis[triple[0]].evaluate(x[0]) *
                              axis[triple[1]].evaluate(x[1]) *
                              axis[triple[2]].evaluate(x[2]);
      CHECK(field.eigenfunction(m, x) == expected);
    }
  }
}

TEST_CASE("field evaluation reduces to the mean for zero samples or zero sigma") {
  KlField field(5, 2.5, 0.3, 1.0);
  std::vector<double> zeros(5, 0.0);
  std::array<double, 3> x = {0.3, 0.7, 0.1};
  CHECK(field.evaluate<double>(x, zeros) == 2.5);

  KlField flat(5, 2.5, 0.0, 1.0);
  std::mt19937_64 rng(9u);
  std::vector<double> y(5);
  for (auto& v : y) v = testutil::uniform_pm1(rng);
  CHECK(flat.evaluate<double>(x, y) == 2.5);
}

TEST_CASE("field evaluation is linear in the samples") {
  KlField field(6, 1.0, 0.25, 1.0);
  std::array<double, 3> x = {0.2, 0.9, 0.55};
  std::mt19937_64 rng(31u);
  std::vector<double> y(6), unit(6, 0.0);
  for (auto& v : y) v = testutil::uniform_pm1(rng);

  double expected = 1.0;
  for (int m = 0; m < 6; ++m) {
    unit.assign(6, 0.0);
    unit[m] = 1.0;
    expected += (field.evaluate<double>(x, unit) - 1.0) * y[m];
  }
  CHECK(field.evaluate<double>(x, y) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("ensemble field evaluation matches per-component scalar evaluation bitwise") {
  constexpr int S = 4;
  KlField field(5, 1.0, 0.2, 1.0);
  std::mt19937_64 rng(123u);
  for (int trial = 0; trial < 30; ++trial) {
    std::array<double, 3> x = {0.5 * (testutil::uniform_pm1(rng) + 1.0),
                               0.5 * (testutil::uniform_pm1(rng) + 1.0),
                               0.5 * (testutil::uniform_pm1(rng) + 1.0)};
    std::vector<Ensemble<S>> y(5);
    for (auto& v : y)
      for (int e = 0; e < S; ++e) v[e] = testutil::uniform_pm1(rng);

    const Ensemble<S> fused = field.evaluate<Ensemble<S>>(x, y);
    for (int e = 0; e < S; ++e) {
      std::vector<double> ye(5);
      for (int m = 0; m < 5; ++m) ye[m] = y[m][e];
      const double scalar = field.evaluate<double>(x, ye);
      CHECK(fused[e] == scalar);
    }
  }
}

TEST_CASE("field stays positive for unit-interval samples at default parameters") {
  KlField field(5, 1.0, 0.2, 1.0);
  std::mt19937_64 rng(2024u);
  double worst = 1e30;
  for (int trial = 0; trial < 10000; ++trial) {
    std::array<double, 3> x = {0.5 * (testutil::uniform_pm1(rng) + 1.0),
                               0.5 * (testutil::uniform_pm1(rng) + 1.0),
                               0.5 * (testutil::uniform_pm1(rng) + 1.0)};
    std::vector<double> y(5);
    for (auto& v : y) v = testutil::uniform_pm1(rng);
    worst = std::min(worst, field.evaluate<double>(x, y));
  }
  CHECK(worst > 0.0);
}

TEST_CASE("field construction and evaluation reject invalid arguments") {
  CHECK_THROWS_AS(KlField(0, 1.0, 0.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KlField(5, 0.0, 0.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KlField(5, 1.0, -0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KlField(5, 1.0, 0.2, 0.0), std::invalid_argument);

  KlField field(5, 1.0, 0.2, 1.0);
  std::vector<double> wrong(4, 0.0);
  std::array<double, 3> x = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(field.evaluate<double>(x, wrong), std::invalid_argument);
}
