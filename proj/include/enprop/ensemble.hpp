#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <type_traits>

// Optional operation tally, enabled per-target with -DENPROP_COUNT_FLOPS.
// Counts one flop per component for every arithmetic operation on ensembles.
#if defined(ENPROP_COUNT_FLOPS)
namespace enprop::flop_tally {
inline long long count = 0;
inline void reset() { count = 0; }
}  // namespace enprop::flop_tally
#define ENPROP_TALLY_FLOPS(n) (::enprop::flop_tally::count += (n))
#else
#define ENPROP_TALLY_FLOPS(n) ((void)0)
#endif

namespace enprop {

/// Fixed-size ensemble of double-precision samples propagated together.
///
/// Behaves like a built-in floating-point type: componentwise arithmetic,
/// cmath overloads, and comparisons decided by the first component. Plain
/// value type with no dynamic allocation, so arrays of ensembles keep the
/// s component slots of each entry contiguous in memory.
template <int S>
class Ensemble {
  static_assert(S >= 1, "ensemble size must be at least 1");

 public:
  using value_type = double;
  static constexpr int size = S;

  Ensemble() = default;

  /// Broadcast: every component equals v.
  Ensemble(double v) {
    for (int e = 0; e < S; ++e) v_[e] = v;
  }

  double& operator[](int e) { return v_[e]; }
  const double& operator[](int e) const { return v_[e]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  Ensemble& operator+=(const Ensemble& a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] += a.v_[e];
    return *this;
  }
  Ensemble& operator-=(const Ensemble& a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] -= a.v_[e];
    return *this;
  }
  Ensemble& operator*=(const Ensemble& a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] *= a.v_[e];
    return *this;
  }
  Ensemble& operator/=(const Ensemble& a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] /= a.v_[e];
    return *this;
  }

  Ensemble& operator+=(double a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] += a;
    return *this;
  }
  Ensemble& operator-=(double a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] -= a;
    return *this;
  }
  Ensemble& operator*=(double a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] *= a;
    return *this;
  }
  Ensemble& operator/=(double a) {
    ENPROP_TALLY_FLOPS(S);
    for (int e = 0; e < S; ++e) v_[e] /= a;
    return *this;
  }

  // Comparisons use the first component only. Hidden friends so that a plain
  // double on either side broadcasts before comparing.
  friend bool operator<(const Ensemble& a, const Ensemble& b) { return a[0] < b[0]; }
  friend bool operator>(const Ensemble& a, const Ensemble& b) { return a[0] > b[0]; }
  friend bool operator<=(const Ensemble& a, const Ensemble& b) { return a[0] <= b[0]; }
  friend bool operator>=(const Ensemble& a, const Ensemble& b) { return a[0] >= b[0]; }
  friend bool operator==(const Ensemble& a, const Ensemble& b) { return a[0] == b[0]; }

 private:
  std::array<double, S> v_;
};

static_assert(sizeof(Ensemble<4>) == 4 * sizeof(double));
static_assert(std::is_trivially_copyable_v<Ensemble<4>>);

// Arithmetic: componentwise, evaluated in component order 0..S-1.

template <int S>
inline Ensemble<S> operator+(Ensemble<S> a, const Ensemble<S>& b) { return a += b; }
template <int S>
inline Ensemble<S> operator-(Ensemble<S> a, const Ensemble<S>& b) { return a -= b; }
template <int S>
inline Ensemble<S> operator*(Ensemble<S> a, const Ensemble<S>& b) { return a *= b; }
template <int S>
inline Ensemble<S> operator/(Ensemble<S> a, const Ensemble<S>& b) { return a /= b; }

template <int S>
inline Ensemble<S> operator+(Ensemble<S> a, double b) { return a += b; }
template <int S>
inline Ensemble<S> operator-(Ensemble<S> a, double b) { return a -= b; }
template <int S>
inline Ensemble<S> operator*(Ensemble<S> a, double b) { return a *= b; }
template <int S>
inline Ensemble<S> operator/(Ensemble<S> a, double b) { return a /= b; }

template <int S>
inline Ensemble<S> operator+(double a, const Ensemble<S>& b) {
  ENPROP_TALLY_FLOPS(S);
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = a + b[e];
  return c;
}
template <int S>
inline Ensemble<S> operator-(double a, const Ensemble<S>& b) {
  ENPROP_TALLY_FLOPS(S);
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = a - b[e];
  return c;
}
template <int S>
inline Ensemble<S> operator*(double a, const Ensemble<S>& b) {
  ENPROP_TALLY_FLOPS(S);
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = a * b[e];
  return c;
}
template <int S>
inline Ensemble<S> operator/(double a, const Ensemble<S>& b) {
  ENPROP_TALLY_FLOPS(S);
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = a / b[e];
  return c;
}

template <int S>
inline Ensemble<S> operator-(const Ensemble<S>& a) {
  ENPROP_TALLY_FLOPS(S);
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = -a[e];
  return c;
}
template <int S>
inline Ensemble<S> operator+(const Ensemble<S>& a) { return a; }

// cmath-style overloads, applied per component.

template <int S>
inline Ensemble<S> sqrt(const Ensemble<S>& a) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = std::sqrt(a[e]);
  return c;
}
template <int S>
inline Ensemble<S> abs(const Ensemble<S>& a) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = std::fabs(a[e]);
  return c;
}
template <int S>
inline Ensemble<S> fabs(const Ensemble<S>& a) { return abs(a); }
template <int S>
inline Ensemble<S> exp(const Ensemble<S>& a) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = std::exp(a[e]);
  return c;
}
template <int S>
inline Ensemble<S> log(const Ensemble<S>& a) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = std::log(a[e]);
  return c;
}
template <int S>
inline Ensemble<S> sin(const Ensemble<S>& a) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = std::sin(a[e]);
  return c;
}
template <int S>
inline Ensemble<S> cos(const Ensemble<S>& a) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = std::cos(a[e]);
  return c;
}
template <int S>
inline Ensemble<S> pow(const Ensemble<S>& a, double p) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = std::pow(a[e], p);
  return c;
}

template <int S>
inline Ensemble<S> min(const Ensemble<S>& a, const Ensemble<S>& b) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = a[e] < b[e] ? a[e] : b[e];
  return c;
}
template <int S>
inline Ensemble<S> max(const Ensemble<S>& a, const Ensemble<S>& b) {
  Ensemble<S> c;
  for (int e = 0; e < S; ++e) c[e] = a[e] > b[e] ? a[e] : b[e];
  return c;
}
template <int S>
inline Ensemble<S> min(const Ensemble<S>& a, double b) { return min(a, Ensemble<S>(b)); }
template <int S>
inline Ensemble<S> max(const Ensemble<S>& a, double b) { return max(a, Ensemble<S>(b)); }
template <int S>
inline Ensemble<S> min(double a, const Ensemble<S>& b) { return min(Ensemble<S>(a), b); }
template <int S>
inline Ensemble<S> max(double a, const Ensemble<S>& b) { return max(Ensemble<S>(a), b); }

/// Sum of all components, accumulated left to right. Identity for a plain
/// scalar, so generic reductions can call it on any supported scalar type.
inline double reduce_sum(double x) { return x; }

template <int S>
inline double reduce_sum(const Ensemble<S>& a) {
  double acc = 0.0;
  for (int e = 0; e < S; ++e) acc += a[e];
  return acc;
}

/// Type trait giving generic code a componentwise view of any supported
/// scalar. A plain double is an ensemble of size 1 whose single component
/// is the value itself.
template <typename T>
struct EnsembleTraits;

template <>
struct EnsembleTraits<double> {
  using value_type = double;
  static constexpr int ensemble_size = 1;
  static const double& coeff(const double& x, int) { return x; }
  static double& coeff(double& x, int) { return x; }
};

template <int S>
struct EnsembleTraits<Ensemble<S>> {
  using value_type = double;
  static constexpr int ensemble_size = S;
  static const double& coeff(const Ensemble<S>& x, int e) { return x[e]; }
  static double& coeff(Ensemble<S>& x, int e) { return x[e]; }
};

/// Applies a scalar procedure (which may branch) to each component of x
/// separately and collects the results. For a plain double the body runs
/// once. This recovers per-sample branch behavior that a single vectorized
/// evaluation of diverging code cannot.
template <typename Scalar, typename Body>
inline Scalar component_loop(const Scalar& x, Body&& body) {
  using ET = EnsembleTraits<Scalar>;
  Scalar y{};
  for (int e = 0; e < ET::ensemble_size; ++e)
    ET::coeff(y, e) = body(ET::coeff(x, e));
  return y;
}

/// True when every component of a and b is identical at the bit level
/// (unlike operator==, which follows first-component semantics).
template <typename Scalar>
inline bool bitwise_equal(const Scalar& a, const Scalar& b) {
  using ET = EnsembleTraits<Scalar>;
  for (int e = 0; e < ET::ensemble_size; ++e)
    if (ET::coeff(a, e) != ET::coeff(b, e)) return false;
  return true;
}

/// Renders as [c0, c1, ..., c{s-1}] with 17 significant digits, enough to
/// round-trip doubles exactly.
template <typename Scalar>
inline std::string to_debug_string(const Scalar& x) {
  using ET = EnsembleTraits<Scalar>;
  std::string out = "[";
  char buf[40];
  for (int e = 0; e < ET::ensemble_size; ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", ET::coeff(x, e));
    if (e > 0) out += ", ";
    out += buf;
  }
  out += "]";
  return out;
}

template <int S>
inline std::ostream& operator<<(std::ostream& os, const Ensemble<S>& a) {
  return os << to_debug_string(a);
}

}  // namespace enprop
