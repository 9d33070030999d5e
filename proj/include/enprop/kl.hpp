#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "enprop/ensemble.hpp"

namespace enprop {

///// One eigenpair of the 1D exponential covariance operator on [0, 1]:
/// kernel exp(-|x-x'| / L). Eigenfunctions alternate between cosine (even)
/// and sine (odd) branches about the interval midpoint; frequencies solve
/// the branch's transcendental equation and increase with the index.
struct AxisMode {
  double frequency = 0.0;     // omega
  double eigenvalue = 0.0;    // 2c / (omega^2 + c^2), c = 1/L
  double inverse_norm = 1.0;  // 1/sqrt(1/2 +- sin(omega)/(2 omega))
  bool cosine_branch = true;

  /// Eigenfunction value, normalized to unit L2 norm on [0, 1].
  double evaluate(double x) const {
    const double arg = frequency * (x - 0.5);
    return (cosine_branch ? std::cos(arg) : std::sin(arg)) * inverse_norm;
  }
};

/// Truncated Karhunen-Loeve expansion of a random diffusion coefficient on
/// the unit cube:
///
///   kappa(x, y) = kappa0 + sigma * sum_i sqrt(lambda_i) f_i(x) y_i
///
/// for the separable exponential covariance sigma^2 exp(-|x-x'|_1 / L).
/// Separability makes each 3D eigenpair a product of 1D eigenpairs; the
/// expansion keeps the num_terms largest 3D eigenvalues, breaking ties by
/// lexicographic comparison of the axis frequency triples.
class KlField {
 public:
  KlField(int num_terms, double mean, double sigma, double correlation_length);

  int num_terms() const { return static_cast<int>(modes_.size()); }
  double mean() const { return mean_; }
  double sigma() const { return sigma_; }
  double correlation_length() const { return corr_length_; }

  /// i-th retained 3D eigenvalue, descending.
  double eigenvalue(int i) const { return modes_.at(i).eigenvalue; }

  /// 1D mode indices (x, y, z) whose product forms mode i, 0-based.
  std::array<int, 3> axis_modes(int i) const { return modes_.at(i).axis; }

  /// i-th 3D eigenfunction: product of the three axis eigenfunctions.
  double eigenfunction(int i, const std::array<double, 3>& x) const {
    const auto& mode = modes_.at(i);
    return axis_modes_[mode.axis[0]].evaluate(x[0]) * axis_modes_[mode.axis[1]].evaluate(x[1]) *
           axis_modes_[mode.axis[2]].evaluate(x[2]);
  }

  const std::vector<AxisMode>& axis_eigenpairs() const { return axis_modes_; }

  /// Coefficient value at x for sample coordinates y (length num_terms).
  /// With an ensemble scalar each y_i carries one coordinate per component
  /// while the deterministic eigenfunction factors are computed once and
  /// broadcast, so one evaluation serves the whole ensemble.
  template <typename Scalar>
  Scalar evaluate(const std::array<double, 3>& x, std::span<const Scalar> y) const {
    if (static_cast<int>(y.size()) != num_terms())
      throw std::invalid_argument("KlField::evaluate: sample vector length mismatch");
    Scalar kappa = mean_;
    for (int i = 0; i < num_terms(); ++i) {
      const auto& mode = modes_[i];
      const double factor = sigma_ * mode.sqrt_eigenvalue *
                            axis_modes_[mode.axis[0]].evaluate(x[0]) *
                            axis_modes_[mode.axis[1]].evaluate(x[1]) *
                            axis_modes_[mode.axis[2]].evaluate(x[2]);
      kappa += factor * y[i];
    }
    return kappa;
  }

 private:
  struct Mode3d {
    std::array<int, 3> axis;
    double eigenvalue;
    double sqrt_eigenvalue;
  };

  double mean_;
  double sigma_;
  double corr_length_;
  std::vector<AxisMode> axis_modes_;
  std::vector<Mode3d> modes_;
};

/// Solves the 1D exponential covariance eigenproblem for the first count
/// modes, descending eigenvalue order. Frequencies are bracketed between
/// consecutive multiples of pi and bisected to an interval width of 1e-12.
std::vector<AxisMode> solve_axis_eigenproblem(int count, double correlation_length);

}  // namespace enprop
