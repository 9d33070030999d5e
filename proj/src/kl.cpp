#include "enprop/kl.hpp"

#include <algorithm>

namespace enprop {

namespace {

// Branch residuals for the frequency equations. Written in product form
// (no tangents) so they stay finite across each bracket.
//   cosine branch: omega * tan(omega/2) = c   on (2k*pi, (2k+1)*pi)
//   sine branch:   c * tan(omega/2) = -omega  on ((2k+1)*pi, (2k+2)*pi)
double cosine_residual(double omega, double c) {
  return omega * std::sin(0.5 * omega) - c * std::cos(0.5 * omega);
}

double sine_residual(double omega, double c) {
  return c * std::sin(0.5 * omega) + omega * std::cos(0.5 * omega);
}

double bisect(double lo, double hi, double c, bool cosine_branch) {
  auto f = [&](double w) { return cosine_branch ? cosine_residual(w, c) : sine_residual(w, c); };
  double flo = f(lo);
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    double fmid = f(mid);
    if ((flo < 0.0) == (fmid < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::vector<AxisMode> solve_axis_eigenproblem(int count, double correlation_length) {
  if (count < 1) throw std::invalid_argument("solve_axis_eigenproblem: count must be positive");
  if (correlation_length <= 0.0)
    throw std::invalid_argument("solve_axis_eigenproblem: correlation length must be positive");
  const double c = 1.0 / correlation_length;

  std::vector<AxisMode> modes(count);
  for (int t = 0; t < count; ++t) {
    const int k = t / 2;
    const bool cosine_branch = (t % 2 == 0);
    const double lo = cosine_branch ? 2 * k * kPi : (2 * k + 1) * kPi;
    const double hi = lo + kPi;
    AxisMode& mode = modes[t];
    mode.cosine_branch = cosine_branch;
    mode.frequency = bisect(lo, hi, c, cosine_branch);
    mode.eigenvalue = 2.0 * c / (mode.frequency * mode.frequency + c * c);
    // L2 norm on [0,1] of cos/sin(omega(x - 1/2)) is 1/2 +- sin(omega)/(2 omega).
    const double half_sinc = std::sin(mode.frequency) / (2.0 * mode.frequency);
    mode.inverse_norm = 1.0 / std::sqrt(cosine_branch ? 0.5 + half_sinc : 0.5 - half_sinc);
  }
  return modes;
}

KlField::KlField(int num_terms, double mean, double sigma, double correlation_length)
    : mean_(mean), sigma_(sigma), corr_length_(correlation_length) {
  if (num_terms < 1) throw std::invalid_argument("KlField: num_terms must be positive");
  if (mean <= 0.0) throw std::invalid_argument("KlField: mean must be positive");
  if (sigma < 0.0) throw std::invalid_argument("KlField: sigma must be non-negative");

  // Axis modes with index above num_terms cannot appear in the top
  // num_terms products: the products (t, 0, 0) for t < num_terms already
  // dominate any product involving a later mode.
  axis_modes_ = solve_axis_eigenproblem(num_terms, correlation_length);

  std::vector<Mode3d> candidates;
  candidates.reserve(static_cast<std::size_t>(num_terms) * num_terms * num_terms);
  for (int a = 0; a < num_terms; ++a)
    for (int b = 0; b < num_terms; ++b)
      for (int d = 0; d < num_terms; ++d) {
        double lambda =
            axis_modes_[a].eigenvalue * axis_modes_[b].eigenvalue * axis_modes_[d].eigenvalue;
        candidates.push_back({{a, b, d}, lambda, std::sqrt(lambda)});
      }
  std::sort(candidates.begin(), candidates.end(), [](const Mode3d& p, const Mode3d& q) {
    if (p.eigenvalue != q.eigenvalue) return p.eigenvalue > q.eigenvalue;
    return p.axis < q.axis;
  });
  modes_.assign(candidates.begin(), candidates.begin() + num_terms);
}

}  // namespace enprop
