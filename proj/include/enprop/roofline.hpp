#pragma once

#include <stdexcept>

namespace enprop {

/// Bandwidth-bound GFLOP/s ceilings for the sparse matrix-vector product,
/// which performs one multiply-add (2 flops) per stored entry.
struct RooflineBounds {
  double scalar_optimistic;
  double scalar_pessimistic;
  double ensemble_optimistic;
  double ensemble_pessimistic;
};

/// Per stored entry the scalar kernel streams an 8-byte value and a 4-byte
/// column index (12 bytes); an ensemble kernel amortizes the index across
/// the components, leaving 8 bytes per entry. Optimistic bounds assume the
/// source vector is served from cache; pessimistic bounds charge one more
/// 8-byte vector read per entry.
inline RooflineBounds roofline_bounds(double bandwidth_gbs) {
  if (!(bandwidth_gbs > 0.0))
    throw std::invalid_argument("roofline_bounds: bandwidth must be positive");
  return {bandwidth_gbs * 2.0 / 12.0, bandwidth_gbs * 2.0 / 20.0,
          bandwidth_gbs * 2.0 / 8.0, bandwidth_gbs * 2.0 / 16.0};
}

}  // namespace enprop
