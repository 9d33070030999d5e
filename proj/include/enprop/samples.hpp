#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "enprop/ensemble.hpp"

namespace enprop {

/// Draws count coordinate vectors in [-1,1]^m, each coordinate uniform.
/// The sequence is a pure function of the seed.
std::vector<std::vector<double>> draw_samples(std::uint64_t seed, int count, int m);

/// Transposes s consecutive sample vectors, starting at group_start, into
/// the per-coordinate ensemble form the field evaluation consumes:
/// out[j][e] = samples[group_start + e][j].
template <int S>
std::vector<Ensemble<S>> pack_sample_group(const std::vector<std::vector<double>>& samples,
                                           int group_start = 0) {
  if (group_start < 0 || group_start + S > static_cast<int>(samples.size()))
    throw std::invalid_argument("pack_sample_group: not enough samples for the group");
  const std::size_t m = samples[group_start].size();
  for (int e = 1; e < S; ++e)
    if (samples[group_start + e].size() != m)
      throw std::invalid_argument("pack_sample_group: sample lengths differ");
  std::vector<Ensemble<S>> out(m);
  for (std::size_t j = 0; j < m; ++j)
    for (int e = 0; e < S; ++e) out[j][e] = samples[group_start + e][j];
  return out;
}

}  // namespace enprop
