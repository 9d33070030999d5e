#include "enprop/samples.hpp"

#include <random>

namespace enprop {

std::vector<std::vector<double>> draw_samples(std::uint64_t seed, int count, int m) {
  if (m < 1) throw std::invalid_argument("draw_samples: need at least one coordinate");
  if (count < 0) throw std::invalid_argument("draw_samples: negative count");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(count);
  for (auto& y : out) {
    y.resize(m);
    // Top 53 bits give a uniform double in [0,1), mapped onto [-1,1).
    for (auto& v : y) v = double(rng() >> 11) * (2.0 / 9007199254740992.0) - 1.0;
  }
  return out;
}

}  // namespace enprop
