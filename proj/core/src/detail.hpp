// Internal helpers shared by the library sources; not installed.
#pragma once

#include <cstddef>
#include <vector>

#include "tworate/prob.hpp"

namespace tworate::detail {

// Walks every cell of a row-major table over `vars`, calling f(flat_index,
// out_index) where out_index advances with stride ostride[d] whenever digit d
// increments.  Lets marginal-style accumulations avoid per-cell divisions.
template <typename F>
void for_each_cell(const std::vector<Variable>& vars,
                   const std::vector<std::size_t>& ostride, F&& f) {
  const int n = static_cast<int>(vars.size());
  std::vector<int> digit(vars.size(), 0);
  std::size_t total = 1;
  for (const auto& v : vars) total *= static_cast<std::size_t>(v.cardinality);
  std::size_t oidx = 0;
  for (std::size_t i = 0; i < total; ++i) {
    f(i, oidx);
    for (int d = n - 1; d >= 0; --d) {
      ++digit[d];
      oidx += ostride[d];
      if (digit[d] < vars[d].cardinality) break;
      digit[d] = 0;
      oidx -= static_cast<std::size_t>(vars[d].cardinality) * ostride[d];
    }
  }
}

// 64-bit splittable generator (splitmix64); deterministic across platforms,
// used wherever the library needs seeded randomness.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() {   // in [0,1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL));
  g.next();
  return g.next();
}

}  // namespace tworate::detail
