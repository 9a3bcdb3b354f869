// Shared helpers for the test binaries.  bf_* functions are deliberately
// independent reimplementations (plain digit arithmetic and std::map
// accumulation) used as cross-checks against the library's fast paths.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tworate/prob.hpp"

namespace testsupport {

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline std::vector<int> digits_of(const tworate::JointPmf& j, std::size_t flat) {
  const auto& vars = j.variables();
  std::vector<int> d(vars.size());
  for (int i = static_cast<int>(vars.size()) - 1; i >= 0; --i) {
    const auto c = static_cast<std::size_t>(vars[static_cast<std::size_t>(i)].cardinality);
    d[static_cast<std::size_t>(i)] = static_cast<int>(flat % c);
    flat /= c;
  }
  return d;
}

// I(A;B|C) straight from the definition: sum p log2( p(ab|c)/p(a|c)p(b|c) ),
// marginals held in maps keyed by outcome sub-tuples.
inline double bf_cmi(const tworate::JointPmf& j, const std::vector<std::string>& a,
                     const std::vector<std::string>& b, const std::vector<std::string>& c) {
  auto pick = [&](const std::vector<int>& digits, const std::vector<std::string>& names) {
    std::vector<int> out;
    for (const auto& n : names) out.push_back(digits[static_cast<std::size_t>(j.index_of(n))]);
    return out;
  };
  std::map<std::vector<int>, double> pabc, pac, pbc, pc;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double p = j.values()[i];
    if (p <= 0.0) continue;
    const std::vector<int> d = digits_of(j, i);
    std::vector<int> ka = pick(d, a), kb = pick(d, b), kc = pick(d, c);
    std::vector<int> kac = ka, kbc = kb, kabc = ka;
    kac.insert(kac.end(), kc.begin(), kc.end());
    kbc.insert(kbc.end(), kc.begin(), kc.end());
    kabc.insert(kabc.end(), kb.begin(), kb.end());
    kabc.insert(kabc.end(), kc.begin(), kc.end());
    pabc[kabc] += p;
    pac[kac] += p;
    pbc[kbc] += p;
    pc[kc] += p;
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double p = j.values()[i];
    if (p <= 0.0) continue;
    const std::vector<int> d = digits_of(j, i);
    std::vector<int> ka = pick(d, a), kb = pick(d, b), kc = pick(d, c);
    std::vector<int> kac = ka, kbc = kb, kabc = ka;
    kac.insert(kac.end(), kc.begin(), kc.end());
    kbc.insert(kbc.end(), kc.begin(), kc.end());
    kabc.insert(kabc.end(), kb.begin(), kb.end());
    kabc.insert(kabc.end(), kc.begin(), kc.end());
    mi += p * std::log2(pabc[kabc] * (c.empty() ? 1.0 : pc[kc]) / (pac[kac] * pbc[kbc]));
  }
  return mi;
}

// random joint over the given shape, Dirichlet(1)-ish, deterministic
inline tworate::JointPmf random_joint(std::vector<tworate::Variable> vars, std::uint64_t seed) {
  std::size_t n = 1;
  for (const auto& v : vars) n *= static_cast<std::size_t>(v.cardinality);
  std::vector<double> t(n);
  std::uint64_t s = seed;
  auto next = [&s]() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  for (auto& x : t)
    x = -std::log(1.0 - static_cast<double>(next() >> 11) * 0x1.0p-53);
  return tworate::JointPmf::from_unnormalized(std::move(vars), std::move(t));
}

}  // namespace testsupport
