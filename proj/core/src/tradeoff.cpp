#include "tworate/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace tworate {

double j_star(const SourceModel& m, double lambda, double d, const SearchBudget& budget) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and >= 0");
  HelperSearchResult r = optimize_helper_point(m, d, lambda, std::nullopt, budget);
  if (!r.feasible)
    throw std::runtime_error("support-line search found no feasible scheme");
  return r.objective;
}

SlopeCertificate slope_certificate(const SourceModel& m, double d,
                                   std::span<const double> r1_grid,
                                   const SearchBudget& budget) {
  SlopeCertificate cert;
  cert.frontier = trace_frontier_helper(m, d, r1_grid, budget);
  for (std::size_t i = 0; i + 1 < cert.frontier.size(); ++i) {
    const auto& a = cert.frontier[i];
    const auto& b = cert.frontier[i + 1];
    if (!std::isfinite(a.rate) || !std::isfinite(b.rate)) continue;
    const double dr1 = b.r1 - a.r1;
    if (dr1 <= 0.0) continue;
    cert.max_abs_slope = std::max(cert.max_abs_slope, (a.rate - b.rate) / dr1);
  }
  return cert;
}

SectionResult independent_rates_section(const SourceModel& m, double re, double rd,
                                        double d, const SearchBudget& budget) {
  if (!(re >= 0.0) || !(rd >= 0.0) || !std::isfinite(re) || !std::isfinite(rd))
    throw std::invalid_argument("link rates must be finite and >= 0");
  if (re < rd)
    throw std::invalid_argument(
        "encoder-side helper link below the decoder-side link is not supported");
  // With re >= rd, the encoder-side link is never the bottleneck: the region
  // is the single-link section at rd.  Sweep up to rd so time sharing with
  // cheaper helper points is available.
  std::vector<double> grid;
  for (int i = 0; i <= 3; ++i) grid.push_back(rd * i / 3.0);
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<FrontierPoint> env = trace_frontier_helper(m, d, grid, budget);
  SectionResult s;
  s.re = re;
  s.rd = rd;
  s.d = d;
  s.rate = env.back().rate;
  return s;
}

BinnedRate binned_encoder_rate(const SourceModel& m, const Kernel& v_given_y) {
  if (m.chain != ChainDirection::YXZ)
    throw std::invalid_argument("binned-rate analysis needs the chain y - x - z");
  if (v_given_y.target.name != "v" || v_given_y.given.size() != 1 ||
      v_given_y.given[0].name != "y")
    throw std::invalid_argument("description kernel must produce 'v' from 'y' alone");

  const Kernel ks[] = {v_given_y};
  JointPmf joint = extend_with_kernels(m.pxyz, ks);
  const double ivy = joint.mutual_information({"v"}, {"y"});
  const double ivx = joint.mutual_information({"v"}, {"x"});
  const double ivz = joint.mutual_information({"v"}, {"z"});
  BinnedRate r;
  r.re_min = std::max(0.0, ivy - ivx);
  r.r_prime = std::max(0.0, ivy - ivz);
  return r;
}

}  // namespace tworate
