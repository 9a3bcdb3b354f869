#include "tworate/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "detail.hpp"

namespace tworate {
namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::set<std::string> name_set(const std::vector<Variable>& vars) {
  std::set<std::string> s;
  for (const auto& v : vars) s.insert(v.name);
  return s;
}

void check_kernel_shape(const Kernel& k, const std::string& target,
                        const std::set<std::string>& expected_given) {
  require(k.target.name == target,
          fmt::format("kernel target must be '{}', got '{}'", target, k.target.name));
  require(name_set(k.given) == expected_given,
          fmt::format("kernel for '{}' must condition on exactly the declared set", target));
}

// Reconstruction rules may use any subset of the variables the decoder sees.
void check_recon_args(const ReconstructionMap& map, const JointPmf& j,
                      const std::set<std::string>& allowed, const DistortionMeasure& d) {
  map.validate();
  require(map.recon.cardinality == d.recon.cardinality,
          "reconstruction map alphabet does not match the distortion measure");
  for (const auto& a : map.args) {
    require(allowed.count(a.name) == 1,
            fmt::format("reconstruction map uses '{}' which the decoder does not see", a.name));
    require(j.variable(a.name).cardinality == a.cardinality,
            fmt::format("reconstruction map cardinality mismatch on '{}'", a.name));
  }
}

double side_distortion(const JointPmf& joint, const std::optional<ReconstructionMap>& map,
                       const std::vector<std::string>& decoder_sees,
                       const std::string& source, const DistortionMeasure& d) {
  if (map) {
    std::set<std::string> allowed(decoder_sees.begin(), decoder_sees.end());
    check_recon_args(*map, joint, allowed, d);
    return distortion_with_map(joint, *map, source, d);
  }
  return optimal_reconstruction(joint, decoder_sees, source, d).distortion;
}

}  // namespace

// ------------------------------------------------------------ SourceModel

SourceModel SourceModel::create(JointPmf pxyz, ChainDirection chain,
                                std::optional<DistortionMeasure> dx,
                                std::optional<DistortionMeasure> dz) {
  require(pxyz.variables().size() == 3 && pxyz.has_variable("x") &&
              pxyz.has_variable("y") && pxyz.has_variable("z"),
          "source joint must be over exactly the variables x, y, z");
  const bool ok = (chain == ChainDirection::YXZ)
                      ? pxyz.markov_holds({"y"}, {"x"}, {"z"})
                      : pxyz.markov_holds({"y"}, {"z"}, {"x"});
  if (!ok) {
    const char* c = (chain == ChainDirection::YXZ) ? "y - x - z" : "y - z - x";
    throw std::invalid_argument(fmt::format("declared chain {} does not hold numerically", c));
  }
  if (dx) {
    require(dx->source == "x", "dx must score the variable x");
    dx->validate(pxyz.variable("x").cardinality);
  }
  if (dz) {
    require(dz->source == "z", "dz must score the variable z");
    dz->validate(pxyz.variable("z").cardinality);
  }
  return SourceModel{std::move(pxyz), chain, std::move(dx), std::move(dz)};
}

SourceModel SourceModel::binary_symmetric(double px1, double fy, double fz) {
  require(px1 >= 0.0 && px1 <= 1.0, "px1 outside [0,1]");
  JointPmf px({{"x", 2}}, {1.0 - px1, px1});
  std::vector<Kernel> ks;
  ks.push_back(Kernel::symmetric_binary({"x", 2}, {"y", 2}, fy));
  ks.push_back(Kernel::symmetric_binary({"x", 2}, {"z", 2}, fz));
  JointPmf joint = extend_with_kernels(px, ks);
  return create(std::move(joint), ChainDirection::YXZ,
                DistortionMeasure::hamming("x", 2), DistortionMeasure::hamming("z", 2));
}

// ----------------------------------------------------- reconstruction rules

void ReconstructionMap::validate() const {
  std::size_t n = 1;
  for (const auto& a : args) {
    require(a.cardinality >= 1 && !a.name.empty(), "reconstruction map: bad argument variable");
    n *= static_cast<std::size_t>(a.cardinality);
  }
  require(recon.cardinality >= 1, "reconstruction map: empty reconstruction alphabet");
  require(symbol.size() == n,
          fmt::format("reconstruction map table has {} entries, expected {}", symbol.size(), n));
  for (int s : symbol)
    require(s >= 0 && s < recon.cardinality, "reconstruction map symbol outside alphabet");
}

std::size_t ReconstructionMap::arg_index(std::span<const int> outcome) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < args.size(); ++i)
    idx = idx * static_cast<std::size_t>(args[i].cardinality) + static_cast<std::size_t>(outcome[i]);
  return idx;
}

ReconstructionResult optimal_reconstruction(const JointPmf& j,
                                            const std::vector<std::string>& args,
                                            const std::string& target,
                                            const DistortionMeasure& d) {
  const Variable& tv = j.variable(target);
  d.validate(tv.cardinality);
  require(!args.empty(), "optimal_reconstruction: empty argument list");

  std::vector<std::string> keep = args;
  keep.push_back(target);
  JointPmf m = j.marginal(keep);

  std::vector<Variable> avars;
  std::size_t rows = 1;
  for (const auto& a : args) {
    avars.push_back(j.variable(a));
    rows *= static_cast<std::size_t>(avars.back().cardinality);
  }
  const int rc = d.recon.cardinality;
  // score[a][r] = sum_t p(args=a, target=t) * d(t, r)
  std::vector<double> score(rows * static_cast<std::size_t>(rc), 0.0);

  // strides of the caller's args order and of the target inside m's layout
  const auto& mv = m.variables();
  std::vector<std::size_t> mstride(mv.size(), 1);
  for (int i = static_cast<int>(mv.size()) - 2; i >= 0; --i)
    mstride[static_cast<std::size_t>(i)] =
        mstride[static_cast<std::size_t>(i) + 1] * static_cast<std::size_t>(mv[i + 1].cardinality);
  std::vector<std::size_t> apos;
  for (const auto& a : args) apos.push_back(static_cast<std::size_t>(m.index_of(a)));
  const std::size_t tpos = static_cast<std::size_t>(m.index_of(target));

  const auto& vals = m.values();
  std::vector<int> digit(mv.size(), 0);
  for (std::size_t cell = 0; cell < vals.size(); ++cell) {
    const double p = vals[cell];
    if (p > 0.0) {
      std::size_t aidx = 0;
      for (std::size_t i = 0; i < apos.size(); ++i)
        aidx = aidx * static_cast<std::size_t>(avars[i].cardinality) +
               static_cast<std::size_t>(digit[apos[i]]);
      const int t = digit[tpos];
      for (int r = 0; r < rc; ++r)
        score[aidx * static_cast<std::size_t>(rc) + static_cast<std::size_t>(r)] += p * d.at(t, r);
    }
    for (int k = static_cast<int>(mv.size()) - 1; k >= 0; --k) {
      if (++digit[static_cast<std::size_t>(k)] < mv[static_cast<std::size_t>(k)].cardinality) break;
      digit[static_cast<std::size_t>(k)] = 0;
    }
  }

  ReconstructionResult res;
  res.map.args = std::move(avars);
  res.map.recon = d.recon;
  res.map.symbol.resize(rows);
  double total = 0.0;
  for (std::size_t a = 0; a < rows; ++a) {
    int best = 0;
    double best_score = score[a * static_cast<std::size_t>(rc)];
    for (int r = 1; r < rc; ++r) {
      const double s = score[a * static_cast<std::size_t>(rc) + static_cast<std::size_t>(r)];
      if (s < best_score) {   // ties resolve to the smallest symbol
        best_score = s;
        best = r;
      }
    }
    res.map.symbol[a] = best;
    total += best_score;
  }
  res.distortion = total;
  return res;
}

double distortion_with_map(const JointPmf& j, const ReconstructionMap& m,
                           const std::string& target, const DistortionMeasure& d) {
  m.validate();
  const Variable& tv = j.variable(target);
  d.validate(tv.cardinality);
  require(m.recon.cardinality == d.recon.cardinality,
          "distortion_with_map: reconstruction alphabet mismatch");

  std::vector<std::string> keep;
  for (const auto& a : m.args) {
    require(j.variable(a.name).cardinality == a.cardinality,
            fmt::format("distortion_with_map: cardinality mismatch on '{}'", a.name));
    keep.push_back(a.name);
  }
  keep.push_back(target);
  JointPmf mar = j.marginal(keep);

  const auto& mv = mar.variables();
  std::vector<std::size_t> apos;
  for (const auto& a : m.args) apos.push_back(static_cast<std::size_t>(mar.index_of(a.name)));
  const std::size_t tpos = static_cast<std::size_t>(mar.index_of(target));

  const auto& vals = mar.values();
  std::vector<int> digit(mv.size(), 0);
  std::vector<int> atuple(m.args.size(), 0);
  double e = 0.0;
  for (std::size_t cell = 0; cell < vals.size(); ++cell) {
    const double p = vals[cell];
    if (p > 0.0) {
      for (std::size_t i = 0; i < apos.size(); ++i) atuple[i] = digit[apos[i]];
      const int r = m.symbol[m.arg_index(atuple)];
      e += p * d.at(digit[tpos], r);
    }
    for (int k = static_cast<int>(mv.size()) - 1; k >= 0; --k) {
      if (++digit[static_cast<std::size_t>(k)] < mv[static_cast<std::size_t>(k)].cardinality) break;
      digit[static_cast<std::size_t>(k)] = 0;
    }
  }
  return e;
}

// --------------------------------------------------------------- evaluators

RatePoint evaluate_rate_point(const SourceModel& m, const AuxScheme& s) {
  require(m.chain == ChainDirection::YXZ, "two-way evaluation needs the chain y - x - z");
  require(m.dx.has_value() && m.dz.has_value(), "two-way evaluation needs both distortion measures");
  check_kernel_shape(s.u_given_y, "u", {"y"});
  check_kernel_shape(s.v_given_uz, "v", {"u", "z"});
  check_kernel_shape(s.w_given_uvx, "w", {"u", "v", "x"});

  const Kernel ks[] = {s.u_given_y, s.v_given_uz, s.w_given_uvx};
  JointPmf joint = extend_with_kernels(m.pxyz, ks);

  RatePoint p;
  p.r1 = joint.conditional_mutual_information({"y"}, {"u"}, {"z"});
  p.r2 = joint.conditional_mutual_information({"z"}, {"v"}, {"u", "x"});
  p.r3 = joint.conditional_mutual_information({"x"}, {"w"}, {"u", "v", "z"});
  p.dz = side_distortion(joint, s.zhat, {"u", "v", "x"}, "z", *m.dz);
  p.dx = side_distortion(joint, s.xhat, {"u", "w", "z"}, "x", *m.dx);
  return p;
}

HelperRatePoint evaluate_helper_point(const SourceModel& m, const HelperScheme& s) {
  require(m.chain == ChainDirection::YXZ, "helper evaluation needs the chain y - x - z");
  require(m.dx.has_value(), "helper evaluation needs a distortion measure for x");
  check_kernel_shape(s.u_given_y, "u", {"y"});
  check_kernel_shape(s.w_given_xu, "w", {"x", "u"});

  const Kernel ks[] = {s.u_given_y, s.w_given_xu};
  JointPmf joint = extend_with_kernels(m.pxyz, ks);

  HelperRatePoint p;
  p.r1 = joint.conditional_mutual_information({"y"}, {"u"}, {"z"});
  p.rate = joint.conditional_mutual_information({"x"}, {"w"}, {"u", "z"});
  p.distortion = side_distortion(joint, s.xhat, {"u", "w", "z"}, "x", *m.dx);
  return p;
}

HelperRatePoint evaluate_yzx(const SourceModel& m, const YzxScheme& s) {
  require(m.chain == ChainDirection::YZX, "this evaluation needs the chain y - z - x");
  require(m.dx.has_value(), "evaluation needs a distortion measure for x");
  check_kernel_shape(s.u_given_y, "u", {"y"});
  check_kernel_shape(s.v_given_xu, "v", {"x", "u"});

  const Kernel ks[] = {s.u_given_y, s.v_given_xu};
  JointPmf joint = extend_with_kernels(m.pxyz, ks);

  HelperRatePoint p;
  p.r1 = joint.conditional_mutual_information({"u"}, {"y"}, {"x"});
  p.rate = joint.conditional_mutual_information({"x"}, {"v"}, {"u", "z"});
  p.distortion = side_distortion(joint, s.xhat, {"u", "v", "z"}, "x", *m.dx);
  return p;
}

MultiStageRates evaluate_multistage(const SourceModel& m, const MultiStageScheme& s) {
  require(m.chain == ChainDirection::YXZ, "multi-stage evaluation needs the chain y - x - z");
  require(m.dx.has_value() && m.dz.has_value(), "multi-stage evaluation needs both distortion measures");
  require(!s.stages.empty(), "multi-stage scheme needs at least one stage");
  check_kernel_shape(s.u_given_y, "u", {"y"});

  const int K = static_cast<int>(s.stages.size());
  std::vector<std::string> vnames, wnames;
  std::vector<Kernel> ks;
  ks.push_back(s.u_given_y);
  for (int k = 0; k < K; ++k) {
    const std::string vk = fmt::format("v{}", k + 1);
    const std::string wk = fmt::format("w{}", k + 1);
    std::set<std::string> vgiven = {"z", "u"};
    vgiven.insert(vnames.begin(), vnames.end());
    vgiven.insert(wnames.begin(), wnames.end());
    check_kernel_shape(s.stages[static_cast<std::size_t>(k)].v, vk, vgiven);
    vnames.push_back(vk);
    std::set<std::string> wgiven = {"x", "u"};
    wgiven.insert(vnames.begin(), vnames.end());
    wgiven.insert(wnames.begin(), wnames.end());
    check_kernel_shape(s.stages[static_cast<std::size_t>(k)].w, wk, wgiven);
    wnames.push_back(wk);
    ks.push_back(s.stages[static_cast<std::size_t>(k)].v);
    ks.push_back(s.stages[static_cast<std::size_t>(k)].w);
  }

  JointPmf joint = extend_with_kernels(m.pxyz, ks);

  MultiStageRates out;
  out.ry = joint.mutual_information({"u"}, {"y"});
  for (int k = 0; k < K; ++k) {
    std::vector<std::string> vcond = {"x", "u"};   // history before V_k
    vcond.insert(vcond.end(), vnames.begin(), vnames.begin() + k);
    vcond.insert(vcond.end(), wnames.begin(), wnames.begin() + k);
    out.rz_stage.push_back(joint.conditional_mutual_information(
        {"z"}, {vnames[static_cast<std::size_t>(k)]}, vcond));

    std::vector<std::string> wcond = {"z", "u"};   // history before W_k, plus V_k
    wcond.insert(wcond.end(), vnames.begin(), vnames.begin() + k + 1);
    wcond.insert(wcond.end(), wnames.begin(), wnames.begin() + k);
    out.rx_stage.push_back(joint.conditional_mutual_information(
        {"x"}, {wnames[static_cast<std::size_t>(k)]}, wcond));
  }
  for (double r : out.rz_stage) out.rz += r;
  for (double r : out.rx_stage) out.rx += r;

  std::vector<std::string> all_vw = vnames;
  all_vw.insert(all_vw.end(), wnames.begin(), wnames.end());
  out.rz_aggregate = joint.conditional_mutual_information({"z"}, all_vw, {"x", "u"});
  out.rx_aggregate = joint.conditional_mutual_information({"x"}, all_vw, {"z", "u"});

  std::vector<std::string> xhat_sees = {"u"};
  xhat_sees.insert(xhat_sees.end(), wnames.begin(), wnames.end());
  xhat_sees.push_back("z");
  std::vector<std::string> zhat_sees = {"u"};
  zhat_sees.insert(zhat_sees.end(), vnames.begin(), vnames.end());
  zhat_sees.push_back("x");
  out.dx = side_distortion(joint, s.xhat, xhat_sees, "x", *m.dx);
  out.dz = side_distortion(joint, s.zhat, zhat_sees, "z", *m.dz);
  return out;
}

// ----------------------------------------------------------- envelope

std::vector<FrontierPoint> lower_convex_envelope(std::vector<FrontierPoint> pts,
                                                 std::span<const double> grid) {
  std::erase_if(pts, [](const FrontierPoint& p) {
    return !std::isfinite(p.r1) || !std::isfinite(p.rate);
  });
  std::vector<FrontierPoint> out;
  if (pts.empty()) {
    for (double g : grid)
      out.push_back({g, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()});
    return out;
  }
  std::sort(pts.begin(), pts.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.r1 != b.r1) return a.r1 < b.r1;
    if (a.rate != b.rate) return a.rate < b.rate;
    return a.distortion < b.distortion;
  });
  // a cheaper point at smaller r1 is achievable at every larger cap
  std::vector<FrontierPoint> mono;
  for (const auto& p : pts) {
    if (!mono.empty() && mono.back().r1 == p.r1) continue;       // keep min rate per r1
    if (!mono.empty() && p.rate >= mono.back().rate)
      mono.push_back({p.r1, mono.back().rate, mono.back().distortion});
    else
      mono.push_back(p);
  }
  // lower hull over (r1, rate); vertices keep their distortion certificates
  std::vector<FrontierPoint> hull;
  for (const auto& p : mono) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      const double cross = (b.r1 - a.r1) * (p.rate - a.rate) - (b.rate - a.rate) * (p.r1 - a.r1);
      if (cross <= 0.0) hull.pop_back();   // b on or above segment a-p
      else break;
    }
    hull.push_back(p);
  }
  for (double g : grid) {
    if (g < hull.front().r1) {
      out.push_back({g, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()});
      continue;
    }
    if (g >= hull.back().r1) {
      out.push_back({g, hull.back().rate, hull.back().distortion});
      continue;
    }
    std::size_t hi = 1;
    while (hull[hi].r1 < g) ++hi;
    const auto& a = hull[hi - 1];
    const auto& b = hull[hi];
    const double t = (g - a.r1) / (b.r1 - a.r1);
    out.push_back({g, a.rate + t * (b.rate - a.rate),
                   a.distortion + t * (b.distortion - a.distortion)});
  }
  return out;
}

}  // namespace tworate
