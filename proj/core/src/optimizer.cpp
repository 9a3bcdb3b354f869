// Search over the feasible kernel families: multi-start (structured starts
// plus seeded random ones) followed by coordinate-wise refinement, moving one
// conditional-pmf row at a time along blends toward alphabet vertices.
// Distortion (and helper-rate-cap) constraints enter through a ramped
// penalty; every evaluation is also checked strictly, and only strictly
// feasible candidates can win.  Restarts run in parallel (TWORATE_WORKERS
// caps the thread count) but the merge is by (objective, then lexicographic
// kernel encoding), so results do not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "detail.hpp"
#include "tworate/region.hpp"

namespace tworate {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMuCap = 1e8;
constexpr double kImprove = 1e-12;

int worker_count(int tasks) {
  int cap = 0;
  if (const char* env = std::getenv("TWORATE_WORKERS")) {
    cap = std::atoi(env);
    if (cap < 1) cap = 1;
  }
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int n = (cap > 0) ? std::min(cap, hw) : hw;
  return std::max(1, std::min(n, tasks));
}

struct EngineEval {
  double base = kInf;
  double violation = kInf;
};

struct EngineResult {
  std::vector<Kernel> kernels;
  double base = kInf;
  bool feasible = false;
};

using EvalFn = std::function<EngineEval(const std::vector<Kernel>&)>;

std::vector<double> encode(const std::vector<Kernel>& ks) {
  std::vector<double> e;
  for (const auto& k : ks) e.insert(e.end(), k.rows.begin(), k.rows.end());
  return e;
}

EngineResult refine(std::vector<Kernel> ks, const EvalFn& eval, int rounds,
                    int grid_levels, double feas_tol) {
  EngineResult best;
  auto consider = [&](const std::vector<Kernel>& cand, const EngineEval& e) {
    if (e.violation <= feas_tol && e.base < best.base - kImprove) {
      best.kernels = cand;
      best.base = e.base;
      best.feasible = true;
    }
  };

  EngineEval cur = eval(ks);
  consider(ks, cur);

  for (int round = 0; round < rounds; ++round) {
    const double mu = std::min(8.0 * std::pow(4.0, round), kMuCap);
    bool moved = false;
    for (std::size_t slot = 0; slot < ks.size(); ++slot) {
      Kernel& k = ks[slot];
      const int tc = k.target.cardinality;
      if (tc < 2) continue;
      const std::size_t nrows = k.row_count();
      for (std::size_t row = 0; row < nrows; ++row) {
        double* r = k.rows.data() + row * static_cast<std::size_t>(tc);
        std::vector<double> saved(r, r + tc);
        double cur_aug = cur.base + mu * cur.violation;
        int best_t = -1, best_step = -1;
        EngineEval best_eval;
        double best_aug = cur_aug;
        for (int t = 0; t < tc; ++t) {
          for (int step = 1; step <= grid_levels; ++step) {
            const double a = static_cast<double>(step) / grid_levels;
            for (int j = 0; j < tc; ++j)
              r[j] = (1.0 - a) * saved[static_cast<std::size_t>(j)] + (j == t ? a : 0.0);
            EngineEval e = eval(ks);
            consider(ks, e);
            const double aug = e.base + mu * e.violation;
            if (aug < best_aug - kImprove) {
              best_aug = aug;
              best_t = t;
              best_step = step;
              best_eval = e;
            }
          }
        }
        if (best_t >= 0) {
          const double a = static_cast<double>(best_step) / grid_levels;
          for (int j = 0; j < tc; ++j)
            r[j] = (1.0 - a) * saved[static_cast<std::size_t>(j)] + (j == best_t ? a : 0.0);
          cur = best_eval;
          moved = true;
        } else {
          std::copy(saved.begin(), saved.end(), r);
        }
      }
    }
    if (!moved && mu >= kMuCap) break;
  }
  return best;
}

EngineResult multi_start(const std::vector<std::vector<Kernel>>& starts, const EvalFn& eval,
                         const SearchBudget& budget) {
  const int n = static_cast<int>(starts.size());
  std::vector<EngineResult> results(static_cast<std::size_t>(n));
  const int workers = worker_count(n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i)
      results[static_cast<std::size_t>(i)] =
          refine(starts[static_cast<std::size_t>(i)], eval, budget.refinement_rounds,
                 budget.grid_levels, budget.feasibility_tol);
  } else {
    std::atomic<int> next{0};
    auto work = [&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        results[static_cast<std::size_t>(i)] =
            refine(starts[static_cast<std::size_t>(i)], eval, budget.refinement_rounds,
                   budget.grid_levels, budget.feasibility_tol);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EngineResult best;
  std::vector<double> best_enc;
  for (const auto& r : results) {
    if (!r.feasible) continue;
    if (!best.feasible) {
      best = r;
      best_enc = encode(r.kernels);
      continue;
    }
    if (r.base < best.base - kImprove) {
      best = r;
      best_enc = encode(r.kernels);
    } else if (r.base < best.base + kImprove) {
      std::vector<double> enc = encode(r.kernels);
      if (std::lexicographical_compare(enc.begin(), enc.end(), best_enc.begin(), best_enc.end())) {
        best = r;
        best_enc = std::move(enc);
      }
    }
  }
  return best;
}

// ----------------------------------------------------------- start schemes

Kernel random_kernel(std::vector<Variable> given, Variable target, detail::SplitMix64& rng) {
  Kernel k{std::move(given), std::move(target), {}};
  const std::size_t tc = static_cast<std::size_t>(k.target.cardinality);
  k.rows.resize(k.row_count() * tc);
  for (std::size_t row = 0; row < k.row_count(); ++row) {
    double total = 0.0;
    for (std::size_t t = 0; t < tc; ++t) {
      const double g = -std::log(1.0 - rng.uniform01());   // Exp(1) => Dirichlet(1) rows
      k.rows[row * tc + t] = g;
      total += g;
    }
    for (std::size_t t = 0; t < tc; ++t) k.rows[row * tc + t] /= total;
  }
  k.validate();
  return k;
}

// copy one conditioning variable when the alphabet allows it, else constant
Kernel copy_or_constant(std::vector<Variable> given, Variable target, const std::string& which) {
  for (const auto& g : given)
    if (g.name == which && target.cardinality >= g.cardinality)
      return Kernel::copy_of(std::move(given), std::move(target), which);
  return Kernel::point_mass(std::move(given), std::move(target), 0);
}

std::vector<std::vector<Kernel>> assemble_starts(
    const std::vector<std::vector<Kernel>>& structured,
    const std::function<std::vector<Kernel>(detail::SplitMix64&)>& random_scheme,
    const SearchBudget& budget) {
  std::vector<std::vector<Kernel>> starts;
  const int n = std::max(budget.restarts, 1);
  for (const auto& s : structured) {
    if (static_cast<int>(starts.size()) >= n) break;
    starts.push_back(s);
  }
  std::uint64_t i = 0;
  while (static_cast<int>(starts.size()) < n) {
    detail::SplitMix64 rng(detail::mix_seed(budget.seed, 0x517cc1b7ULL + i++));
    starts.push_back(random_scheme(rng));
  }
  return starts;
}

void check_weights(std::span<const double> w) {
  for (double x : w)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("objective weights must be finite and >= 0");
}

void require_yxz_with_both_distortions(const SourceModel& m) {
  if (m.chain != ChainDirection::YXZ || !m.dx.has_value() || !m.dz.has_value())
    throw std::invalid_argument("search needs chain y - x - z and both distortion measures");
}

void check_floor(const SourceModel& m, const DistortionMeasure& d, double target,
                 const char* which) {
  const double floor = d.full_information_floor(m.pxyz);
  if (target < floor - 1e-12)
    throw std::invalid_argument(fmt::format(
        "{} target {} is below the full-information floor {}", which, target, floor));
}

int resolved_card(int requested, int fallback, int cap) {
  int c = (requested > 0) ? requested : fallback;
  return std::max(1, std::min(c, cap));
}

}  // namespace

// -------------------------------------------------------------- two-way

namespace {

OptimizeResult optimize_region_cards(const SourceModel& m, double dx_max, double dz_max,
                                     std::array<double, 3> weights, const SearchBudget& budget,
                                     int cu, int cv, int cw) {
  const Variable vy = m.var("y"), vz = m.var("z"), vx = m.var("x");
  const Variable tu{"u", cu}, tv{"v", cv}, tw{"w", cw};
  const std::vector<Variable> u_given = {vy};
  const std::vector<Variable> v_given = {tu, vz};
  const std::vector<Variable> w_given = {tu, tv, vx};

  EvalFn eval = [&m, dx_max, dz_max, weights](const std::vector<Kernel>& ks) {
    AuxScheme s{ks[0], ks[1], ks[2], std::nullopt, std::nullopt};
    RatePoint p = evaluate_rate_point(m, s);
    EngineEval e;
    e.base = weights[0] * p.r1 + weights[1] * p.r2 + weights[2] * p.r3;
    e.violation = std::max(0.0, p.dx - dx_max) + std::max(0.0, p.dz - dz_max);
    return e;
  };

  std::vector<std::vector<Kernel>> structured;
  auto pm = [](std::vector<Variable> g, Variable t) { return Kernel::point_mass(std::move(g), std::move(t), 0); };
  structured.push_back({pm(u_given, tu), copy_or_constant(v_given, tv, "z"),
                        copy_or_constant(w_given, tw, "x")});
  structured.push_back({pm(u_given, tu), pm(v_given, tv), pm(w_given, tw)});
  structured.push_back({copy_or_constant(u_given, tu, "y"), copy_or_constant(v_given, tv, "z"),
                        copy_or_constant(w_given, tw, "x")});
  structured.push_back({Kernel::uniform(u_given, tu), Kernel::uniform(v_given, tv),
                        Kernel::uniform(w_given, tw)});
  structured.push_back({copy_or_constant(u_given, tu, "y"), pm(v_given, tv),
                        copy_or_constant(w_given, tw, "x")});

  auto random_scheme = [&](detail::SplitMix64& rng) {
    return std::vector<Kernel>{random_kernel(u_given, tu, rng), random_kernel(v_given, tv, rng),
                               random_kernel(w_given, tw, rng)};
  };

  EngineResult er = multi_start(assemble_starts(structured, random_scheme, budget), eval, budget);

  OptimizeResult out;
  out.feasible = er.feasible;
  if (!er.feasible) {
    out.objective = kInf;
    return out;
  }
  out.scheme = AuxScheme{er.kernels[0], er.kernels[1], er.kernels[2], std::nullopt, std::nullopt};
  out.point = evaluate_rate_point(m, out.scheme);
  out.objective = weights[0] * out.point.r1 + weights[1] * out.point.r2 + weights[2] * out.point.r3;
  return out;
}

}  // namespace

OptimizeResult optimize_region(const SourceModel& m, double dx_max, double dz_max,
                               std::array<double, 3> weights, const SearchBudget& budget) {
  require_yxz_with_both_distortions(m);
  check_weights(weights);
  check_floor(m, *m.dx, dx_max, "dx");
  check_floor(m, *m.dz, dz_max, "dz");

  const int cy = m.var("y").cardinality, cxc = m.var("x").cardinality,
            czc = m.var("z").cardinality;
  const int cu = resolved_card(budget.card_u, cy + 1, cy + 4);
  const int cv = resolved_card(budget.card_v, czc + 1, czc * cu + 3);
  const int cw = resolved_card(budget.card_w, cxc + 1, cu * cv * cxc + 1);
  return optimize_region_cards(m, dx_max, dz_max, weights, budget, cu, cv, cw);
}

// ------------------------------------------------------------- one-sided

HelperSearchResult optimize_helper_point(const SourceModel& m, double d, double lambda_r1,
                                         std::optional<double> r1_cap,
                                         const SearchBudget& budget) {
  if (m.chain != ChainDirection::YXZ || !m.dx.has_value())
    throw std::invalid_argument("helper search needs chain y - x - z and a distortion measure for x");
  if (!(lambda_r1 >= 0.0) || !std::isfinite(lambda_r1))
    throw std::invalid_argument("lambda must be finite and >= 0");
  if (r1_cap && (!(*r1_cap >= 0.0) || !std::isfinite(*r1_cap)))
    throw std::invalid_argument("helper-rate cap must be finite and >= 0");
  check_floor(m, *m.dx, d, "distortion");

  const Variable vy = m.var("y"), vx = m.var("x");
  const int cy = vy.cardinality, cx = vx.cardinality;
  const int cu = resolved_card(budget.card_u, cy + 2, cy + 2);
  const int cw = resolved_card(budget.card_w, cx + 2, cx * (cy + 2) + 1);
  const Variable tu{"u", cu}, tw{"w", cw};
  const std::vector<Variable> u_given = {vy};
  const std::vector<Variable> w_given = {vx, tu};

  EvalFn eval = [&m, d, lambda_r1, r1_cap](const std::vector<Kernel>& ks) {
    HelperScheme s{ks[0], ks[1], std::nullopt};
    HelperRatePoint p = evaluate_helper_point(m, s);
    EngineEval e;
    e.base = p.rate + lambda_r1 * p.r1;
    e.violation = std::max(0.0, p.distortion - d);
    if (r1_cap) e.violation += std::max(0.0, p.r1 - *r1_cap);
    return e;
  };

  std::vector<std::vector<Kernel>> structured;
  auto pm = [](std::vector<Variable> g, Variable t) { return Kernel::point_mass(std::move(g), std::move(t), 0); };
  structured.push_back({pm(u_given, tu), copy_or_constant(w_given, tw, "x")});
  structured.push_back({pm(u_given, tu), pm(w_given, tw)});
  structured.push_back({copy_or_constant(u_given, tu, "y"), copy_or_constant(w_given, tw, "x")});
  structured.push_back({copy_or_constant(u_given, tu, "y"), pm(w_given, tw)});
  structured.push_back({Kernel::uniform(u_given, tu), Kernel::uniform(w_given, tw)});
  structured.push_back({Kernel::uniform(u_given, tu), copy_or_constant(w_given, tw, "x")});

  auto random_scheme = [&](detail::SplitMix64& rng) {
    return std::vector<Kernel>{random_kernel(u_given, tu, rng), random_kernel(w_given, tw, rng)};
  };

  EngineResult er = multi_start(assemble_starts(structured, random_scheme, budget), eval, budget);

  HelperSearchResult out;
  out.feasible = er.feasible;
  if (!er.feasible) {
    out.objective = kInf;
    return out;
  }
  out.scheme = HelperScheme{er.kernels[0], er.kernels[1], std::nullopt};
  out.point = evaluate_helper_point(m, out.scheme);
  out.objective = out.point.rate + lambda_r1 * out.point.r1;
  return out;
}

std::vector<FrontierPoint> trace_frontier_helper(const SourceModel& m, double d,
                                                 std::span<const double> r1_grid,
                                                 const SearchBudget& budget) {
  if (r1_grid.empty()) throw std::invalid_argument("helper-rate grid must be nonempty");
  std::vector<double> grid(r1_grid.begin(), r1_grid.end());
  for (double g : grid)
    if (!(g >= 0.0) || !std::isfinite(g))
      throw std::invalid_argument("helper-rate grid values must be finite and >= 0");
  std::sort(grid.begin(), grid.end());

  std::vector<FrontierPoint> achieved;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SearchBudget b = budget;
    b.seed = detail::mix_seed(budget.seed, 0xF00D + i);
    HelperSearchResult r = optimize_helper_point(m, d, 0.0, grid[i], b);
    // The cap is enforced only up to the feasibility tolerance, so round-off
    // can report r1 a hair above it; recording that dust would push the grid
    // value outside the envelope's hull and turn it into +inf.
    if (r.feasible)
      achieved.push_back({std::min(r.point.r1, grid[i]), r.point.rate, r.point.distortion});
  }
  return lower_convex_envelope(std::move(achieved), grid);
}

// ------------------------------------------------------------ multi-stage

MultiStageOptimizeResult optimize_multistage(const SourceModel& m, int stages, double dx_max,
                                             double dz_max, std::array<double, 3> weights,
                                             const SearchBudget& budget) {
  require_yxz_with_both_distortions(m);
  check_weights(weights);
  if (stages < 1 || stages > 2)
    throw std::invalid_argument("multi-stage search supports 1 or 2 stages only");
  const Variable vx = m.var("x"), vy = m.var("y"), vz = m.var("z");
  if (vx.cardinality > 3 || vy.cardinality > 3 || vz.cardinality > 3)
    throw std::invalid_argument("multi-stage search supports source alphabets up to 3");
  check_floor(m, *m.dx, dx_max, "dx");
  check_floor(m, *m.dz, dz_max, "dz");

  const int cu = resolved_card(budget.card_u, std::min(vy.cardinality + 1, 3), vy.cardinality + 4);
  const int cv = resolved_card(budget.card_v, 2, 3);
  const int cw = resolved_card(budget.card_w, 2, 3);

  const Variable tu{"u", cu};
  std::vector<std::vector<Variable>> givens;   // per kernel, in build order
  std::vector<Variable> targets;
  std::vector<Variable> history;               // v1,w1,...
  givens.push_back({vy});
  targets.push_back(tu);
  for (int k = 1; k <= stages; ++k) {
    std::vector<Variable> vg = {vz, tu};
    vg.insert(vg.end(), history.begin(), history.end());
    const Variable tv{fmt::format("v{}", k), cv};
    givens.push_back(vg);
    targets.push_back(tv);
    history.push_back(tv);
    std::vector<Variable> wg = {vx, tu};
    wg.insert(wg.end(), history.begin(), history.end());
    const Variable tw{fmt::format("w{}", k), cw};
    givens.push_back(wg);
    targets.push_back(tw);
    history.push_back(tw);
  }

  auto to_scheme = [stages](const std::vector<Kernel>& ks) {
    MultiStageScheme s;
    s.u_given_y = ks[0];
    for (int k = 0; k < stages; ++k)
      s.stages.push_back({ks[static_cast<std::size_t>(1 + 2 * k)],
                          ks[static_cast<std::size_t>(2 + 2 * k)]});
    return s;
  };

  EvalFn eval = [&m, dx_max, dz_max, weights, &to_scheme](const std::vector<Kernel>& ks) {
    MultiStageRates r = evaluate_multistage(m, to_scheme(ks));
    EngineEval e;
    e.base = weights[0] * r.ry + weights[1] * r.rz + weights[2] * r.rx;
    e.violation = std::max(0.0, r.dx - dx_max) + std::max(0.0, r.dz - dz_max);
    return e;
  };

  auto pm = [](std::vector<Variable> g, Variable t) { return Kernel::point_mass(std::move(g), std::move(t), 0); };
  const std::size_t nk = targets.size();
  std::vector<std::vector<Kernel>> structured;
  {
    std::vector<Kernel> anchor, allpm, copystart, uni;
    for (std::size_t i = 0; i < nk; ++i) {
      const auto& g = givens[i];
      const auto& t = targets[i];
      allpm.push_back(pm(g, t));
      uni.push_back(Kernel::uniform(g, t));
      const bool is_v = t.name.starts_with("v");
      const bool is_w = t.name.starts_with("w");
      anchor.push_back(i == 0 ? pm(g, t)
                              : copy_or_constant(g, t, is_v ? "z" : "x"));
      copystart.push_back(i == 0 ? copy_or_constant(g, t, "y")
                                 : copy_or_constant(g, t, is_v ? "z" : (is_w ? "x" : "x")));
    }
    structured.push_back(std::move(anchor));
    structured.push_back(std::move(allpm));
    structured.push_back(std::move(copystart));
    structured.push_back(std::move(uni));
  }

  auto random_scheme = [&](detail::SplitMix64& rng) {
    std::vector<Kernel> ks;
    for (std::size_t i = 0; i < nk; ++i) ks.push_back(random_kernel(givens[i], targets[i], rng));
    return ks;
  };

  EngineResult er = multi_start(assemble_starts(structured, random_scheme, budget), eval, budget);

  MultiStageOptimizeResult out;
  out.feasible = er.feasible;
  if (!er.feasible) {
    out.objective = kInf;
    return out;
  }
  out.scheme = to_scheme(er.kernels);
  out.rates = evaluate_multistage(m, out.scheme);
  out.objective = weights[0] * out.rates.ry + weights[1] * out.rates.rz + weights[2] * out.rates.rx;
  return out;
}

// ----------------------------------------------------- cardinality probe

CardinalityProbeReport cardinality_sufficiency_probe(const SourceModel& m, double dx_max,
                                                     double dz_max, std::array<double, 3> weights,
                                                     const SearchBudget& budget) {
  require_yxz_with_both_distortions(m);
  check_weights(weights);
  check_floor(m, *m.dx, dx_max, "dx");
  check_floor(m, *m.dz, dz_max, "dz");

  const int cy = m.var("y").cardinality, cxc = m.var("x").cardinality,
            czc = m.var("z").cardinality;
  const int cu = (budget.card_u > 0) ? budget.card_u : cy + 1;
  const int cv = (budget.card_v > 0) ? budget.card_v : czc + 1;
  const int cw = (budget.card_w > 0) ? budget.card_w : cxc + 1;

  auto run = [&](int u, int v, int w) {
    const double cells = static_cast<double>(cxc) * cy * czc * u * v * w;
    if (cells > 2.0e6)
      throw std::invalid_argument("cardinality probe: joint table would exceed 2e6 cells");
    OptimizeResult r = optimize_region_cards(m, dx_max, dz_max, weights, budget, u, v, w);
    return CardinalityProbeRow{u, v, w, r.feasible ? r.objective : kInf, r.feasible};
  };

  CardinalityProbeReport rep;
  rep.base = run(cu, cv, cw);
  rep.increments.push_back(run(cu + 1, cv, cw));
  rep.increments.push_back(run(cu, cv + 1, cw));
  rep.increments.push_back(run(cu, cv, cw + 1));
  double best_inc = kInf;
  for (const auto& row : rep.increments) best_inc = std::min(best_inc, row.objective);
  rep.max_improvement = std::max(0.0, rep.base.objective - best_inc);
  return rep;
}

}  // namespace tworate
