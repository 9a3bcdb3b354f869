// End-to-end acceptance gate.  Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails.  Tolerances are
// pinned here on purpose — loosening one is a decision, not a tweak.
//
// Needs TWORATE_FIXTURE_DIR (frozen oracle frontiers) and TWORATE_CLI_PATH
// (the built command-line binary) as compile definitions.

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "graph_cases.hpp"
#include "test_support.hpp"
#include "tworate/gaussian.hpp"
#include "tworate/markov_graph.hpp"
#include "tworate/model_io.hpp"
#include "tworate/oracle.hpp"
#include "tworate/region.hpp"
#include "tworate/tradeoff.hpp"

namespace fs = std::filesystem;
using namespace tworate;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(std::string why) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += std::move(why);
  }
  void note(std::string what) {
    if (ok && detail.empty()) detail = std::move(what);
  }
};

double uniform01(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

Kernel random_kernel(std::vector<Variable> given, Variable target, std::uint64_t seed) {
  Kernel k{std::move(given), target, {}};
  const std::size_t rows = k.row_count();
  std::uint64_t s = seed;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> row(static_cast<std::size_t>(target.cardinality));
    double tot = 0;
    for (auto& e : row) tot += (e = 0.05 + uniform01(s));
    for (double e : row) k.rows.push_back(e / tot);
  }
  return k;
}

// ---------------------------------------------------------------- criterion 1
// All eleven certified chain fixtures come back Established and survive the
// random-table numeric replay at the library tolerance.

Outcome criterion_graph_reproduction() {
  Outcome out;
  double worst = 0.0;
  for (const auto& c : testsupport::certified_graph_cases()) {
    const SeparationQuery q = parse_separation_query(c.query);
    const ChainVerdict v = verify_chain(c.spec, q);
    if (!v.established) {
      out.fail(fmt::format("'{}' not established", c.name));
      continue;
    }
    const std::vector<int> cards(c.spec.variables.size(), 2);
    const MarkovScanOutcome scan =
        exhaustive_markov_scan(c.spec, q, cards, /*trials=*/5, /*seed=*/0xC1u);
    worst = std::max(worst, scan.max_cmi);
    if (scan.max_cmi > 1e-9)
      out.fail(fmt::format("'{}' numeric CMI {:.3g} above 1e-9", c.name, scan.max_cmi));
  }
  out.note(fmt::format("11 chains established, worst replay CMI {:.2g}", worst));
  return out;
}

// ---------------------------------------------------------------- criterion 2
// Soundness sweep: random factorizations over at most six binary variables;
// every Established verdict must be numerically confirmed.

Outcome criterion_graph_soundness() {
  Outcome out;
  const RandomScanReport rep = random_factorization_scan(/*num_vars=*/6, /*cases=*/1000,
                                                         /*trials=*/2, /*seed=*/0xC2u);
  if (rep.total != 1000) out.fail(fmt::format("ran {} cases", rep.total));
  if (rep.false_positives != 0)
    out.fail(fmt::format("{} false positives", rep.false_positives));
  if (rep.established == 0) out.fail("no Established verdicts at all");
  out.note(fmt::format("{}/{} established, 0 false positives, worst CMI {:.2g}",
                       rep.established, rep.total, rep.worst_cmi));
  return out;
}

// ---------------------------------------------------------------- criterion 3
// Gaussian closed forms: exact no-helper collapse, curvature in the helper
// rate, the slope at zero, and the noisy-description substitution chain.

Outcome criterion_gaussian() {
  Outcome out;
  const GaussianSourceSpec g{1.0, 0.5, 1.0};

  for (double dx : {0.02, 0.1, 0.25, 0.9, 2.0}) {
    const double direct = std::max(0.0, 0.5 * std::log2(g.var_a / dx));
    if (rx_min(g, 0.0, dx) != direct) {
      out.fail(fmt::format("ry=0 value not exact at dx={}", dx));
      break;
    }
  }

  const double dx = 0.02;   // keeps the rate positive across the whole grid
  std::vector<double> r(100);
  for (int i = 0; i < 100; ++i) r[static_cast<std::size_t>(i)] = rx_min(g, 4.0 * i / 99.0, dx);
  for (int i = 0; i + 1 < 100; ++i)
    if (r[i + 1] > r[i] + 1e-12) out.fail(fmt::format("not nonincreasing at grid {}", i));
  for (int i = 0; i + 2 < 100; ++i)
    if (r[i] - 2 * r[i + 1] + r[i + 2] < -1e-9)
      out.fail(fmt::format("not convex at grid {}", i));

  // One-sided second-order difference: error O(h^2), well under 1e-6.
  const double h = 1e-4;
  const double slope =
      (-3 * rx_min(g, 0.0, dx) + 4 * rx_min(g, h, dx) - rx_min(g, 2 * h, dx)) / (2 * h);
  const double want = -g.var_a / (g.var_a + g.var_b);
  if (std::fabs(slope - want) > 1e-6)
    out.fail(fmt::format("slope at 0 is {:.9g}, want {:.9g}", slope, want));

  // Substituting the rate-matched description noise into the conditional
  // rate-distortion of the explicit joint must land back on the closed form.
  std::uint64_t s = 0xC3u;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    GaussianSourceSpec gg{0.2 + 3.0 * uniform01(s), 3.0 * uniform01(s),
                          0.1 + 2.0 * uniform01(s)};
    const double rp = 0.05 + 2.0 * uniform01(s);
    const double target = 0.01 + 0.5 * uniform01(s) * gg.var_a;
    const GaussianJoint j = helper_description_joint(gg, rp);
    const double via_joint = conditional_rate_distortion(j, "x", {"v", "z"}, target);
    const double direct = rx_min(gg, rp, target);
    worst = std::max(worst, std::fabs(via_joint - direct));
  }
  if (worst > 1e-9) out.fail(fmt::format("substitution chain off by {:.3g}", worst));

  out.note(fmt::format("slope {:.9g}, substitution chain max error {:.2g}", slope, worst));
  return out;
}

// ---------------------------------------------------------------- criterion 4
// A helper bit is never worth more than one description bit; with Y = X it is
// worth essentially exactly one.

Outcome criterion_slope_bound() {
  Outcome out;
  SearchBudget budget;
  budget.restarts = 8;
  budget.refinement_rounds = 14;
  budget.grid_levels = 3;
  budget.seed = 0xC4u;

  const std::array<std::array<double, 3>, 5> fixtures{{{0.5, 0.2, 0.1},
                                                       {0.5, 0.3, 0.15},
                                                       {0.5, 0.1, 0.05},
                                                       {0.4, 0.15, 0.2},
                                                       {0.6, 0.25, 0.12}}};
  const std::vector<double> grid{0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  double steepest = 0.0;
  for (const auto& f : fixtures) {
    const SourceModel m = SourceModel::binary_symmetric(f[0], f[1], f[2]);
    const SlopeCertificate cert = slope_certificate(m, 0.1, grid, budget);
    steepest = std::max(steepest, cert.max_abs_slope);
    if (cert.max_abs_slope > 1.01)
      out.fail(fmt::format("slope {:.4g} above 1.01 on ({}, {}, {})", cert.max_abs_slope,
                           f[0], f[1], f[2]));
  }

  // Degenerate helper that sees X itself: one bit in, one bit out.  The
  // small target keeps the whole grid inside the slope-one region.
  SearchBudget hard = budget;
  hard.restarts = 14;
  hard.refinement_rounds = 32;
  hard.grid_levels = 4;
  const SourceModel yx = SourceModel::binary_symmetric(0.5, 0.0, 0.1);
  const std::vector<double> fine{0, 0.15, 0.3};
  const SlopeCertificate cert = slope_certificate(yx, 0.02, fine, hard);
  // The true certificate is <= 1; the measured one rides on three
  // achievability-only searches, so it can land a few millibits either side.
  if (std::fabs(cert.max_abs_slope - 1.0) > 0.05)
    out.fail(fmt::format("Y=X certificate {:.4g} not within 0.05 of 1",
                         cert.max_abs_slope));

  out.note(fmt::format("noisy fixtures steepest {:.4g}, Y=X certificate {:.4g}", steepest,
                       cert.max_abs_slope));
  return out;
}

// ---------------------------------------------------------------- criterion 5
// The fast search must land within 5e-2 bits of the frozen exhaustive
// frontier, point by point, and the weighted full-exchange search must agree
// with the no-helper corner.

Outcome criterion_optimizer_vs_oracle() {
  Outcome out;
  const fs::path dir = TWORATE_FIXTURE_DIR;
  const double tol = 5e-2;
  double worst = 0.0;

  for (const char* name : {"frontier_bsm_a.csv", "frontier_bsm_b.csv", "frontier_wz.csv"}) {
    OracleFixture fx;
    try {
      fx = read_oracle_fixture(dir / name);
    } catch (const std::exception& e) {
      out.fail(e.what());
      continue;
    }
    const SourceModel m = fixture_model(fx.meta);

    std::vector<double> grid;
    std::vector<FrontierPoint> oracle_pts;
    for (const auto& p : fx.points) {
      grid.push_back(p.r1);
      oracle_pts.push_back({p.r1, p.rate, p.distortion});
    }
    const std::vector<FrontierPoint> oracle_env = lower_convex_envelope(oracle_pts, grid);

    SearchBudget budget;
    budget.restarts = 8;
    budget.refinement_rounds = 16;
    budget.grid_levels = 3;
    budget.card_u = fx.meta.card_u;
    budget.card_w = fx.meta.card_w;
    budget.seed = 0xC5u;
    const std::vector<FrontierPoint> fast = trace_frontier_helper(m, fx.meta.d, grid, budget);

    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double gap = std::fabs(fast[i].rate - oracle_env[i].rate);
      worst = std::max(worst, gap);
      if (!(gap <= tol)) {
        out.fail(fmt::format("{} r1={:.4g}: search {:.6g} vs oracle {:.6g}", name, grid[i],
                             fast[i].rate, oracle_env[i].rate));
        break;
      }
    }

    // No-helper corner via the full two-message search: with unit weights a
    // helper bit can never pay for itself, so the optimum is the oracle's
    // leftmost envelope value.
    SearchBudget two = budget;
    two.card_u = 0;
    two.card_v = 0;
    two.card_w = 0;
    const OptimizeResult r = optimize_region(m, fx.meta.d, 0.5, {1.0, 1.0, 1.0}, two);
    if (!r.feasible) {
      out.fail(fmt::format("{}: weighted search infeasible", name));
      continue;
    }
    const std::vector<double> zero{0.0};
    const double corner = lower_convex_envelope(oracle_pts, zero).front().rate;
    const double gap = std::fabs(r.objective - corner);
    worst = std::max(worst, gap);
    if (!(gap <= tol))
      out.fail(fmt::format("{}: weighted objective {:.6g} vs corner {:.6g}", name,
                           r.objective, corner));
  }
  out.note(fmt::format("worst gap {:.3g} bits", worst));
  return out;
}

// ---------------------------------------------------------------- criterion 6
// Structural identities between the single-exchange region and the staged
// evaluation.

Outcome criterion_multistage_identities() {
  Outcome out;
  const SourceModel m = SourceModel::binary_symmetric(0.5, 0.2, 0.1);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    AuxScheme tw{random_kernel({{"y", 2}}, {"u", 2}, seed),
                 random_kernel({{"u", 2}, {"z", 2}}, {"v", 2}, seed + 100),
                 random_kernel({{"u", 2}, {"v", 2}, {"x", 2}}, {"w", 2}, seed + 200),
                 {},
                 {}};
    const RatePoint p = evaluate_rate_point(m, tw);

    // Rename v -> v1, w -> w1; rows and conditioning order stay put, so the
    // staged evaluation sees byte-identical kernels.
    MultiStageScheme ms;
    ms.u_given_y = tw.u_given_y;
    Kernel v1 = tw.v_given_uz;
    v1.target.name = "v1";
    Kernel w1 = tw.w_given_uvx;
    w1.given[1].name = "v1";
    w1.target.name = "w1";
    ms.stages.push_back({v1, w1});
    const MultiStageRates r = evaluate_multistage(m, ms);

    if (r.rz != p.r2 || r.rx != p.r3) {
      out.fail(fmt::format("seed {}: staged rz/rx differ from one-shot r2/r3", seed));
      break;
    }
    const Kernel ks[] = {ms.u_given_y};
    const JointPmf joint = extend_with_kernels(m.pxyz, ks);
    const double want_ry = p.r1 + joint.mutual_information({"u"}, {"z"});
    if (std::fabs(r.ry - want_ry) > 1e-9) {
      out.fail(fmt::format("seed {}: ry {:.12g} vs r1 + I(U;Z) = {:.12g}", seed, r.ry,
                           want_ry));
      break;
    }
  }

  double worst = 0.0;
  for (std::uint64_t seed = 41; seed <= 65; ++seed) {
    MultiStageScheme ms;
    ms.u_given_y = random_kernel({{"y", 2}}, {"u", 2}, seed);
    ms.stages.push_back(
        {random_kernel({{"z", 2}, {"u", 2}}, {"v1", 2}, seed + 300),
         random_kernel({{"x", 2}, {"u", 2}, {"v1", 2}}, {"w1", 2}, seed + 400)});
    ms.stages.push_back(
        {random_kernel({{"z", 2}, {"u", 2}, {"v1", 2}, {"w1", 2}}, {"v2", 2}, seed + 500),
         random_kernel({{"x", 2}, {"u", 2}, {"v1", 2}, {"v2", 2}, {"w1", 2}}, {"w2", 2},
                       seed + 600)});
    const MultiStageRates r = evaluate_multistage(m, ms);
    worst = std::max(worst, std::fabs(r.rz - r.rz_aggregate));
    worst = std::max(worst, std::fabs(r.rx - r.rx_aggregate));
  }
  if (worst > 1e-9) out.fail(fmt::format("stage sums off aggregates by {:.3g}", worst));

  out.note(fmt::format("20 single-stage matches, two-stage sum-vs-aggregate gap {:.2g}",
                       worst));
  return out;
}

// ---------------------------------------------------------------- criterion 7
// Helper descriptions degrade along the chain: the description of Y tells Z
// no more than it tells X, and X no more than Y itself.

Outcome criterion_data_processing() {
  Outcome out;
  const SourceModel models[] = {SourceModel::binary_symmetric(0.5, 0.2, 0.1),
                                SourceModel::binary_symmetric(0.3, 0.35, 0.25)};
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const SourceModel& m = models[i % 2];
    const int cu = 2 + static_cast<int>(i % 3);
    const Kernel ks[] = {random_kernel({{"y", 2}}, {"u", cu}, 0xC700u + i)};
    const JointPmf j = extend_with_kernels(m.pxyz, ks);
    const double iuz = j.mutual_information({"u"}, {"z"});
    const double iux = j.mutual_information({"u"}, {"x"});
    const double iuy = j.mutual_information({"u"}, {"y"});
    worst = std::max(worst, std::max(iuz - iux, iux - iuy));
    if (iuz > iux + 1e-9 || iux > iuy + 1e-9) {
      out.fail(fmt::format("scheme {}: I(U;Z)={:.9g} I(U;X)={:.9g} I(U;Y)={:.9g}", i, iuz,
                           iux, iuy));
      break;
    }
  }
  out.note(fmt::format("1000 schemes, worst ordering slack {:.2g}", worst));
  return out;
}

// ---------------------------------------------------------------- criterion 8
// Binning against the encoder observation can only help: the encoder-side
// rate never exceeds the certified decoder-side rate.

Outcome criterion_binned_rate() {
  Outcome out;
  const SourceModel m = SourceModel::binary_symmetric(0.5, 0.2, 0.1);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const int cv = 2 + static_cast<int>(i % 3);
    const Kernel v = random_kernel({{"y", 2}}, {"v", cv}, 0xC800u + i);
    const BinnedRate b = binned_encoder_rate(m, v);
    worst = std::max(worst, b.re_min - b.r_prime);
    if (b.re_min > b.r_prime + 1e-12) {
      out.fail(fmt::format("scheme {}: encoder rate {:.12g} above decoder rate {:.12g}", i,
                           b.re_min, b.r_prime));
      break;
    }
  }
  out.note(fmt::format("1000 schemes, max re - r' = {:.2g}", worst));
  return out;
}

// ---------------------------------------------------------------- criterion 9
// Byte-identical reruns of every CLI subcommand with a fixed seed.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_cli_determinism() {
  Outcome out;
  const std::string cli = TWORATE_CLI_PATH;
  const fs::path dir = fs::temp_directory_path() / "tworate_accept";
  fs::create_directories(dir);

  const fs::path model = dir / "model.json";
  std::ofstream(model) << R"({
    "variables": [{"name":"x","cardinality":2},{"name":"y","cardinality":2},
                  {"name":"z","cardinality":2}],
    "pmf": [0.36, 0.04, 0.09, 0.01, 0.01, 0.09, 0.04, 0.36],
    "chain": "y-x-z",
    "distortions": {"dx": {"matrix": [[0,1],[1,0]]}, "dz": {"matrix": [[0,1],[1,0]]}}
  })";
  const fs::path factors = dir / "factors.json";
  std::ofstream(factors) << R"({"variables": ["a","b","c"],
                               "factors": [["a","b"],["b","c"]]})";

  struct Run {
    std::string name, args;
  };
  const std::vector<Run> runs{
      {"markov", fmt::format("markov {} -q \"a | b | c\" --numeric-check --trials 3 --seed 11",
                             factors.string())},
      {"region", fmt::format("region {} --dx 0.2 --dz 0.2 --weights 1,1,1 --seed 5 "
                             "--restarts 4 --rounds 8",
                             model.string())},
      {"gaussian", "gaussian --sigma-a 1 --sigma-b 0.5 --sigma-z 1 --ry 0.3 --dx 0.1 --dz 0.1"},
      {"tradeoff", fmt::format("tradeoff {} --d 0.1 --lambda 0.5 --seed 7 --restarts 4 "
                               "--rounds 8",
                               model.string())},
  };

  for (const auto& r : runs) {
    std::array<std::string, 2> got;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path cap = dir / fmt::format("{}_{}.txt", r.name, rep);
      const std::string cmd =
          fmt::format("\"{}\" {} > \"{}\" 2>&1", cli, r.args, cap.string());
      const int rc = std::system(cmd.c_str());
      if (rc != 0) {
        out.fail(fmt::format("{} exited with {}", r.name, rc));
        break;
      }
      got[static_cast<std::size_t>(rep)] = slurp(cap);
    }
    if (!out.ok) break;
    if (got[0].empty() || got[0] != got[1])
      out.fail(fmt::format("{} reruns differ ({} vs {} bytes)", r.name, got[0].size(),
                           got[1].size()));
  }

  // The oracle subcommand writes its fixture to a file; compare those bytes.
  if (out.ok) {
    std::array<std::string, 2> fixture_bytes;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path fixture = dir / fmt::format("oracle_{}.csv", rep);
      const std::string cmd = fmt::format(
          "\"{}\" oracle -o \"{}\" --px1 0.5 --fy 0.2 --fz 0.1 --d 0.1 --levels 3 "
          "--card-u 2 --card-w 2 > /dev/null 2>&1",
          cli, fixture.string());
      if (std::system(cmd.c_str()) != 0) {
        out.fail("oracle subcommand failed");
        break;
      }
      fixture_bytes[static_cast<std::size_t>(rep)] = slurp(fixture);
    }
    if (out.ok && (fixture_bytes[0].empty() || fixture_bytes[0] != fixture_bytes[1]))
      out.fail("oracle fixture reruns differ");
  }

  std::error_code ec;
  fs::remove_all(dir, ec);
  out.note("5 subcommands byte-stable across reruns");
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {"criterion-1 graph technique reproduces the certified chains",
       criterion_graph_reproduction},
      {"criterion-2 graph technique sound on random factorizations",
       criterion_graph_soundness},
      {"criterion-3 gaussian closed forms and substitution chain", criterion_gaussian},
      {"criterion-4 helper bit worth at most one description bit", criterion_slope_bound},
      {"criterion-5 search matches the exhaustive oracle frontier",
       criterion_optimizer_vs_oracle},
      {"criterion-6 staged evaluation matches the one-shot region",
       criterion_multistage_identities},
      {"criterion-7 helper description degrades along the chain",
       criterion_data_processing},
      {"criterion-8 encoder-side binned rate never above decoder-side",
       criterion_binned_rate},
      {"criterion-9 CLI output byte-identical across reruns", criterion_cli_determinism},
  };

  int failures = 0;
  for (const auto& e : entries) {
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o.ok = false;
      o.detail = fmt::format("exception: {}", ex.what());
    }
    fmt::print("{} {}{}{}\n", o.ok ? "PASS" : "FAIL", e.label,
               o.detail.empty() ? "" : " — ", o.detail);
    if (!o.ok) ++failures;
  }
  if (failures) fmt::print("{} criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
