// Command-line front end: chain checking, region tracing, Gaussian closed
// forms, helper-value diagnostics, and the explicit oracle-fixture
// regeneration path.
//
// Exit codes: 0 success / chain established; 1 chain not established or an
// analytical answer that is infeasible or degenerate; 2 bad input.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tworate/gaussian.hpp"
#include "tworate/markov_graph.hpp"
#include "tworate/model_io.hpp"
#include "tworate/oracle.hpp"
#include "tworate/region.hpp"
#include "tworate/tradeoff.hpp"

namespace {

using namespace tworate;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kBadInput = 2;

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", out_path));
  out << text;
}

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:n" = n evenly spaced points from a to b, or a comma-separated list
  std::vector<double> grid;
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw std::runtime_error("grid must be 'start:stop:count' or a comma list");
    const double a = std::stod(text.substr(0, c1));
    const double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(text.substr(c2 + 1));
    if (n < 1) throw std::runtime_error("grid count must be >= 1");
    for (int i = 0; i < n; ++i)
      grid.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return grid;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    grid.push_back(std::stod(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (grid.empty()) throw std::runtime_error("empty grid");
  return grid;
}

const SourceModel& require_model(const ModelFile& mf, const std::string& path) {
  if (!mf.model)
    throw std::runtime_error(fmt::format("'{}' has no finite-alphabet model", path));
  return *mf.model;
}

// ------------------------------------------------------------------ markov

int cmd_markov(const std::string& factors_path, const std::string& query_text,
               bool numeric_check, int trials, std::uint64_t seed) {
  FactorsFile ff = read_factors_file(factors_path);
  SeparationQuery q = parse_separation_query(query_text);
  ChainVerdict v = verify_chain(ff.spec, q);
  if (!v.established) {
    std::string path;
    for (const auto& n : v.witness_path) {
      if (!path.empty()) path += " - ";
      path += n;
    }
    fmt::print("NotEstablished\nwitness: {}\n", path);
    return kNegative;
  }
  fmt::print("Established\n");
  if (numeric_check) {
    MarkovScanOutcome o =
        exhaustive_markov_scan(ff.spec, q, ff.cardinalities, trials, seed);
    fmt::print("numeric: {} trials, max conditional mutual information {:.3g} bits\n",
               o.numeric_trials, o.max_cmi);
    if (o.max_cmi > kMarkovTol) return kNegative;   // would contradict the certificate
  }
  return kOk;
}

// ------------------------------------------------------------------ region

int cmd_region(const std::string& model_path, const RunConfig& cfg, bool frontier,
               std::optional<double> dx_max, std::optional<double> dz_max,
               const std::string& weights_text, const std::string& grid_text) {
  ModelFile mf = read_model_file(model_path);
  const SourceModel& m = require_model(mf, model_path);

  if (frontier) {
    if (!dx_max) throw std::runtime_error("--frontier needs --dx as the distortion target");
    std::vector<double> grid = parse_grid(grid_text.empty() ? "0:0.5:11" : grid_text);
    std::vector<FrontierPoint> pts = trace_frontier_helper(m, *dx_max, grid, cfg.budget());
    write_output(cfg.out, frontier_csv(pts));
    const bool any_finite =
        std::any_of(pts.begin(), pts.end(), [](const FrontierPoint& p) { return std::isfinite(p.rate); });
    return any_finite ? kOk : kNegative;
  }

  if (!dx_max || !dz_max)
    throw std::runtime_error("weighted optimization needs --dx and --dz targets");
  std::vector<double> w = parse_grid(weights_text.empty() ? "1,1,1" : weights_text);
  if (w.size() != 3) throw std::runtime_error("--weights needs exactly three values");
  OptimizeResult r =
      optimize_region(m, *dx_max, *dz_max, {w[0], w[1], w[2]}, cfg.budget());
  if (!r.feasible) {
    fmt::print("infeasible\n");
    return kNegative;
  }
  std::string text =
      fmt::format("r1,r2,r3,dx,dz,objective\n{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n",
                  r.point.r1, r.point.r2, r.point.r3, r.point.dx, r.point.dz, r.objective);
  write_output(cfg.out, text);
  return kOk;
}

// ---------------------------------------------------------------- gaussian

int cmd_gaussian(double var_a, double var_b, double var_z, std::optional<double> ry,
                 std::optional<double> dx, std::optional<double> dz) {
  GaussianSourceSpec g{var_a, var_b, var_z};
  g.validate();
  bool all_zero = true, any = false;
  if (dz) {
    const double rz = rz_min(g, *dz);
    fmt::print("rz_min,{:.9g}\n", rz);
    any = true;
    all_zero = all_zero && rz == 0.0;
  }
  if (dx) {
    const double rx = rx_min(g, ry.value_or(0.0), *dx);
    fmt::print("rx_min,{:.9g}\n", rx);
    fmt::print("slope_bound,{:.9g}\n", helper_slope_bound(g));
    any = true;
    all_zero = all_zero && rx == 0.0;
  }
  if (!any) throw std::runtime_error("gaussian needs --dx and/or --dz");
  // all requested rates degenerate to zero: targets were already free
  return all_zero ? kNegative : kOk;
}

// ---------------------------------------------------------------- tradeoff

int cmd_tradeoff(const std::string& model_path, const RunConfig& cfg,
                 std::optional<double> lambda, double d, bool slope,
                 const std::string& grid_text, std::optional<double> re,
                 std::optional<double> rd) {
  ModelFile mf = read_model_file(model_path);
  const SourceModel& m = require_model(mf, model_path);

  if (slope) {
    std::vector<double> grid = parse_grid(grid_text.empty() ? "0:0.5:6" : grid_text);
    SlopeCertificate cert = slope_certificate(m, d, grid, cfg.budget());
    std::string text = fmt::format("max_abs_slope,{:.9g}\n", cert.max_abs_slope);
    text += frontier_csv(cert.frontier);
    write_output(cfg.out, text);
    return kOk;
  }
  if (re || rd) {
    if (!re || !rd) throw std::runtime_error("independent links need both --re and --rd");
    SectionResult s = independent_rates_section(m, *re, *rd, d, cfg.budget());
    write_output(cfg.out, fmt::format("re,rd,d,rate\n{:.9g},{:.9g},{:.9g},{:.9g}\n", s.re,
                                      s.rd, s.d, s.rate));
    return kOk;
  }
  if (!lambda) throw std::runtime_error("tradeoff needs --lambda, --slope-cert, or --re/--rd");
  const double j = j_star(m, *lambda, d, cfg.budget());
  write_output(cfg.out, fmt::format("j_star,{:.9g}\n", j));
  return kOk;
}

// ------------------------------------------------------------------ oracle

int cmd_oracle(const std::string& out_path, double px1, double fy, double fz, double d,
               int levels, int card_u, int card_w) {
  OracleFixtureMeta meta;
  meta.instance = "binary_symmetric";
  meta.px1 = px1;
  meta.fy = fy;
  meta.fz = fz;
  meta.d = d;
  meta.levels = levels;
  meta.card_u = card_u;
  meta.card_w = card_w;
  OracleFixture fx = generate_oracle_fixture(meta);
  write_oracle_fixture(out_path, fx);
  fmt::print("wrote {} frontier points to {}\n", fx.points.size(), out_path);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-way rate-distortion regions with a helper"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string factors_path, model_path, query_text, weights_text, grid_text;
  bool numeric_check = false, frontier = false, slope = false;
  int trials = 5;
  std::optional<double> dx_max, dz_max, lambda, ry, gdx, gdz, re, rd;
  double var_a = 1.0, var_b = 0.0, var_z = 1.0, d_target = 0.0;
  double px1 = 0.5, fy = 0.0, fz = 0.0;
  int levels = 5, card_u = 2, card_w = 2;
  std::string oracle_out;

  auto add_search_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "search seed");
    sub->add_option("--restarts", cfg.restarts, "search restarts");
    sub->add_option("--rounds", cfg.refinement_rounds, "refinement rounds");
    sub->add_option("--grid-levels", cfg.grid_levels, "row move granularity");
    sub->add_option("--card-u", cfg.card_u, "helper alphabet size (0 = default)");
    sub->add_option("--card-v", cfg.card_v, "first description alphabet size (0 = default)");
    sub->add_option("--card-w", cfg.card_w, "second description alphabet size (0 = default)");
    sub->add_option("-o,--out", cfg.out, "write output to a file instead of stdout");
  };

  CLI::App* markov = app.add_subcommand("markov", "check a Markov chain from a factorization");
  markov->add_option("factors", factors_path, "factors JSON file")->required();
  markov->add_option("-q,--query", query_text, "\"g1 | g2 | g3\" query")->required();
  markov->add_flag("--numeric-check", numeric_check, "also replay with random factor tables");
  markov->add_option("--trials", trials, "random tables for --numeric-check");
  markov->add_option("--seed", cfg.seed, "seed for --numeric-check");

  CLI::App* region = app.add_subcommand("region", "evaluate or trace achievable rates");
  region->add_option("model", model_path, "model JSON file")->required();
  region->add_flag("--frontier", frontier, "trace the one-sided helper frontier");
  region->add_option("--dx", dx_max, "distortion target for x");
  region->add_option("--dz", dz_max, "distortion target for z");
  region->add_option("--weights", weights_text, "w1,w2,w3 for the weighted-sum objective");
  region->add_option("--grid", grid_text, "helper-rate grid: 'a:b:n' or comma list");
  add_search_flags(region);

  CLI::App* gaussian = app.add_subcommand("gaussian", "closed-form Gaussian rates");
  gaussian->add_option("--sigma-a", var_a, "variance of A")->required();
  gaussian->add_option("--sigma-b", var_b, "variance of B")->required();
  gaussian->add_option("--sigma-z", var_z, "variance of Z")->required();
  gaussian->add_option("--ry", ry, "helper rate in bits");
  gaussian->add_option("--dx", gdx, "mean-square target for x");
  gaussian->add_option("--dz", gdz, "mean-square target for z");

  CLI::App* tradeoff = app.add_subcommand("tradeoff", "helper-value diagnostics");
  tradeoff->add_option("model", model_path, "model JSON file")->required();
  tradeoff->add_option("--d", d_target, "distortion target for x")->required();
  tradeoff->add_option("--lambda", lambda, "support-line weight on the helper rate");
  tradeoff->add_flag("--slope-cert", slope, "certify the steepest frontier slope");
  tradeoff->add_option("--grid", grid_text, "helper-rate grid for --slope-cert");
  tradeoff->add_option("--re", re, "encoder-side helper link rate");
  tradeoff->add_option("--rd", rd, "decoder-side helper link rate");
  add_search_flags(tradeoff);

  CLI::App* oracle = app.add_subcommand(
      "oracle", "regenerate a frozen reference frontier (slow, explicit only)");
  oracle->add_option("-o,--out", oracle_out, "fixture file to (over)write")->required();
  oracle->add_option("--px1", px1, "P(x=1)");
  oracle->add_option("--fy", fy, "flip probability x->y");
  oracle->add_option("--fz", fz, "flip probability x->z");
  oracle->add_option("--d", d_target, "distortion target")->required();
  oracle->add_option("--levels", levels, "simplex lattice points per edge");
  oracle->add_option("--card-u", card_u, "helper alphabet size");
  oracle->add_option("--card-w", card_w, "description alphabet size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (markov->parsed())
      return cmd_markov(factors_path, query_text, numeric_check, trials, cfg.seed);
    if (region->parsed())
      return cmd_region(model_path, cfg, frontier, dx_max, dz_max, weights_text, grid_text);
    if (gaussian->parsed()) return cmd_gaussian(var_a, var_b, var_z, ry, gdx, gdz);
    if (tradeoff->parsed())
      return cmd_tradeoff(model_path, cfg, lambda, d_target, slope, grid_text, re, rd);
    if (oracle->parsed())
      return cmd_oracle(oracle_out, px1, fy, fz, d_target, levels, card_u, card_w);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBadInput;
  }
  return kBadInput;
}
