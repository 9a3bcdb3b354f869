// Slow, exhaustive reference computations the fast paths are measured
// against: brute-force search over probability-simplex lattices for the
// one-sided frontier, random-table numeric confirmation of graph-certified
// Markov chains, and the versioned CSV fixtures that freeze oracle output
// so CI replays instead of regenerating.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tworate/markov_graph.hpp"
#include "tworate/region.hpp"

namespace tworate {

// Kernel rows drawn from the lattice { m / (levels-1) } on the simplex.
struct QuantizedKernelSpace {
  int levels = 5;            // points per simplex edge, >= 2
  int card_u = 2;
  int card_w = 2;
  std::uint64_t max_evaluations = 100'000'000;   // enumeration guard, throws above
};

// All pmfs over `cells` symbols with entries m/(levels-1), in lexicographic
// composition order (deterministic).
std::vector<std::vector<double>> simplex_lattice(int cells, int levels);

struct OraclePoint {
  double r1 = 0, rate = 0, distortion = 0;
};

// Enumerate every quantized scheme (p(u|y), p(w|x,u)), keep those meeting
// E d <= d, and return the Pareto-minimal (r1, rate) set sorted by r1.
// Deterministic; parallel inside (TWORATE_WORKERS caps threads), the merge
// is order-independent because the Pareto-minimal set is unique.
std::vector<OraclePoint> exhaustive_frontier(const SourceModel& m, double d,
                                             const QuantizedKernelSpace& space);

// ------------------------------------------------------------ markov scans

// Product of independent positive random tables, one per factor scope,
// normalized once, as a joint over the spec's variables.
JointPmf random_factor_joint(const FactorizationSpec& spec, std::span<const int> cards,
                             std::uint64_t seed);

struct MarkovScanOutcome {
  bool established = false;
  std::vector<std::string> witness;   // escaping path when not established
  int numeric_trials = 0;
  double max_cmi = 0.0;               // worst I(G1;G3|G2) across random tables
};

// Graph verdict for one factorization plus `trials` random-table numeric
// replications when the verdict is Established.
MarkovScanOutcome exhaustive_markov_scan(const FactorizationSpec& spec,
                                         const SeparationQuery& query,
                                         std::span<const int> cards, int trials,
                                         std::uint64_t seed, double tol = kMarkovTol);

struct RandomScanReport {
  int total = 0;
  int established = 0;
  int false_positives = 0;   // Established verdicts numerically contradicted
  double worst_cmi = 0.0;    // across all Established cases
};

// Random factorizations over num_vars binary variables with random
// three-group queries; every Established verdict is replayed numerically.
// The soundness claim is exactly false_positives == 0.
RandomScanReport random_factorization_scan(int num_vars, int cases, int trials,
                                           std::uint64_t seed, double tol = kMarkovTol);

// ---------------------------------------------------------------- fixtures

struct OracleFixtureMeta {
  std::string instance;      // "binary_symmetric" is the only builder today
  double px1 = 0.5, fy = 0, fz = 0;
  double d = 0;
  int levels = 0, card_u = 0, card_w = 0;
};

struct OracleFixture {
  OracleFixtureMeta meta;
  std::vector<OraclePoint> points;
};

SourceModel fixture_model(const OracleFixtureMeta& meta);

// CSV, '#'-prefixed metadata lines, header "r1,r,dx", 17 significant digits
// so replay is faithful.  Writing is only ever done by the explicit
// regeneration path; tests read.
void write_oracle_fixture(const std::filesystem::path& path, const OracleFixture& fx);
OracleFixture read_oracle_fixture(const std::filesystem::path& path);

// Convenience: run the enumeration for a fixture's instance and parameters.
OracleFixture generate_oracle_fixture(const OracleFixtureMeta& meta);

}  // namespace tworate
