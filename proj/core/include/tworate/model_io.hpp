// File formats for the command-line front end.
//
// Model file (JSON):
//   {
//     "variables": [{"name":"x","cardinality":2}, ... exactly x, y, z],
//     "pmf": [ ... prod(cardinalities) numbers, row-major in declared order ],
//     "chain": "y-x-z" | "y-z-x",
//     "distortions": {                       // optional per side
//       "dx": {"recon_cardinality":2, "matrix":[[0,1],[1,0]]},
//       "dz": { ... }
//     },
//     "gaussian": {"var_a":1,"var_b":1,"var_z":1}   // optional block
//   }
// The declared chain is verified numerically on load; a violation is a hard
// error, not a warning.
//
// Factors file (JSON) for the chain checker:
//   {
//     "variables": ["x1","x2",...]            // or {"name":..,"cardinality":..}
//     "factors": [["x1","y2"], ...]
//   }
// Cardinalities default to 2 and only matter for --numeric-check.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tworate/gaussian.hpp"
#include "tworate/markov_graph.hpp"
#include "tworate/region.hpp"

namespace tworate {

struct ModelFile {
  std::optional<SourceModel> model;
  std::optional<GaussianSourceSpec> gaussian;
};

// Throws std::runtime_error with a line-oriented message on parse or
// validation failure.
ModelFile read_model_file(const std::filesystem::path& path);

struct FactorsFile {
  FactorizationSpec spec;
  std::vector<int> cardinalities;   // aligned with spec.variables
};

FactorsFile read_factors_file(const std::filesystem::path& path);

struct RunConfig {
  std::uint64_t seed = 1;
  int restarts = 12;
  int refinement_rounds = 24;
  int grid_levels = 4;
  int card_u = 0, card_v = 0, card_w = 0;
  std::string out;                  // empty = stdout

  SearchBudget budget() const;
};

// Frontier rows as "r1,r,dx" with 9 significant digits; deterministic bytes
// for identical inputs.
std::string frontier_csv(const std::vector<FrontierPoint>& pts);

}  // namespace tworate
