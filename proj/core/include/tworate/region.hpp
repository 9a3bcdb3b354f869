// Achievable rate-distortion regions for two-way lossy coding with a helper,
// finite alphabets.
//
// Setting: terminals hold X and Z with a helper observing Y.  The helper
// describes U (rate r1 = I(Y;U|Z)), the Z side answers with V (rate
// r2 = I(Z;V|U,X)), the X side closes with W (rate r3 = I(X;W|U,V,Z)).
// The X side reconstructs Z from (U,V,X); the Z side reconstructs X from
// (U,W,Z).  Feasible joints factor as
//   p(x,y) p(z|x) p(u|y) p(v|u,z) p(w|u,v,x).
// Alphabet sizes |U| <= |Y|+4, |V| <= |Z||U|+3, |W| <= |U||V||X|+1 lose
// nothing; the optimizer enforces them as caps and searches smaller by
// default (see cardinality_sufficiency_probe for the empirical gap check).
//
// Two one-sided specializations are covered as well: the helper-aided
// Wyner-Ziv setup with chain Y - X - Z (trace_frontier_helper), and the
// degraded-helper setup with chain Y - Z - X (evaluate_yzx).  The
// multi-stage exchange generalization is in evaluate_multistage.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tworate/prob.hpp"

namespace tworate {

enum class ChainDirection { YXZ, YZX };

// Joint source over variables named x, y, z plus the declared side-chain.
// Construction verifies the chain numerically (CMI <= kMarkovTol) and
// validates any attached distortion matrices; violations throw.
struct SourceModel {
  JointPmf pxyz;
  ChainDirection chain = ChainDirection::YXZ;
  std::optional<DistortionMeasure> dx;   // scores reconstructions of x
  std::optional<DistortionMeasure> dz;   // scores reconstructions of z

  static SourceModel create(JointPmf pxyz, ChainDirection chain,
                            std::optional<DistortionMeasure> dx,
                            std::optional<DistortionMeasure> dz);

  const Variable& var(std::string_view name) const { return pxyz.variable(name); }

  // Convenience builder: x ~ Bernoulli(px1), y and z noisy copies of x
  // (flip probabilities fy, fz), Hamming distortion both sides.
  static SourceModel binary_symmetric(double px1, double fy, double fz);
};

// Deterministic reconstruction rule: args (in the listed order) -> recon
// symbol, one entry per row-major args tuple.
struct ReconstructionMap {
  std::vector<Variable> args;
  Variable recon;
  std::vector<int> symbol;     // size prod(card(args)), values in [0, recon.cardinality)

  void validate() const;
  std::size_t arg_index(std::span<const int> outcome) const;
};

struct ReconstructionResult {
  ReconstructionMap map;
  double distortion = 0.0;
};

// Best deterministic rule args -> recon under d, i.e. per args tuple the
// symbol minimizing the conditional expected cost (ties: smallest symbol).
ReconstructionResult optimal_reconstruction(const JointPmf& j,
                                            const std::vector<std::string>& args,
                                            const std::string& target,
                                            const DistortionMeasure& d);

// E d(target, map(args)) without materializing the recon variable.
double distortion_with_map(const JointPmf& j, const ReconstructionMap& m,
                           const std::string& target, const DistortionMeasure& d);

// ------------------------------------------------------------- two-way

// Kernels p(u|y), p(v|u,z), p(w|u,v,x); reconstruction rules are optional,
// absent means "use the optimal rule for the model's distortion measure".
struct AuxScheme {
  Kernel u_given_y;
  Kernel v_given_uz;
  Kernel w_given_uvx;
  std::optional<ReconstructionMap> zhat;   // args (u, v, x)
  std::optional<ReconstructionMap> xhat;   // args (u, w, z)
};

struct RatePoint {
  double r1 = 0, r2 = 0, r3 = 0;
  double dx = 0, dz = 0;
};

// Requires chain YXZ and both distortion measures on the model.
RatePoint evaluate_rate_point(const SourceModel& m, const AuxScheme& s);

// -------------------------------------------------- one-sided specializations

// Chain Y - X - Z, helper U from Y, description W from (X,U), reconstruction
// of X from (U,W,Z).  r1 = I(Y;U|Z), r = I(X;W|U,Z).
struct HelperScheme {
  Kernel u_given_y;
  Kernel w_given_xu;
  std::optional<ReconstructionMap> xhat;   // args (u, w, z)
};

struct HelperRatePoint {
  double r1 = 0, rate = 0, distortion = 0;
};

HelperRatePoint evaluate_helper_point(const SourceModel& m, const HelperScheme& s);

// Chain Y - Z - X, helper U from Y, description V from (X,U), reconstruction
// of X from (U,V,Z).  r1 = I(U;Y|X), r = I(X;V|U,Z).
struct YzxScheme {
  Kernel u_given_y;
  Kernel v_given_xu;
  std::optional<ReconstructionMap> xhat;   // args (u, v, z)
};

HelperRatePoint evaluate_yzx(const SourceModel& m, const YzxScheme& s);

// ------------------------------------------------------------ multi-stage

// K rounds of exchange after the helper description: at stage k the Z side
// sends V_k from (Z,U,V^{k-1},W^{k-1}), the X side answers with W_k from
// (X,U,V^k,W^{k-1}).  Stage variables must be named v1,w1,v2,w2,...
struct MultiStageScheme {
  Kernel u_given_y;
  struct Stage {
    Kernel v;   // conditioning set exactly {z, u, v1..v_{k-1}, w1..w_{k-1}}
    Kernel w;   // conditioning set exactly {x, u, v1..v_k,   w1..w_{k-1}}
  };
  std::vector<Stage> stages;
  std::optional<ReconstructionMap> xhat;   // args (u, w1..wK, z)
  std::optional<ReconstructionMap> zhat;   // args (u, v1..vK, x)
};

struct MultiStageRates {
  double ry = 0;                  // I(U;Y) — unconditioned, Z never sees U directly
  double rz = 0, rx = 0;          // sums of the per-stage conditional rates
  std::vector<double> rz_stage, rx_stage;
  double rz_aggregate = 0;        // I(Z; V^K, W^K | X, U) — equals rz
  double rx_aggregate = 0;        // I(X; V^K, W^K | Z, U) — equals rx
  double dx = 0, dz = 0;
};

MultiStageRates evaluate_multistage(const SourceModel& m, const MultiStageScheme& s);

// ------------------------------------------------------------- optimization

struct SearchBudget {
  int restarts = 12;
  int refinement_rounds = 24;
  int grid_levels = 4;          // step sizes 1/L..1 toward a vertex per move
  int card_u = 0, card_v = 0, card_w = 0;   // 0 = modest defaults; capped at the no-loss bounds
  std::uint64_t seed = 1;
  double feasibility_tol = 1e-7;
};

struct OptimizeResult {
  AuxScheme scheme;
  RatePoint point;
  double objective = 0.0;       // weights . (r1,r2,r3) of the returned point
  bool feasible = false;
};

// Minimize weights.(r1,r2,r3) subject to dx <= dx_max, dz <= dz_max over the
// feasible kernel family.  Multi-start + coordinate-wise row refinement with
// a ramped distortion penalty; final feasibility is enforced strictly and
// the best infeasible candidate is never returned.  Deterministic for a
// given seed regardless of worker count (TWORATE_WORKERS caps threads).
// Throws if a distortion target is below its full-information floor.
OptimizeResult optimize_region(const SourceModel& m, double dx_max, double dz_max,
                               std::array<double, 3> weights, const SearchBudget& budget);

struct FrontierPoint {
  double r1 = 0;          // helper-rate grid value
  double rate = 0;        // envelope of min I(X;W|U,Z) at that helper rate
  double distortion = 0;  // distortion certificate for the enveloped point
};

// Sweep the helper-rate grid for chain Y - X - Z: at each cap solve
// min I(X;W|U,Z) s.t. I(Y;U|Z) <= cap, E d <= d, then post-process the
// sweep to its lower convex nonincreasing envelope (time sharing is free).
std::vector<FrontierPoint> trace_frontier_helper(const SourceModel& m, double d,
                                                 std::span<const double> r1_grid,
                                                 const SearchBudget& budget);

// Same machinery, single point: min I(X;W|U,Z) + lambda_r1 * I(Y;U|Z)
// s.t. E d <= d (and optionally I(Y;U|Z) <= r1_cap).
struct HelperSearchResult {
  HelperScheme scheme;
  HelperRatePoint point;
  double objective = 0.0;
  bool feasible = false;
};
HelperSearchResult optimize_helper_point(const SourceModel& m, double d,
                                         double lambda_r1,
                                         std::optional<double> r1_cap,
                                         const SearchBudget& budget);

// Weighted-sum multi-stage search, small instances only (K <= 2, source and
// aux alphabets <= 3): minimize wy*ry + wz*rz + wx*rx s.t. distortions.
struct MultiStageOptimizeResult {
  MultiStageScheme scheme;
  MultiStageRates rates;
  double objective = 0.0;
  bool feasible = false;
};
MultiStageOptimizeResult optimize_multistage(const SourceModel& m, int stages,
                                             double dx_max, double dz_max,
                                             std::array<double, 3> weights,
                                             const SearchBudget& budget);

// Re-run the weighted-sum search at a base cardinality triple and at each
// one-step increment; a near-zero best-objective drop is evidence the base
// cardinalities already suffice.
struct CardinalityProbeRow {
  int card_u, card_v, card_w;
  double objective;
  bool feasible;
};
struct CardinalityProbeReport {
  CardinalityProbeRow base;
  std::vector<CardinalityProbeRow> increments;
  double max_improvement = 0.0;   // base.objective - min over increments
};
CardinalityProbeReport cardinality_sufficiency_probe(const SourceModel& m,
                                                     double dx_max, double dz_max,
                                                     std::array<double, 3> weights,
                                                     const SearchBudget& budget);

// Lower convex nonincreasing envelope of (r1, rate) points, evaluated at the
// given grid; distortion is interpolated alongside.  Exposed for reuse by
// the oracle comparison and the slope certificate.
std::vector<FrontierPoint> lower_convex_envelope(std::vector<FrontierPoint> pts,
                                                 std::span<const double> grid);

}  // namespace tworate
