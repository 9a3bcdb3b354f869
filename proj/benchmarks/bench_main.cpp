#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "tworate/markov_graph.hpp"
#include "tworate/oracle.hpp"
#include "tworate/region.hpp"

using namespace tworate;

namespace {

double splitmix01(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

JointPmf random_joint(int num_vars, int card, std::uint64_t seed) {
  std::vector<Variable> vars;
  std::size_t cells = 1;
  for (int i = 0; i < num_vars; ++i) {
    vars.push_back({std::string(1, static_cast<char>('a' + i)), card});
    cells *= static_cast<std::size_t>(card);
  }
  std::vector<double> w(cells);
  for (auto& e : w) e = 0.01 + splitmix01(seed);
  return JointPmf::from_unnormalized(std::move(vars), std::move(w));
}

Kernel random_kernel(std::vector<Variable> given, Variable target, std::uint64_t seed) {
  Kernel k{std::move(given), target, {}};
  for (std::size_t r = 0; r < k.row_count(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(target.cardinality));
    double tot = 0;
    for (auto& e : row) tot += (e = 0.05 + splitmix01(seed));
    for (double e : row) k.rows.push_back(e / tot);
  }
  return k;
}

}  // namespace

static void ConditionalMutualInformation(benchmark::State& state) {
  const int vars = static_cast<int>(state.range(0));
  const JointPmf j = random_joint(vars, 3, 17);
  for (auto _ : state) {
    double v = j.conditional_mutual_information({"a"}, {"b"}, {"c"});
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(ConditionalMutualInformation)->DenseRange(3, 7);

static void TwoWayEvaluate(benchmark::State& state) {
  const SourceModel m = SourceModel::binary_symmetric(0.5, 0.2, 0.1);
  const AuxScheme s{random_kernel({{"y", 2}}, {"u", 3}, 5),
                    random_kernel({{"u", 3}, {"z", 2}}, {"v", 3}, 6),
                    random_kernel({{"u", 3}, {"v", 3}, {"x", 2}}, {"w", 3}, 7),
                    {},
                    {}};
  for (auto _ : state) {
    RatePoint p = evaluate_rate_point(m, s);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(TwoWayEvaluate);

static void HelperEvaluate(benchmark::State& state) {
  const SourceModel m = SourceModel::binary_symmetric(0.5, 0.2, 0.1);
  const HelperScheme s{random_kernel({{"y", 2}}, {"u", 3}, 5),
                       random_kernel({{"x", 2}, {"u", 3}}, {"w", 3}, 6),
                       {}};
  for (auto _ : state) {
    HelperRatePoint p = evaluate_helper_point(m, s);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(HelperEvaluate);

static void HelperPointSearch(benchmark::State& state) {
  const SourceModel m = SourceModel::binary_symmetric(0.5, 0.2, 0.1);
  SearchBudget b;
  b.restarts = static_cast<int>(state.range(0));
  b.refinement_rounds = 8;
  b.grid_levels = 3;
  for (auto _ : state) {
    HelperSearchResult r = optimize_helper_point(m, 0.05, 0.5, {}, b);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(HelperPointSearch)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void OracleSlice(benchmark::State& state) {
  const SourceModel m = SourceModel::binary_symmetric(0.5, 0.2, 0.1);
  QuantizedKernelSpace space;
  space.levels = static_cast<int>(state.range(0));
  space.card_u = 2;
  space.card_w = 2;
  for (auto _ : state) {
    auto pts = exhaustive_frontier(m, 0.05, space);
    benchmark::DoNotOptimize(pts);
  }
}
BENCHMARK(OracleSlice)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

static void ChainVerify(benchmark::State& state) {
  FactorizationSpec spec;
  spec.variables = {"x1", "x2", "x3", "y1", "y2", "y3", "z1", "z2", "z3", "t1", "t2"};
  spec.factors = {{"x1", "y1"}, {"z1", "x1"}, {"x2", "y2"}, {"z2", "x2"},
                  {"x3", "y3"}, {"z3", "x3"}, {"t1", "y1", "y2", "y3"},
                  {"t2", "z1", "z2", "z3", "t1"}};
  const SeparationQuery q = parse_separation_query("x3 | t1,t2,x1,x2,z3,y2 | z2");
  for (auto _ : state) {
    ChainVerdict v = verify_chain(spec, q);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(ChainVerify);

int main(int argc, char** argv) {
  ::benchmark::Initialize(&argc, argv);
  if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  ::benchmark::RunSpecifiedBenchmarks();
  ::benchmark::Shutdown();
  return 0;
}
