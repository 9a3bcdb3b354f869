#include "tworate/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "detail.hpp"

namespace tworate {
namespace {

int worker_count(std::uint64_t tasks) {
  int cap = 0;
  if (const char* env = std::getenv("TWORATE_WORKERS")) {
    cap = std::atoi(env);
    if (cap < 1) cap = 1;
  }
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int n = (cap > 0) ? std::min(cap, hw) : hw;
  if (static_cast<std::uint64_t>(n) > tasks) n = static_cast<int>(tasks);
  return std::max(1, n);
}

// Pareto-minimal set over (r1, rate): map keyed by r1 with rates strictly
// decreasing in r1.  The minimal set of a point cloud is unique, so insert
// order (and thread scheduling upstream) cannot change the result.
struct ParetoSet {
  struct Val {
    double rate, distortion;
  };
  std::map<double, Val> pts;

  void insert(double r1, double rate, double distortion) {
    auto it = pts.lower_bound(r1);
    if (it != pts.begin()) {
      auto p = std::prev(it);
      if (p->second.rate <= rate) return;   // dominated by a cheaper-r1 point
    }
    if (it != pts.end() && it->first == r1) {
      if (it->second.rate <= rate) return;
      it = pts.erase(it);
    }
    while (it != pts.end() && it->second.rate >= rate) it = pts.erase(it);
    pts.emplace(r1, Val{rate, distortion});
  }

  void merge(const ParetoSet& other) {
    for (const auto& [r1, v] : other.pts) insert(r1, v.rate, v.distortion);
  }
};

// Mixed-radix enumeration of one lattice row choice per kernel row.
void kernel_from_choice(Kernel& k, const std::vector<std::vector<double>>& lattice,
                        std::uint64_t choice) {
  const std::size_t tc = static_cast<std::size_t>(k.target.cardinality);
  const std::size_t nrows = k.row_count();
  const std::uint64_t base = lattice.size();
  for (std::size_t r = 0; r < nrows; ++r) {
    const auto& row = lattice[static_cast<std::size_t>(choice % base)];
    choice /= base;
    std::copy(row.begin(), row.end(), k.rows.begin() + static_cast<std::ptrdiff_t>(r * tc));
  }
}

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp, std::uint64_t limit) {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (v > limit / base)
      throw std::invalid_argument("quantized enumeration exceeds the evaluation cap");
    v *= base;
  }
  return v;
}

}  // namespace

std::vector<std::vector<double>> simplex_lattice(int cells, int levels) {
  if (cells < 1) throw std::invalid_argument("simplex_lattice: cells must be >= 1");
  if (levels < 2) throw std::invalid_argument("simplex_lattice: levels must be >= 2");
  const int total = levels - 1;
  std::vector<std::vector<double>> out;
  std::vector<int> part(static_cast<std::size_t>(cells), 0);
  // lexicographic enumeration of compositions of `total` into `cells` parts
  auto emit = [&]() {
    std::vector<double> row(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i)
      row[static_cast<std::size_t>(i)] = static_cast<double>(part[static_cast<std::size_t>(i)]) / total;
    out.push_back(std::move(row));
  };
  std::function<void(int, int)> rec = [&](int idx, int remaining) {
    if (idx == cells - 1) {
      part[static_cast<std::size_t>(idx)] = remaining;
      emit();
      return;
    }
    for (int m = 0; m <= remaining; ++m) {
      part[static_cast<std::size_t>(idx)] = m;
      rec(idx + 1, remaining - m);
    }
  };
  rec(0, total);
  return out;
}

std::vector<OraclePoint> exhaustive_frontier(const SourceModel& m, double d,
                                             const QuantizedKernelSpace& space) {
  if (m.chain != ChainDirection::YXZ || !m.dx.has_value())
    throw std::invalid_argument("exhaustive frontier needs chain y - x - z and a distortion for x");
  if (space.card_u < 1 || space.card_w < 1)
    throw std::invalid_argument("auxiliary cardinalities must be >= 1");
  if (!(d >= 0.0)) throw std::invalid_argument("distortion target must be >= 0");

  const Variable vy = m.var("y"), vx = m.var("x");
  const Variable tu{"u", space.card_u}, tw{"w", space.card_w};

  const auto u_lattice = space.card_u == 1 ? std::vector<std::vector<double>>{{1.0}}
                                           : simplex_lattice(space.card_u, space.levels);
  const auto w_lattice = space.card_w == 1 ? std::vector<std::vector<double>>{{1.0}}
                                           : simplex_lattice(space.card_w, space.levels);

  Kernel u_proto{{vy}, tu, {}};
  u_proto.rows.assign(u_proto.row_count() * static_cast<std::size_t>(space.card_u), 0.0);
  Kernel w_proto{{vx, tu}, tw, {}};
  w_proto.rows.assign(w_proto.row_count() * static_cast<std::size_t>(space.card_w), 0.0);

  const std::uint64_t nu = checked_pow(u_lattice.size(), u_proto.row_count(), space.max_evaluations);
  const std::uint64_t nw = checked_pow(w_lattice.size(), w_proto.row_count(), space.max_evaluations);
  if (nu > space.max_evaluations / nw)
    throw std::invalid_argument(fmt::format(
        "quantized enumeration needs {}x{} evaluations, above the cap of {}", nu, nw,
        space.max_evaluations));

  const int workers = worker_count(nu);
  std::vector<ParetoSet> locals(static_cast<std::size_t>(workers));
  std::atomic<std::uint64_t> next_u{0};
  auto work = [&](int wi) {
    Kernel uk = u_proto, wk = w_proto;
    ParetoSet& local = locals[static_cast<std::size_t>(wi)];
    while (true) {
      const std::uint64_t iu = next_u.fetch_add(1);
      if (iu >= nu) return;
      kernel_from_choice(uk, u_lattice, iu);
      for (std::uint64_t iw = 0; iw < nw; ++iw) {
        kernel_from_choice(wk, w_lattice, iw);
        HelperScheme s{uk, wk, std::nullopt};
        HelperRatePoint p = evaluate_helper_point(m, s);
        if (p.distortion <= d + 1e-12)
          local.insert(p.r1, p.rate, p.distortion);
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int wi = 0; wi < workers; ++wi) pool.emplace_back(work, wi);
    for (auto& t : pool) t.join();
  }
  ParetoSet all;
  for (const auto& l : locals) all.merge(l);

  std::vector<OraclePoint> out;
  for (const auto& [r1, v] : all.pts) out.push_back({r1, v.rate, v.distortion});
  return out;
}

// --------------------------------------------------------------- markov scans

JointPmf random_factor_joint(const FactorizationSpec& spec, std::span<const int> cards,
                             std::uint64_t seed) {
  spec.validate();
  if (cards.size() != spec.variables.size())
    throw std::invalid_argument("random_factor_joint: one cardinality per variable required");
  std::vector<Variable> vars;
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    if (cards[i] < 1) throw std::invalid_argument("cardinalities must be >= 1");
    vars.push_back({spec.variables[i], cards[i]});
  }
  std::size_t total = 1;
  for (const auto& v : vars) total *= static_cast<std::size_t>(v.cardinality);
  std::vector<double> table(total, 1.0);

  detail::SplitMix64 rng(detail::mix_seed(seed, 0xFAC702));
  for (const auto& scope : spec.factors) {
    // positive factor table, entries in [0.1, 1): bounded away from zero so
    // the product never collapses numerically
    std::vector<int> pos;
    std::size_t fsize = 1;
    for (const auto& name : scope) {
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name) pos.push_back(static_cast<int>(i));
      fsize *= static_cast<std::size_t>(vars[static_cast<std::size_t>(pos.back())].cardinality);
    }
    std::vector<double> f(fsize);
    for (auto& x : f) x = 0.1 + 0.9 * rng.uniform01();

    std::vector<std::size_t> fstride(vars.size(), 0);
    std::size_t acc = 1;
    for (int i = static_cast<int>(pos.size()) - 1; i >= 0; --i) {
      fstride[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] = acc;
      acc *= static_cast<std::size_t>(vars[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])].cardinality);
    }
    detail::for_each_cell(vars, fstride,
                          [&](std::size_t i, std::size_t fi) { table[i] *= f[fi]; });
  }
  return JointPmf::from_unnormalized(std::move(vars), std::move(table));
}

MarkovScanOutcome exhaustive_markov_scan(const FactorizationSpec& spec,
                                         const SeparationQuery& query,
                                         std::span<const int> cards, int trials,
                                         std::uint64_t seed, double tol) {
  MarkovScanOutcome out;
  ChainVerdict v = verify_chain(spec, query);
  out.established = v.established;
  out.witness = v.witness_path;
  if (!v.established) return out;
  for (int t = 0; t < trials; ++t) {
    JointPmf j = random_factor_joint(spec, cards, detail::mix_seed(seed, static_cast<std::uint64_t>(t)));
    const double cmi = j.conditional_mutual_information(query.g1, query.g3, query.g2);
    out.max_cmi = std::max(out.max_cmi, cmi);
    ++out.numeric_trials;
  }
  (void)tol;
  return out;
}

RandomScanReport random_factorization_scan(int num_vars, int cases, int trials,
                                           std::uint64_t seed, double tol) {
  if (num_vars < 3) throw std::invalid_argument("need at least 3 variables for a chain query");
  RandomScanReport rep;
  for (int c = 0; c < cases; ++c) {
    detail::SplitMix64 rng(detail::mix_seed(seed, 0xCA5E000ULL + static_cast<std::uint64_t>(c)));
    FactorizationSpec spec;
    for (int i = 0; i < num_vars; ++i) spec.variables.push_back(fmt::format("n{}", i));
    const int nfactors = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(num_vars + 1));
    for (int f = 0; f < nfactors; ++f) {
      const int scope_size = 1 + static_cast<int>(rng.next() % 3);
      std::vector<int> picked;
      while (static_cast<int>(picked.size()) < scope_size) {
        const int v = static_cast<int>(rng.next() % static_cast<std::uint64_t>(num_vars));
        if (std::find(picked.begin(), picked.end(), v) == picked.end()) picked.push_back(v);
      }
      std::vector<std::string> scope;
      for (int v : picked) scope.push_back(spec.variables[static_cast<std::size_t>(v)]);
      spec.factors.push_back(std::move(scope));
    }
    // random disjoint nonempty groups: shuffle indices, cut twice
    std::vector<int> perm(static_cast<std::size_t>(num_vars));
    for (int i = 0; i < num_vars; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = num_vars - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    const int used = 3 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(num_vars - 2));
    const int cut1 = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(used - 2));
    const int cut2 = cut1 + 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(used - cut1 - 1));
    SeparationQuery q;
    for (int i = 0; i < cut1; ++i) q.g1.push_back(spec.variables[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    for (int i = cut1; i < cut2; ++i) q.g2.push_back(spec.variables[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    for (int i = cut2; i < used; ++i) q.g3.push_back(spec.variables[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);

    std::vector<int> cards(static_cast<std::size_t>(num_vars), 2);
    MarkovScanOutcome o = exhaustive_markov_scan(spec, q, cards, trials, rng.next(), tol);
    ++rep.total;
    if (o.established) {
      ++rep.established;
      rep.worst_cmi = std::max(rep.worst_cmi, o.max_cmi);
      if (o.max_cmi > tol) ++rep.false_positives;
    }
  }
  return rep;
}

// ------------------------------------------------------------------ fixtures

SourceModel fixture_model(const OracleFixtureMeta& meta) {
  if (meta.instance != "binary_symmetric")
    throw std::invalid_argument(fmt::format("unknown fixture instance '{}'", meta.instance));
  return SourceModel::binary_symmetric(meta.px1, meta.fy, meta.fz);
}

void write_oracle_fixture(const std::filesystem::path& path, const OracleFixture& fx) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << "# oracle-frontier v1\n";
  out << fmt::format("# instance={} px1={:.17g} fy={:.17g} fz={:.17g}\n", fx.meta.instance,
                     fx.meta.px1, fx.meta.fy, fx.meta.fz);
  out << fmt::format("# d={:.17g} levels={} card_u={} card_w={}\n", fx.meta.d, fx.meta.levels,
                     fx.meta.card_u, fx.meta.card_w);
  out << "r1,r,dx\n";
  for (const auto& p : fx.points)
    out << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.r1, p.rate, p.distortion);
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

namespace {

std::map<std::string, std::string> parse_meta_line(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream in(line.substr(1));   // past '#'
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

}  // namespace

OracleFixture read_oracle_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
  OracleFixture fx;
  std::string line;
  bool versioned = false, header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("oracle-frontier v1") != std::string::npos) {
        versioned = true;
        continue;
      }
      for (const auto& [k, v] : parse_meta_line(line)) {
        if (k == "instance") fx.meta.instance = v;
        else if (k == "px1") fx.meta.px1 = std::stod(v);
        else if (k == "fy") fx.meta.fy = std::stod(v);
        else if (k == "fz") fx.meta.fz = std::stod(v);
        else if (k == "d") fx.meta.d = std::stod(v);
        else if (k == "levels") fx.meta.levels = std::stoi(v);
        else if (k == "card_u") fx.meta.card_u = std::stoi(v);
        else if (k == "card_w") fx.meta.card_w = std::stoi(v);
      }
      continue;
    }
    if (!header_seen) {
      if (line != "r1,r,dx")
        throw std::runtime_error(fmt::format("'{}': unexpected header '{}'", path.string(), line));
      header_seen = true;
      continue;
    }
    OraclePoint p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &p.r1, &p.rate, &p.distortion) != 3)
      throw std::runtime_error(fmt::format("'{}': bad data row '{}'", path.string(), line));
    fx.points.push_back(p);
  }
  if (!versioned) throw std::runtime_error(fmt::format("'{}': missing version line", path.string()));
  if (!header_seen) throw std::runtime_error(fmt::format("'{}': missing header", path.string()));
  return fx;
}

OracleFixture generate_oracle_fixture(const OracleFixtureMeta& meta) {
  SourceModel m = fixture_model(meta);
  QuantizedKernelSpace space;
  space.levels = meta.levels;
  space.card_u = meta.card_u;
  space.card_w = meta.card_w;
  OracleFixture fx;
  fx.meta = meta;
  fx.points = exhaustive_frontier(m, meta.d, space);
  return fx;
}

}  // namespace tworate
