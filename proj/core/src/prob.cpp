#include "tworate/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "detail.hpp"

namespace tworate {

using detail::for_each_cell;

namespace {

std::size_t checked_table_size(const std::vector<Variable>& vars) {
  std::size_t n = 1;
  for (const auto& v : vars) {
    if (v.name.empty()) throw std::invalid_argument("variable with empty name");
    if (v.cardinality < 1)
      throw std::invalid_argument(fmt::format("variable '{}' has cardinality {}", v.name, v.cardinality));
    n *= static_cast<std::size_t>(v.cardinality);
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& v : vars)
    if (!seen.insert(v.name).second)
      throw std::invalid_argument(fmt::format("duplicate variable name '{}'", v.name));
  return n;
}

long double sum_table(const std::vector<double>& t) {
  long double s = 0.0L;
  for (double x : t) s += x;
  return s;
}

double entropy_of_table(const std::vector<double>& t) {
  double h = 0.0;
  for (double p : t)
    if (p > 0.0) h -= p * std::log2(p);
  return h < 0.0 ? 0.0 : h;
}

}  // namespace

// ---------------------------------------------------------------- Kernel

std::size_t Kernel::row_count() const {
  std::size_t n = 1;
  for (const auto& v : given) n *= static_cast<std::size_t>(v.cardinality);
  return n;
}

void Kernel::validate() const {
  std::vector<Variable> all = given;
  all.push_back(target);
  checked_table_size(all);
  const std::size_t rows_n = row_count();
  const std::size_t tcard = static_cast<std::size_t>(target.cardinality);
  if (rows.size() != rows_n * tcard)
    throw std::invalid_argument(fmt::format(
        "kernel for '{}': expected {} entries, got {}", target.name, rows_n * tcard, rows.size()));
  for (std::size_t r = 0; r < rows_n; ++r) {
    long double s = 0.0L;
    for (std::size_t t = 0; t < tcard; ++t) {
      double p = rows[r * tcard + t];
      if (!(p >= 0.0) || !std::isfinite(p))
        throw std::invalid_argument(fmt::format("kernel for '{}': bad entry in row {}", target.name, r));
      s += p;
    }
    if (std::fabs(static_cast<double>(s - 1.0L)) > kPmfSumTol)
      throw std::invalid_argument(fmt::format(
          "kernel for '{}': row {} sums to {:.12g}", target.name, r, static_cast<double>(s)));
  }
}

Kernel Kernel::copy_of(std::vector<Variable> given, Variable target, const std::string& which) {
  int pos = -1;
  for (std::size_t i = 0; i < given.size(); ++i)
    if (given[i].name == which) pos = static_cast<int>(i);
  if (pos < 0) throw std::invalid_argument(fmt::format("copy_of: '{}' not a conditioning variable", which));
  if (target.cardinality < given[pos].cardinality)
    throw std::invalid_argument("copy_of: target alphabet smaller than copied variable");
  Kernel k{std::move(given), std::move(target), {}};
  const std::size_t tcard = static_cast<std::size_t>(k.target.cardinality);
  k.rows.assign(k.row_count() * tcard, 0.0);
  // digit of `which` inside the row tuple
  std::vector<int> digit(k.given.size(), 0);
  for (std::size_t r = 0; r < k.row_count(); ++r) {
    k.rows[r * tcard + digit[pos]] = 1.0;
    for (int d = static_cast<int>(k.given.size()) - 1; d >= 0; --d) {
      if (++digit[d] < k.given[d].cardinality) break;
      digit[d] = 0;
    }
  }
  k.validate();
  return k;
}

Kernel Kernel::uniform(std::vector<Variable> given, Variable target) {
  Kernel k{std::move(given), std::move(target), {}};
  k.rows.assign(k.row_count() * k.target.cardinality, 1.0 / k.target.cardinality);
  k.validate();
  return k;
}

Kernel Kernel::point_mass(std::vector<Variable> given, Variable target, int symbol) {
  if (symbol < 0 || symbol >= target.cardinality)
    throw std::invalid_argument("point_mass: symbol outside target alphabet");
  Kernel k{std::move(given), std::move(target), {}};
  const std::size_t tcard = static_cast<std::size_t>(k.target.cardinality);
  k.rows.assign(k.row_count() * tcard, 0.0);
  for (std::size_t r = 0; r < k.row_count(); ++r) k.rows[r * tcard + symbol] = 1.0;
  k.validate();
  return k;
}

Kernel Kernel::symmetric_binary(Variable from, Variable target, double flip) {
  if (from.cardinality != 2 || target.cardinality != 2)
    throw std::invalid_argument("symmetric_binary: both alphabets must be binary");
  if (!(flip >= 0.0 && flip <= 1.0))
    throw std::invalid_argument("symmetric_binary: flip probability outside [0,1]");
  Kernel k{{std::move(from)}, std::move(target), {1.0 - flip, flip, flip, 1.0 - flip}};
  k.validate();
  return k;
}

// -------------------------------------------------------------- JointPmf

JointPmf::JointPmf(std::vector<Variable> vars, std::vector<double> values)
    : vars_(std::move(vars)), p_(std::move(values)) {
  const std::size_t n = checked_table_size(vars_);
  if (vars_.empty()) throw std::invalid_argument("joint needs at least one variable");
  if (p_.size() != n)
    throw std::invalid_argument(fmt::format("joint table has {} entries, expected {}", p_.size(), n));
  for (double x : p_)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("joint table has a negative or non-finite entry");
  const double total = static_cast<double>(sum_table(p_));
  if (std::fabs(total - 1.0) > kPmfSumTol)
    throw std::invalid_argument(fmt::format("joint table sums to {:.12g}, not 1", total));
  stride_.assign(vars_.size(), 1);
  for (int i = static_cast<int>(vars_.size()) - 2; i >= 0; --i)
    stride_[i] = stride_[i + 1] * static_cast<std::size_t>(vars_[i + 1].cardinality);
}

JointPmf JointPmf::from_unnormalized(std::vector<Variable> vars, std::vector<double> weights) {
  const long double total = sum_table(weights);
  if (!(total > 0.0L))
    throw std::invalid_argument("from_unnormalized: total mass is not positive");
  for (double& w : weights) w = static_cast<double>(w / total);
  return JointPmf(std::move(vars), std::move(weights));
}

int JointPmf::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  throw std::invalid_argument(fmt::format("no variable named '{}'", name));
}

const Variable& JointPmf::variable(std::string_view name) const {
  return vars_[static_cast<std::size_t>(index_of(name))];
}

bool JointPmf::has_variable(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(),
                     [&](const Variable& v) { return v.name == name; });
}

double JointPmf::prob(std::span<const int> outcome) const {
  if (outcome.size() != vars_.size())
    throw std::invalid_argument("outcome tuple length mismatch");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (outcome[i] < 0 || outcome[i] >= vars_[i].cardinality)
      throw std::invalid_argument(fmt::format("outcome out of range for '{}'", vars_[i].name));
    idx += stride_[i] * static_cast<std::size_t>(outcome[i]);
  }
  return p_[idx];
}

std::vector<int> JointPmf::indices_for(const std::vector<std::string>& names,
                                       bool allow_empty) const {
  if (names.empty() && !allow_empty)
    throw std::invalid_argument("variable set must not be empty");
  std::vector<int> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(index_of(n));
  std::vector<int> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("variable set contains a duplicate");
  return idx;
}

JointPmf JointPmf::marginal(const std::vector<std::string>& keep) const {
  std::vector<int> idx = indices_for(keep, /*allow_empty=*/false);
  std::sort(idx.begin(), idx.end());
  std::vector<Variable> kept;
  for (int i : idx) kept.push_back(vars_[static_cast<std::size_t>(i)]);
  std::vector<std::size_t> kstride(kept.size(), 1);
  for (int i = static_cast<int>(kept.size()) - 2; i >= 0; --i)
    kstride[i] = kstride[i + 1] * static_cast<std::size_t>(kept[i + 1].cardinality);
  std::vector<std::size_t> ostride(vars_.size(), 0);
  std::size_t out_n = 1;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    ostride[static_cast<std::size_t>(idx[k])] = kstride[k];
    out_n *= static_cast<std::size_t>(kept[k].cardinality);
  }
  std::vector<double> out(out_n, 0.0);
  for_each_cell(vars_, ostride, [&](std::size_t i, std::size_t o) { out[o] += p_[i]; });
  JointPmf m;
  m.vars_ = std::move(kept);
  m.p_ = std::move(out);
  m.stride_ = std::move(kstride);
  return m;
}

double JointPmf::entropy(const std::vector<std::string>& of) const {
  std::vector<int> idx = indices_for(of, /*allow_empty=*/true);
  if (idx.empty()) return 0.0;
  std::sort(idx.begin(), idx.end());
  std::vector<std::size_t> ostride(vars_.size(), 0);
  std::size_t out_n = 1;
  // strides for the kept variables, row-major in original order
  for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
    ostride[static_cast<std::size_t>(idx[k])] = out_n;
    out_n *= static_cast<std::size_t>(vars_[static_cast<std::size_t>(idx[k])].cardinality);
  }
  std::vector<double> acc(out_n, 0.0);
  for_each_cell(vars_, ostride, [&](std::size_t i, std::size_t o) { acc[o] += p_[i]; });
  return entropy_of_table(acc);
}

double JointPmf::conditional_entropy(const std::vector<std::string>& of,
                                     const std::vector<std::string>& given) const {
  indices_for(of, false);
  std::vector<std::string> both = of;
  both.insert(both.end(), given.begin(), given.end());
  const double h = entropy(both) - entropy(given);
  return h < 0.0 ? 0.0 : h;
}

double JointPmf::mutual_information(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) const {
  return conditional_mutual_information(a, b, {});
}

double JointPmf::conditional_mutual_information(const std::vector<std::string>& a,
                                                const std::vector<std::string>& b,
                                                const std::vector<std::string>& c) const {
  // disjointness across the three sets (duplicates inside a set trip indices_for)
  std::vector<int> all;
  for (const auto* grp : {&a, &b, &c})
    for (const auto& n : *grp) all.push_back(index_of(n));
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw std::invalid_argument("conditional_mutual_information: sets overlap");
  if (a.empty() || b.empty())
    throw std::invalid_argument("conditional_mutual_information: a and b must be nonempty");

  std::vector<std::string> ac = a, bc = b, abc = a;
  ac.insert(ac.end(), c.begin(), c.end());
  bc.insert(bc.end(), c.begin(), c.end());
  abc.insert(abc.end(), b.begin(), b.end());
  abc.insert(abc.end(), c.begin(), c.end());
  const double v = entropy(ac) + entropy(bc) - entropy(abc) - entropy(c);
  return v < 0.0 ? 0.0 : v;   // slack below zero is round-off only
}

bool JointPmf::markov_holds(const std::vector<std::string>& a,
                            const std::vector<std::string>& b,
                            const std::vector<std::string>& c, double tol) const {
  return conditional_mutual_information(a, c, b) <= tol;
}

JointPmf extend_with_kernels(const JointPmf& base, std::span<const Kernel> kernels) {
  std::vector<Variable> vars = base.vars_;
  std::vector<double> p = base.p_;
  for (const Kernel& k : kernels) {
    k.validate();
    if (std::any_of(vars.begin(), vars.end(),
                    [&](const Variable& v) { return v.name == k.target.name; }))
      throw std::invalid_argument(fmt::format("kernel target '{}' already present", k.target.name));
    std::vector<int> gpos;
    for (const auto& g : k.given) {
      int pos = -1;
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == g.name) pos = static_cast<int>(i);
      if (pos < 0)
        throw std::invalid_argument(fmt::format("kernel for '{}' conditions on unknown '{}'",
                                                k.target.name, g.name));
      if (vars[static_cast<std::size_t>(pos)].cardinality != g.cardinality)
        throw std::invalid_argument(fmt::format("kernel for '{}': cardinality mismatch on '{}'",
                                                k.target.name, g.name));
      gpos.push_back(pos);
    }
    const std::size_t tcard = static_cast<std::size_t>(k.target.cardinality);
    std::vector<double> next(p.size() * tcard);
    // odometer over current joint; row index of the kernel advances with the
    // digits of its conditioning variables
    std::vector<std::size_t> rstride(vars.size(), 0);
    std::size_t acc = 1;
    for (int gi = static_cast<int>(gpos.size()) - 1; gi >= 0; --gi) {
      rstride[static_cast<std::size_t>(gpos[gi])] = acc;
      acc *= static_cast<std::size_t>(k.given[static_cast<std::size_t>(gi)].cardinality);
    }
    for_each_cell(vars, rstride, [&](std::size_t i, std::size_t row) {
      const double pi = p[i];
      const double* krow = k.rows.data() + row * tcard;
      double* out = next.data() + i * tcard;
      for (std::size_t t = 0; t < tcard; ++t) out[t] = pi * krow[t];
    });
    vars.push_back(k.target);
    p = std::move(next);
  }
  return JointPmf(std::move(vars), std::move(p));
}

// ------------------------------------------------------ DistortionMeasure

void DistortionMeasure::validate(int source_cardinality) const {
  if (source.empty() || recon.name.empty())
    throw std::invalid_argument("distortion measure needs source and recon names");
  if (recon.cardinality < 1 || source_cardinality < 1)
    throw std::invalid_argument("distortion measure with empty alphabet");
  if (cost.size() != static_cast<std::size_t>(source_cardinality) *
                         static_cast<std::size_t>(recon.cardinality))
    throw std::invalid_argument(fmt::format("distortion matrix for '{}' has {} entries, expected {}x{}",
                                            source, cost.size(), source_cardinality, recon.cardinality));
  for (double c : cost)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("distortion matrix entries must be finite and >= 0");
}

DistortionMeasure DistortionMeasure::hamming(std::string source_var, int cardinality,
                                             std::string recon_name) {
  if (recon_name.empty()) recon_name = source_var + "_hat";
  DistortionMeasure d{std::move(source_var), Variable{std::move(recon_name), cardinality}, {}};
  d.cost.assign(static_cast<std::size_t>(cardinality) * cardinality, 1.0);
  for (int s = 0; s < cardinality; ++s) d.cost[static_cast<std::size_t>(s) * cardinality + s] = 0.0;
  return d;
}

double DistortionMeasure::full_information_floor(const JointPmf& j) const {
  const Variable& sv = j.variable(source);
  validate(sv.cardinality);
  JointPmf m = j.marginal({source});
  double floor = 0.0;
  for (int s = 0; s < sv.cardinality; ++s) {
    double best = at(s, 0);
    for (int r = 1; r < recon.cardinality; ++r) best = std::min(best, at(s, r));
    floor += m.values()[static_cast<std::size_t>(s)] * best;
  }
  return floor;
}

double expected_distortion(const JointPmf& j, const DistortionMeasure& d,
                           const std::string& source_var, const std::string& recon_var) {
  const Variable& sv = j.variable(source_var);
  const Variable& rv = j.variable(recon_var);
  d.validate(sv.cardinality);
  if (rv.cardinality != d.recon.cardinality)
    throw std::invalid_argument("expected_distortion: recon alphabet size mismatch");
  JointPmf m = j.marginal({source_var, recon_var});
  // marginal() preserves original variable order, so find who came first
  const int s_idx = m.index_of(source_var);
  double e = 0.0;
  const auto& vals = m.values();
  const int c0 = m.variables()[0].cardinality, c1 = m.variables()[1].cardinality;
  for (int i = 0; i < c0; ++i)
    for (int k = 0; k < c1; ++k) {
      const int s = (s_idx == 0) ? i : k;
      const int r = (s_idx == 0) ? k : i;
      e += vals[static_cast<std::size_t>(i) * c1 + k] * d.at(s, r);
    }
  return e;
}

}  // namespace tworate
