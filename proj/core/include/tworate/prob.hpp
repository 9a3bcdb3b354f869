// Dense joint distributions over small named finite alphabets, plus the
// information measures used everywhere else: entropy, conditional mutual
// information, expected distortion.  All logs are base 2, 0*log(0) = 0.
//
// Joints are immutable once built; every operation returns a fresh value.
// Construction validates hard: nonnegative entries summing to 1 within 1e-9,
// anything else throws.  There is no silent renormalization; callers who hold
// an unnormalized product must say so via from_unnormalized().

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tworate {

inline constexpr double kPmfSumTol = 1e-9;    // |sum - 1| allowed at construction
inline constexpr double kMarkovTol = 1e-9;    // default CMI threshold for chain checks

struct Variable {
  std::string name;
  int cardinality = 0;
};

// Conditional distribution p(target | given...).  Rows are laid out row-major
// over the outcome tuple of `given` in declared order; each row is a pmf over
// the target alphabet (sums to 1 within 1e-9).
struct Kernel {
  std::vector<Variable> given;
  Variable target;
  std::vector<double> rows;   // size = prod(card(given)) * card(target)

  std::size_t row_count() const;
  void validate() const;      // throws std::invalid_argument on any violation

  // p(target = cond_var), copying one of the conditioning variables.  The
  // target alphabet must be at least as large as the copied variable's.
  static Kernel copy_of(std::vector<Variable> given, Variable target,
                        const std::string& which);
  static Kernel uniform(std::vector<Variable> given, Variable target);
  static Kernel point_mass(std::vector<Variable> given, Variable target, int symbol);
  // Binary symmetric channel target = given[0] xor noise(flip).
  static Kernel symmetric_binary(Variable from, Variable target, double flip);
};

class JointPmf {
 public:
  // Validates: at least one variable, unique nonempty names, cardinality >= 1,
  // values.size() == prod(cards), entries >= 0, sum within kPmfSumTol of 1.
  JointPmf(std::vector<Variable> vars, std::vector<double> values);

  // Explicitly normalizes a nonnegative table with positive total mass.
  static JointPmf from_unnormalized(std::vector<Variable> vars,
                                    std::vector<double> weights);

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<double>& values() const { return p_; }
  std::size_t size() const { return p_.size(); }

  int index_of(std::string_view name) const;              // throws if unknown
  const Variable& variable(std::string_view name) const;
  bool has_variable(std::string_view name) const;

  double prob(std::span<const int> outcome) const;        // full outcome tuple

  // Marginal over `keep` (original variable order is preserved; `keep` is a
  // set, duplicates rejected).  Keeping every variable returns a copy.
  JointPmf marginal(const std::vector<std::string>& keep) const;

  // All results in bits; tiny negative round-off is clamped to zero.
  double entropy(const std::vector<std::string>& of) const;
  double conditional_entropy(const std::vector<std::string>& of,
                             const std::vector<std::string>& given) const;
  double mutual_information(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) const;
  // I(A;B|C).  A,B,C pairwise disjoint; C may be empty (plain MI).
  double conditional_mutual_information(const std::vector<std::string>& a,
                                        const std::vector<std::string>& b,
                                        const std::vector<std::string>& c) const;

  // Chain A - B - C: true iff I(A;C|B) <= tol.
  bool markov_holds(const std::vector<std::string>& a,
                    const std::vector<std::string>& b,
                    const std::vector<std::string>& c,
                    double tol = kMarkovTol) const;

 private:
  JointPmf() = default;
  std::vector<Variable> vars_;
  std::vector<std::size_t> stride_;   // row-major, first variable slowest
  std::vector<double> p_;

  friend JointPmf extend_with_kernels(const JointPmf&, std::span<const Kernel>);
  std::vector<int> indices_for(const std::vector<std::string>& names,
                               bool allow_empty) const;
};

// base(x...) * k1(t1|...) * k2(t2|...) * ... as a joint over the base
// variables followed by the kernel targets in order.  Each kernel may
// condition on any variable already present; targets must be fresh.  The
// marginal of the result onto the base variables reproduces the base.
JointPmf extend_with_kernels(const JointPmf& base, std::span<const Kernel> kernels);

// Per-letter distortion d(source symbol, reconstruction symbol) >= 0, finite.
// The reconstruction alphabet is its own Variable so it can differ in size
// from the source alphabet.
struct DistortionMeasure {
  std::string source;           // name of the source variable it scores
  Variable recon;               // reconstruction variable (name + alphabet)
  std::vector<double> cost;     // [source_card][recon_card] row-major

  void validate(int source_cardinality) const;
  double at(int s, int r) const { return cost[static_cast<std::size_t>(s) * recon.cardinality + r]; }
  static DistortionMeasure hamming(std::string source_var, int cardinality,
                                   std::string recon_name = "");
  // E[min over a reconstruction symbol] when the decoder sees everything:
  // the floor below which no scheme can go.
  double full_information_floor(const JointPmf& j) const;
};

// E d(S, R) with both S and R variables of j.
double expected_distortion(const JointPmf& j, const DistortionMeasure& d,
                           const std::string& source_var, const std::string& recon_var);

}  // namespace tworate
