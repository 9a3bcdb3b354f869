// Graph sufficiency check for Markov chains under a declared factorization.
//
// Build an undirected graph with one node per variable and a clique per
// factor scope.  If every path from group G1 to group G3 passes through G2,
// then X_G1 - X_G2 - X_G3 holds for every distribution with that
// factorization.  The check is one-directional: a NotEstablished verdict
// only means this technique cannot certify the chain, and it comes with a
// concrete escaping path as the witness.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tworate {

// Variables plus factor scopes; p = prod over factors of f(scope).  Scopes
// may overlap and a variable may appear in no factor (it is then isolated).
struct FactorizationSpec {
  std::vector<std::string> variables;
  std::vector<std::vector<std::string>> factors;

  void validate() const;   // unique nonempty names, scopes within variables
};

// "is X_G1 - X_G2 - X_G3 a Markov chain?"  Groups must be pairwise disjoint
// and nonempty; requiring G2 nonempty keeps plain-independence questions out
// of an interface that answers chain questions.
struct SeparationQuery {
  std::vector<std::string> g1, g2, g3;
};

// Grammar: "a,b | c | d,e" — three comma-separated name lists split by '|'.
// Whitespace around names is ignored.  Throws std::invalid_argument on
// malformed input (wrong number of groups, empty name, empty group).
SeparationQuery parse_separation_query(std::string_view text);

class FactorGraph {
 public:
  static FactorGraph build(const FactorizationSpec& spec);

  std::size_t node_count() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  int index_of(std::string_view name) const;            // throws if unknown
  bool has_edge(int a, int b) const;
  const std::vector<int>& neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<int>> adj_;   // sorted, no duplicates, no self loops
};

// True iff removing g2 leaves no path from g1 to g3.
bool is_separated(const FactorGraph& g, const SeparationQuery& q);

struct ChainVerdict {
  bool established = false;
  // On NotEstablished: a g1->g3 path avoiding g2, endpoints included.
  std::vector<std::string> witness_path;
};

ChainVerdict verify_chain(const FactorizationSpec& spec, const SeparationQuery& q);

}  // namespace tworate
