#include "tworate/markov_graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace tworate {
namespace {

std::vector<std::string> split_names(std::string_view part) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= part.size()) {
    std::size_t comma = part.find(',', pos);
    if (comma == std::string_view::npos) comma = part.size();
    std::string_view tok = part.substr(pos, comma - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
    if (tok.empty())
      throw std::invalid_argument("separation query: empty variable name");
    out.emplace_back(tok);
    pos = comma + 1;
    if (comma == part.size()) break;
  }
  return out;
}

void check_query_groups(const std::vector<std::string>& names, const SeparationQuery& q) {
  std::unordered_set<std::string_view> known(names.begin(), names.end());
  std::unordered_set<std::string_view> used;
  for (const auto* grp : {&q.g1, &q.g2, &q.g3}) {
    if (grp->empty())
      throw std::invalid_argument("separation query: all three groups must be nonempty");
    for (const auto& n : *grp) {
      if (!known.count(n))
        throw std::invalid_argument(fmt::format("separation query: unknown variable '{}'", n));
      if (!used.insert(n).second)
        throw std::invalid_argument(fmt::format("separation query: '{}' appears twice", n));
    }
  }
}

}  // namespace

void FactorizationSpec::validate() const {
  if (variables.empty())
    throw std::invalid_argument("factorization needs at least one variable");
  std::unordered_set<std::string_view> seen;
  for (const auto& v : variables) {
    if (v.empty()) throw std::invalid_argument("factorization: empty variable name");
    if (!seen.insert(v).second)
      throw std::invalid_argument(fmt::format("factorization: duplicate variable '{}'", v));
  }
  for (const auto& scope : factors) {
    if (scope.empty()) throw std::invalid_argument("factorization: empty factor scope");
    std::unordered_set<std::string_view> in_scope;
    for (const auto& n : scope) {
      if (!seen.count(n))
        throw std::invalid_argument(fmt::format("factor scope mentions unknown variable '{}'", n));
      if (!in_scope.insert(n).second)
        throw std::invalid_argument(fmt::format("factor scope repeats variable '{}'", n));
    }
  }
}

SeparationQuery parse_separation_query(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t bar = text.find('|', pos);
    if (bar == std::string_view::npos) {
      parts.push_back(text.substr(pos));
      break;
    }
    parts.push_back(text.substr(pos, bar - pos));
    pos = bar + 1;
  }
  if (parts.size() != 3)
    throw std::invalid_argument(
        fmt::format("separation query needs exactly 3 groups, got {}", parts.size()));
  return SeparationQuery{split_names(parts[0]), split_names(parts[1]), split_names(parts[2])};
}

FactorGraph FactorGraph::build(const FactorizationSpec& spec) {
  spec.validate();
  FactorGraph g;
  g.names_ = spec.variables;
  std::unordered_map<std::string_view, int> idx;
  for (std::size_t i = 0; i < g.names_.size(); ++i)
    idx[g.names_[i]] = static_cast<int>(i);
  std::vector<std::unordered_set<int>> adj(g.names_.size());
  for (const auto& scope : spec.factors)
    for (std::size_t i = 0; i < scope.size(); ++i)
      for (std::size_t j = i + 1; j < scope.size(); ++j) {
        int a = idx.at(scope[i]), b = idx.at(scope[j]);
        adj[static_cast<std::size_t>(a)].insert(b);
        adj[static_cast<std::size_t>(b)].insert(a);
      }
  g.adj_.resize(adj.size());
  for (std::size_t v = 0; v < adj.size(); ++v) {
    g.adj_[v].assign(adj[v].begin(), adj[v].end());
    std::sort(g.adj_[v].begin(), g.adj_[v].end());
  }
  return g;
}

int FactorGraph::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  throw std::invalid_argument(fmt::format("graph has no node '{}'", name));
}

bool FactorGraph::has_edge(int a, int b) const {
  const auto& n = adj_[static_cast<std::size_t>(a)];
  return std::binary_search(n.begin(), n.end(), b);
}

namespace {

// BFS from g1 with g2 deleted; returns the first g3 node's path if reachable.
// Neighbor order is node-index order, so the witness is deterministic.
std::vector<int> escaping_path(const FactorGraph& g, const SeparationQuery& q) {
  const std::size_t n = g.node_count();
  std::vector<char> blocked(n, 0), target(n, 0);
  std::vector<int> parent(n, -2);   // -2 unvisited, -1 root
  for (const auto& name : q.g2) blocked[static_cast<std::size_t>(g.index_of(name))] = 1;
  for (const auto& name : q.g3) target[static_cast<std::size_t>(g.index_of(name))] = 1;
  std::deque<int> queue;
  for (const auto& name : q.g1) {
    int v = g.index_of(name);
    if (parent[static_cast<std::size_t>(v)] == -2) {
      parent[static_cast<std::size_t>(v)] = -1;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (target[static_cast<std::size_t>(v)]) {
      std::vector<int> path;
      for (int u = v; u != -1; u = parent[static_cast<std::size_t>(u)]) path.push_back(u);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int w : g.neighbors(v)) {
      if (blocked[static_cast<std::size_t>(w)] || parent[static_cast<std::size_t>(w)] != -2)
        continue;
      parent[static_cast<std::size_t>(w)] = v;
      queue.push_back(w);
    }
  }
  return {};
}

}  // namespace

bool is_separated(const FactorGraph& g, const SeparationQuery& q) {
  check_query_groups(g.names(), q);
  return escaping_path(g, q).empty();
}

ChainVerdict verify_chain(const FactorizationSpec& spec, const SeparationQuery& q) {
  FactorGraph g = FactorGraph::build(spec);
  check_query_groups(g.names(), q);
  std::vector<int> path = escaping_path(g, q);
  ChainVerdict v;
  v.established = path.empty();
  for (int node : path) v.witness_path.push_back(g.names()[static_cast<std::size_t>(node)]);
  return v;
}

}  // namespace tworate
