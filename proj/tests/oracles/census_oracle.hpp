#pragma once

// Exhaustive reference census for small graphs: every node subset of size
// 2..4, connectivity tested directly, every resolution of reciprocal pairs
// expanded explicitly and classified by permutation search against the
// catalog's canonical codes. Shares no code with the ESU counter or the
// catalog's precomputed lookup tables.

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "dgl/catalog.hpp"
#include "dgl/graph.hpp"

namespace dgl::oracle {

struct OracleCensus {
  std::vector<std::vector<std::uint64_t>> signatures;  // n x orbit_count
  std::vector<std::uint64_t> frequencies;
};

inline bool subset_connected(const DirectedGraph& g, const std::vector<NodeId>& s) {
  std::vector<bool> seen(s.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < s.size(); ++j)
      if (!seen[j] && (g.has_edge(s[i], s[j]) || g.has_edge(s[j], s[i]))) {
        seen[j] = true;
        stack.push_back(j);
      }
  }
  for (bool b : seen)
    if (!b) return false;
  return true;
}

inline OracleCensus brute_force_census(const DirectedGraph& g, const GraphletCatalog& cat) {
  const std::size_t n = g.node_count();
  OracleCensus out;
  out.signatures.assign(n, std::vector<std::uint64_t>(static_cast<std::size_t>(cat.orbit_count()), 0));
  out.frequencies.assign(static_cast<std::size_t>(cat.graphlet_count()), 0);

  std::map<AdjacencyMask, const Graphlet*> by_code;
  for (const auto& gl : cat.graphlets()) by_code[gl.code] = &gl;

  auto visit = [&](const std::vector<NodeId>& s) {
    if (!subset_connected(g, s)) return;
    const int k = static_cast<int>(s.size());
    std::vector<std::pair<int, int>> single, both;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        bool ij = g.has_edge(s[i], s[j]), ji = g.has_edge(s[j], s[i]);
        if (ij && ji)
          both.emplace_back(i, j);
        else if (ij)
          single.emplace_back(i, j);
        else if (ji)
          single.emplace_back(j, i);
      }
    for (unsigned r = 0; r < (1u << both.size()); ++r) {
      std::vector<std::pair<int, int>> edges = single;
      for (std::size_t b = 0; b < both.size(); ++b) {
        auto [i, j] = both[b];
        edges.push_back((r >> b) & 1u ? std::make_pair(j, i) : std::make_pair(i, j));
      }
      // Smallest relabeled mask over all permutations, tracking the map.
      std::array<int, 4> perm{0, 1, 2, 3}, best_perm{};
      unsigned best = ~0u;
      do {
        unsigned m = 0;
        for (auto [a, b] : edges) m |= 1u << (4 * perm[static_cast<std::size_t>(a)] + perm[static_cast<std::size_t>(b)]);
        if (m < best) {
          best = m;
          best_perm = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.begin() + k));
      const Graphlet* gl = by_code.at(static_cast<AdjacencyMask>(best));
      ++out.frequencies[static_cast<std::size_t>(gl->id)];
      for (int p = 0; p < k; ++p)
        ++out.signatures[s[static_cast<std::size_t>(p)]]
                        [static_cast<std::size_t>(gl->orbit_of_position[static_cast<std::size_t>(best_perm[static_cast<std::size_t>(p)])])];
    }
  };

  std::vector<NodeId> s;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) {
      s = {a, b};
      visit(s);
      for (NodeId c = b + 1; c < n; ++c) {
        s = {a, b, c};
        visit(s);
        for (NodeId d = c + 1; d < n; ++d) {
          s = {a, b, c, d};
          visit(s);
        }
      }
    }
  return out;
}

}  // namespace dgl::oracle
