#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dgl {

inline constexpr int kMaxGraphletSize = 4;

/// Labeled digraph on up to four positions as a row-major 4x4 adjacency
/// bitmask: bit (4*i + j) is set when position i has an edge to position j.
using AdjacencyMask = std::uint16_t;

constexpr AdjacencyMask mask_bit(int from, int to) {
  return static_cast<AdjacencyMask>(1u << (4 * from + to));
}

/// Compact index of a labeled digraph used by the counting hot path. Pair
/// (q, p) with q < p owns bits p(p-1)+2q (q->p) and p(p-1)+2q+1 (p->q), so a
/// size-k digraph fits in the low k(k-1) bits and growing a subgraph by one
/// position only appends bits.
using PairCode = std::uint16_t;

constexpr int pair_bit(int q, int p) { return p * (p - 1) + 2 * q; }

PairCode to_pair_code(AdjacencyMask mask, int size);
AdjacencyMask to_adjacency_mask(PairCode code, int size);

/// Applies a position relabeling: edge i->j becomes perm[i]->perm[j].
AdjacencyMask permute_mask(AdjacencyMask mask, std::span<const int> perm);

bool is_weakly_connected(AdjacencyMask mask, int size);
bool has_reciprocal_pair(AdjacencyMask mask, int size);

struct Graphlet {
  int id = 0;
  int size = 0;
  /// Canonical code: the minimum of the adjacency mask over all relabelings.
  AdjacencyMask code = 0;
  /// Edges over canonical positions 0..size-1.
  std::vector<std::pair<int, int>> edges;
  /// Global orbit id of each canonical position; unused slots hold -1.
  std::array<int, kMaxGraphletSize> orbit_of_position{-1, -1, -1, -1};
  std::vector<int> orbits;  // distinct orbit ids, ascending
};

struct Classification {
  int graphlet = -1;
  std::array<int, kMaxGraphletSize> orbit{-1, -1, -1, -1};  // per input position
};

/// Orbit sets on the eight graphlets whose underlying undirected graph is a
/// triangle with a pendant edge.
struct RoleOrbitSets {
  std::vector<int> peripheral_import;  // pendant node, edge points at it
  std::vector<int> peripheral_export;  // pendant node, edge leaves it
  std::vector<int> broker_import;      // attachment node of an importing pendant
  std::vector<int> broker_export;      // attachment node of an exporting pendant
  std::vector<int> core_nonbroker;     // the other two triangle nodes

  std::vector<int> peripheral() const;
  std::vector<int> broker() const;
};

/// One increment produced when a labeled (possibly reciprocal) subgraph is
/// counted: position `position` occupies `orbit` in `count` resolutions.
struct OrbitIncrement {
  std::uint8_t position;
  std::uint8_t count;
  std::uint16_t orbit;
};

struct GraphletIncrement {
  std::uint16_t graphlet;
  std::uint16_t count;
};

/// All 2-4 node directed graphlets (weakly connected, no anti-parallel pair)
/// with their automorphism orbits, plus precomputed lookups from labeled
/// subgraphs to orbit assignments.
class GraphletCatalog {
 public:
  /// Brute-force derivation. Deterministic; prefer instance() for reuse.
  static GraphletCatalog enumerate();
  /// Process-wide catalog, built on first use.
  static const GraphletCatalog& instance();

  std::span<const Graphlet> graphlets() const { return graphlets_; }
  const Graphlet& graphlet(int id) const { return graphlets_.at(static_cast<std::size_t>(id)); }
  int graphlet_count() const { return static_cast<int>(graphlets_.size()); }
  int orbit_count() const { return static_cast<int>(orbit_graphlet_.size()); }
  /// Orbits of all graphlets with at most `max_size` nodes are 0..n-1.
  int orbit_count_up_to(int max_size) const;

  int graphlet_of_orbit(int orbit) const { return orbit_graphlet_.at(static_cast<std::size_t>(orbit)); }
  /// Number of positions of the graphlet that belong to this orbit.
  int orbit_class_size(int orbit) const { return orbit_class_size_.at(static_cast<std::size_t>(orbit)); }

  /// Classifies a weakly connected oriented labeled digraph; throws
  /// std::invalid_argument for disconnected input or reciprocal pairs.
  Classification classify(AdjacencyMask mask, int size) const;

  /// Sum over all 2^k single-direction resolutions of the k reciprocal pairs
  /// of a weakly connected labeled digraph given by its pair code.
  std::span<const OrbitIncrement> orbit_increments(PairCode code, int size) const {
    const auto& t = tables_[static_cast<std::size_t>(size)];
    return {t.orbit_incs.data() + t.orbit_offsets[code], t.orbit_offsets[code + 1u] - t.orbit_offsets[code]};
  }
  std::span<const GraphletIncrement> graphlet_increments(PairCode code, int size) const {
    const auto& t = tables_[static_cast<std::size_t>(size)];
    return {t.graphlet_incs.data() + t.graphlet_offsets[code],
            t.graphlet_offsets[code + 1u] - t.graphlet_offsets[code]};
  }

  RoleOrbitSets role_orbit_sets() const;

  /// CSV table: graphlet,size,edges,orbits (positions listed in order).
  std::string to_csv() const;

 private:
  struct Table {
    std::vector<std::uint32_t> orbit_offsets, graphlet_offsets;
    std::vector<OrbitIncrement> orbit_incs;
    std::vector<GraphletIncrement> graphlet_incs;
    std::vector<std::int16_t> oriented_graphlet;  // -1 when not a graphlet
    std::vector<std::array<int, kMaxGraphletSize>> oriented_orbits;
  };

  void build_tables();

  std::vector<Graphlet> graphlets_;
  std::vector<int> orbit_graphlet_;
  std::vector<int> orbit_class_size_;
  // Indexed by size (0 and 1 unused).
  std::array<Table, kMaxGraphletSize + 1> tables_;
};

/// Canonical code and a relabeling that realizes it (perm[i] = canonical
/// position of input position i). Exhaustive over size! permutations.
std::pair<AdjacencyMask, std::array<int, kMaxGraphletSize>> canonical_form(AdjacencyMask mask, int size);

}  // namespace dgl
