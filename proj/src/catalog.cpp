#include "dgl/catalog.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace dgl {

PairCode to_pair_code(AdjacencyMask mask, int size) {
  PairCode code = 0;
  for (int p = 1; p < size; ++p)
    for (int q = 0; q < p; ++q) {
      if (mask & mask_bit(q, p)) code |= static_cast<PairCode>(1u << pair_bit(q, p));
      if (mask & mask_bit(p, q)) code |= static_cast<PairCode>(1u << (pair_bit(q, p) + 1));
    }
  return code;
}

AdjacencyMask to_adjacency_mask(PairCode code, int size) {
  AdjacencyMask mask = 0;
  for (int p = 1; p < size; ++p)
    for (int q = 0; q < p; ++q) {
      if (code & (1u << pair_bit(q, p))) mask |= mask_bit(q, p);
      if (code & (1u << (pair_bit(q, p) + 1))) mask |= mask_bit(p, q);
    }
  return mask;
}

AdjacencyMask permute_mask(AdjacencyMask mask, std::span<const int> perm) {
  AdjacencyMask out = 0;
  const int size = static_cast<int>(perm.size());
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      if (mask & mask_bit(i, j)) out |= mask_bit(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  return out;
}

bool is_weakly_connected(AdjacencyMask mask, int size) {
  unsigned reached = 1, frontier = 1;
  while (frontier) {
    unsigned next = 0;
    for (int i = 0; i < size; ++i) {
      if (!(frontier & (1u << i))) continue;
      for (int j = 0; j < size; ++j)
        if ((mask & mask_bit(i, j)) || (mask & mask_bit(j, i))) next |= 1u << j;
    }
    frontier = next & ~reached;
    reached |= next;
  }
  return reached == (1u << size) - 1;
}

bool has_reciprocal_pair(AdjacencyMask mask, int size) {
  for (int i = 0; i < size; ++i)
    for (int j = i + 1; j < size; ++j)
      if ((mask & mask_bit(i, j)) && (mask & mask_bit(j, i))) return true;
  return false;
}

std::pair<AdjacencyMask, std::array<int, kMaxGraphletSize>> canonical_form(AdjacencyMask mask, int size) {
  std::array<int, kMaxGraphletSize> perm{0, 1, 2, 3};
  std::array<int, kMaxGraphletSize> best_perm = perm;
  AdjacencyMask best = 0xFFFF;
  const auto n = static_cast<std::size_t>(size);
  do {
    AdjacencyMask candidate = permute_mask(mask, std::span<const int>(perm.data(), n));
    if (candidate < best) {
      best = candidate;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.begin() + size));
  return {best, best_perm};
}

std::vector<int> RoleOrbitSets::peripheral() const {
  std::vector<int> all = peripheral_import;
  all.insert(all.end(), peripheral_export.begin(), peripheral_export.end());
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<int> RoleOrbitSets::broker() const {
  std::vector<int> all = broker_import;
  all.insert(all.end(), broker_export.begin(), broker_export.end());
  std::sort(all.begin(), all.end());
  return all;
}

GraphletCatalog GraphletCatalog::enumerate() {
  GraphletCatalog cat;

  // (size, edge count, canonical code) sorts the classes into their ids.
  std::vector<std::tuple<int, int, AdjacencyMask>> classes;
  for (int size = 2; size <= kMaxGraphletSize; ++size) {
    std::map<AdjacencyMask, int> seen;
    const unsigned codes = 1u << (size * (size - 1));
    for (unsigned c = 0; c < codes; ++c) {
      AdjacencyMask mask = to_adjacency_mask(static_cast<PairCode>(c), size);
      if (has_reciprocal_pair(mask, size) || !is_weakly_connected(mask, size)) continue;
      AdjacencyMask code = canonical_form(mask, size).first;
      seen.emplace(code, std::popcount(code));
    }
    for (const auto& [code, edges] : seen) classes.emplace_back(size, edges, code);
  }
  std::sort(classes.begin(), classes.end());

  for (const auto& [size, edge_count, code] : classes) {
    Graphlet g;
    g.id = static_cast<int>(cat.graphlets_.size());
    g.size = size;
    g.code = code;
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        if (code & mask_bit(i, j)) g.edges.emplace_back(i, j);

    // Union positions related by an automorphism.
    std::array<int, kMaxGraphletSize> root{0, 1, 2, 3};
    std::array<int, kMaxGraphletSize> perm{0, 1, 2, 3};
    const auto n = static_cast<std::size_t>(size);
    do {
      if (permute_mask(code, std::span<const int>(perm.data(), n)) != code) continue;
      for (int p = 0; p < size; ++p) {
        int a = root[static_cast<std::size_t>(p)];
        int b = root[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
        int lo = std::min(a, b), hi = std::max(a, b);
        for (auto& r : root)
          if (r == hi) r = lo;
      }
    } while (std::next_permutation(perm.begin(), perm.begin() + size));

    // Orbits numbered by their smallest canonical position.
    for (int p = 0; p < size; ++p) {
      auto up = static_cast<std::size_t>(p);
      if (root[up] == p) {
        int orbit = static_cast<int>(cat.orbit_graphlet_.size());
        cat.orbit_graphlet_.push_back(g.id);
        cat.orbit_class_size_.push_back(0);
        g.orbits.push_back(orbit);
        g.orbit_of_position[up] = orbit;
      } else {
        g.orbit_of_position[up] = g.orbit_of_position[static_cast<std::size_t>(root[up])];
      }
      ++cat.orbit_class_size_[static_cast<std::size_t>(g.orbit_of_position[up])];
    }
    cat.graphlets_.push_back(std::move(g));
  }

  cat.build_tables();
  return cat;
}

const GraphletCatalog& GraphletCatalog::instance() {
  static const GraphletCatalog catalog = enumerate();
  return catalog;
}

int GraphletCatalog::orbit_count_up_to(int max_size) const {
  int count = 0;
  for (const auto& g : graphlets_)
    if (g.size <= max_size) count += static_cast<int>(g.orbits.size());
  return count;
}

void GraphletCatalog::build_tables() {
  std::map<AdjacencyMask, int> by_code;
  for (const auto& g : graphlets_) by_code.emplace(g.code, g.id);

  for (int size = 2; size <= kMaxGraphletSize; ++size) {
    Table& t = tables_[static_cast<std::size_t>(size)];
    const unsigned codes = 1u << (size * (size - 1));
    t.oriented_graphlet.assign(codes, -1);
    t.orbit_offsets.assign(codes + 1, 0);
    t.graphlet_offsets.assign(codes + 1, 0);

    // Per oriented labeled digraph: graphlet id and orbit of each position.
    std::vector<std::array<int, kMaxGraphletSize>> oriented_orbits(codes, {-1, -1, -1, -1});
    for (unsigned c = 0; c < codes; ++c) {
      AdjacencyMask mask = to_adjacency_mask(static_cast<PairCode>(c), size);
      if (has_reciprocal_pair(mask, size) || !is_weakly_connected(mask, size)) continue;
      auto [code, perm] = canonical_form(mask, size);
      const Graphlet& g = graphlets_[static_cast<std::size_t>(by_code.at(code))];
      t.oriented_graphlet[c] = static_cast<std::int16_t>(g.id);
      for (int p = 0; p < size; ++p)
        oriented_orbits[c][static_cast<std::size_t>(p)] =
            g.orbit_of_position[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
    }

    for (unsigned c = 0; c < codes; ++c) {
      t.orbit_offsets[c] = static_cast<std::uint32_t>(t.orbit_incs.size());
      t.graphlet_offsets[c] = static_cast<std::uint32_t>(t.graphlet_incs.size());
      AdjacencyMask mask = to_adjacency_mask(static_cast<PairCode>(c), size);
      if (!is_weakly_connected(mask, size)) continue;

      std::vector<int> reciprocal_bits;  // pair bit of q->p for each reciprocal pair
      for (int p = 1; p < size; ++p)
        for (int q = 0; q < p; ++q)
          if ((c >> pair_bit(q, p) & 1u) && (c >> (pair_bit(q, p) + 1) & 1u)) reciprocal_bits.push_back(pair_bit(q, p));

      std::map<std::pair<int, int>, int> orbit_counts;  // (position, orbit) -> count
      std::map<int, int> graphlet_counts;
      const unsigned resolutions = 1u << reciprocal_bits.size();
      for (unsigned r = 0; r < resolutions; ++r) {
        unsigned oriented = c;
        for (std::size_t b = 0; b < reciprocal_bits.size(); ++b) {
          // Drop one of the two directions of each reciprocal pair.
          int drop = reciprocal_bits[b] + ((r >> b) & 1u ? 1 : 0);
          oriented &= ~(1u << drop);
        }
        ++graphlet_counts[t.oriented_graphlet[oriented]];
        for (int p = 0; p < size; ++p) ++orbit_counts[{p, oriented_orbits[oriented][static_cast<std::size_t>(p)]}];
      }
      for (const auto& [key, count] : orbit_counts)
        t.orbit_incs.push_back({static_cast<std::uint8_t>(key.first), static_cast<std::uint8_t>(count),
                                static_cast<std::uint16_t>(key.second)});
      for (const auto& [graphlet, count] : graphlet_counts)
        t.graphlet_incs.push_back({static_cast<std::uint16_t>(graphlet), static_cast<std::uint16_t>(count)});
    }
    t.orbit_offsets[codes] = static_cast<std::uint32_t>(t.orbit_incs.size());
    t.graphlet_offsets[codes] = static_cast<std::uint32_t>(t.graphlet_incs.size());

    t.oriented_orbits = std::move(oriented_orbits);
  }
}

Classification GraphletCatalog::classify(AdjacencyMask mask, int size) const {
  if (size < 2 || size > kMaxGraphletSize) throw std::invalid_argument("graphlet size must be 2..4");
  for (int i = 0; i < kMaxGraphletSize; ++i)
    for (int j = 0; j < kMaxGraphletSize; ++j)
      if ((i >= size || j >= size || i == j) && (mask & mask_bit(i, j)))
        throw std::invalid_argument("adjacency mask has bits outside the subgraph");
  if (has_reciprocal_pair(mask, size)) throw std::invalid_argument("subgraph contains an anti-parallel pair");
  PairCode code = to_pair_code(mask, size);
  const Table& t = tables_[static_cast<std::size_t>(size)];
  if (t.oriented_graphlet[code] < 0) throw std::invalid_argument("subgraph is not weakly connected");
  Classification result;
  result.graphlet = t.oriented_graphlet[code];
  result.orbit = t.oriented_orbits[code];
  return result;
}

RoleOrbitSets GraphletCatalog::role_orbit_sets() const {
  RoleOrbitSets sets;
  for (const auto& g : graphlets_) {
    if (g.size != 4 || g.edges.size() != 4) continue;
    std::array<int, 4> degree{};
    for (const auto& [u, v] : g.edges) {
      ++degree[static_cast<std::size_t>(u)];
      ++degree[static_cast<std::size_t>(v)];
    }
    auto sorted = degree;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 4>{1, 2, 2, 3}) continue;  // not triangle + pendant

    int pendant = static_cast<int>(std::find(degree.begin(), degree.end(), 1) - degree.begin());
    int attach = static_cast<int>(std::find(degree.begin(), degree.end(), 3) - degree.begin());
    bool importing = (g.code & mask_bit(attach, pendant)) != 0;
    auto orbit = [&](int p) { return g.orbit_of_position[static_cast<std::size_t>(p)]; };
    (importing ? sets.peripheral_import : sets.peripheral_export).push_back(orbit(pendant));
    (importing ? sets.broker_import : sets.broker_export).push_back(orbit(attach));
    for (int p = 0; p < 4; ++p)
      if (p != pendant && p != attach) sets.core_nonbroker.push_back(orbit(p));
  }
  for (auto* v : {&sets.peripheral_import, &sets.peripheral_export, &sets.broker_import, &sets.broker_export,
                  &sets.core_nonbroker}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return sets;
}

std::string GraphletCatalog::to_csv() const {
  std::ostringstream out;
  out << "graphlet,size,edges,orbits\n";
  for (const auto& g : graphlets_) {
    out << g.id << ',' << g.size << ',';
    for (std::size_t i = 0; i < g.edges.size(); ++i)
      out << (i ? ";" : "") << g.edges[i].first << '>' << g.edges[i].second;
    out << ',';
    for (int p = 0; p < g.size; ++p) out << (p ? ";" : "") << g.orbit_of_position[static_cast<std::size_t>(p)];
    out << '\n';
  }
  return out.str();
}

}  // namespace dgl
