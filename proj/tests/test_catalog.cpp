#include <doctest.h>

#include <algorithm>
#include <array>
#include <tuple>
#include <map>
#include <numeric>
#include <set>

#include "dgl/catalog.hpp"

using namespace dgl;

namespace {

AdjacencyMask mask_of(std::initializer_list<std::pair<int, int>> edges) {
  AdjacencyMask m = 0;
  for (auto [a, b] : edges) m |= mask_bit(a, b);
  return m;
}

bool oriented_connected(AdjacencyMask m, int k) {
  // Independent checks: no loops, no reciprocal pair, every position reached.
  std::array<std::array<bool, 4>, 4> adj{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      bool e = (m >> (4 * i + j)) & 1u;
      if (e && (i >= k || j >= k || i == j)) return false;
      adj[i][j] = e;
    }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (adj[i][j] && adj[j][i]) return false;
  std::vector<int> reach{0};
  std::set<int> seen{0};
  while (!reach.empty()) {
    int u = reach.back();
    reach.pop_back();
    for (int v = 0; v < k; ++v)
      if ((adj[u][v] || adj[v][u]) && seen.insert(v).second) reach.push_back(v);
  }
  return static_cast<int>(seen.size()) == k;
}

AdjacencyMask relabel(AdjacencyMask m, const std::array<int, 4>& p, int k) {
  AdjacencyMask out = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if ((m >> (4 * i + j)) & 1u) out |= mask_bit(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  return out;
}

AdjacencyMask min_code(AdjacencyMask m, int k) {
  std::array<int, 4> p{0, 1, 2, 3};
  AdjacencyMask best = 0xffff;
  do best = std::min(best, relabel(m, p, k));
  while (std::next_permutation(p.begin(), p.begin() + k));
  return best;
}

}  // namespace

TEST_CASE("catalog sizes") {
  const auto& cat = GraphletCatalog::instance();
  CHECK(cat.graphlet_count() == 40);
  CHECK(cat.orbit_count() == 129);
  CHECK(cat.orbit_count_up_to(2) == 2);
  CHECK(cat.orbit_count_up_to(3) == 13);
  std::map<int, int> by_size;
  for (const auto& g : cat.graphlets()) ++by_size[g.size];
  CHECK(by_size[2] == 1);
  CHECK(by_size[3] == 5);
  CHECK(by_size[4] == 34);
  int total_classes = 0;
  for (const auto& g : cat.graphlets()) total_classes += static_cast<int>(g.orbits.size());
  CHECK(total_classes == 129);
}

TEST_CASE("numbering is ordered by size, edge count and code") {
  const auto& cat = GraphletCatalog::instance();
  auto gs = cat.graphlets();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    CHECK(gs[i].id == static_cast<int>(i));
    if (i == 0) continue;
    auto key = [](const Graphlet& g) { return std::make_tuple(g.size, g.edges.size(), g.code); };
    CHECK(key(gs[i - 1]) < key(gs[i]));
  }
  // Orbits run consecutively through the graphlets.
  int next = 0;
  for (const auto& g : gs)
    for (int o : g.orbits) {
      CHECK(o == next++);
      CHECK(cat.graphlet_of_orbit(o) == g.id);
    }
}

TEST_CASE("the 2-node graphlet: orbit 0 is the tail") {
  const auto& cat = GraphletCatalog::instance();
  auto c = cat.classify(mask_of({{0, 1}}), 2);
  CHECK(c.graphlet == 0);
  CHECK(c.orbit[0] == 0);
  CHECK(c.orbit[1] == 1);
  auto r = cat.classify(mask_of({{1, 0}}), 2);
  CHECK(r.orbit[0] == 1);
  CHECK(r.orbit[1] == 0);
}

TEST_CASE("classify examples") {
  const auto& cat = GraphletCatalog::instance();
  SUBCASE("cyclic triangle: one orbit") {
    auto c = cat.classify(mask_of({{0, 1}, {1, 2}, {2, 0}}), 3);
    CHECK(c.orbit[0] == c.orbit[1]);
    CHECK(c.orbit[1] == c.orbit[2]);
    CHECK(cat.orbit_class_size(c.orbit[0]) == 3);
  }
  SUBCASE("transitive triangle: three orbits") {
    auto c = cat.classify(mask_of({{0, 1}, {1, 2}, {0, 2}}), 3);
    std::set<int> o{c.orbit[0], c.orbit[1], c.orbit[2]};
    CHECK(o.size() == 3);
  }
  SUBCASE("in-star: sources share an orbit") {
    auto c = cat.classify(mask_of({{0, 1}, {2, 1}}), 3);
    CHECK(c.orbit[0] == c.orbit[2]);
    CHECK(c.orbit[0] != c.orbit[1]);
  }
  SUBCASE("invalid input throws") {
    CHECK_THROWS_AS(cat.classify(mask_of({{0, 1}, {1, 0}}), 2), std::invalid_argument);
    CHECK_THROWS_AS(cat.classify(mask_of({{0, 1}, {2, 3}}), 4), std::invalid_argument);
    CHECK_THROWS_AS(cat.classify(mask_of({{0, 1}}), 3), std::invalid_argument);
  }
}

TEST_CASE("every oriented connected labeled digraph classifies consistently") {
  const auto& cat = GraphletCatalog::instance();
  std::map<AdjacencyMask, int> graphlet_by_code;
  for (const auto& g : cat.graphlets()) {
    CHECK(g.code == min_code(g.code, g.size));
    graphlet_by_code[g.code] = g.id;
  }
  std::array<std::size_t, 5> classes_seen{};
  for (int k = 2; k <= 4; ++k) {
    std::set<AdjacencyMask> codes;
    std::size_t valid = 0;
    for (unsigned m = 0; m < (1u << 16); ++m) {
      if (!oriented_connected(static_cast<AdjacencyMask>(m), k)) continue;
      ++valid;
      const auto mask = static_cast<AdjacencyMask>(m);
      const auto code = min_code(mask, k);
      codes.insert(code);
      Classification c;
      REQUIRE_NOTHROW(c = cat.classify(mask, k));
      REQUIRE(graphlet_by_code.count(code) == 1);
      CHECK(c.graphlet == graphlet_by_code[code]);
      // Orbit labels must be carried by a relabeling onto the canonical form.
      const auto& g = cat.graphlet(c.graphlet);
      bool realized = false;
      std::array<int, 4> p{0, 1, 2, 3};
      do {
        if (relabel(mask, p, k) != g.code) continue;
        bool ok = true;
        for (int i = 0; i < k; ++i)
          ok = ok && c.orbit[static_cast<std::size_t>(i)] == g.orbit_of_position[static_cast<std::size_t>(p[static_cast<std::size_t>(i)])];
        realized = realized || ok;
      } while (std::next_permutation(p.begin(), p.begin() + k));
      CHECK(realized);
    }
    CHECK(valid > 0);
    classes_seen[static_cast<std::size_t>(k)] = codes.size();
  }
  CHECK(classes_seen[2] == 1);
  CHECK(classes_seen[3] == 5);
  CHECK(classes_seen[4] == 34);
}

TEST_CASE("orbits are automorphism classes") {
  const auto& cat = GraphletCatalog::instance();
  for (const auto& g : cat.graphlets()) {
    const int k = g.size;
    // Union positions under every automorphism found by permutation search.
    std::array<int, 4> cls{0, 1, 2, 3};
    std::array<int, 4> p{0, 1, 2, 3};
    do {
      if (relabel(g.code, p, k) != g.code) continue;
      for (int i = 0; i < k; ++i) {
        int a = cls[static_cast<std::size_t>(i)], b = cls[static_cast<std::size_t>(p[static_cast<std::size_t>(i)])];
        int lo = std::min(a, b), hi = std::max(a, b);
        for (auto& c : cls)
          if (c == hi) c = lo;
      }
    } while (std::next_permutation(p.begin(), p.begin() + k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        const bool same_class = cls[static_cast<std::size_t>(i)] == cls[static_cast<std::size_t>(j)];
        const bool same_orbit = g.orbit_of_position[static_cast<std::size_t>(i)] == g.orbit_of_position[static_cast<std::size_t>(j)];
        CHECK(same_class == same_orbit);
      }
    for (int o : g.orbits) {
      int members = 0;
      for (int i = 0; i < k; ++i) members += g.orbit_of_position[static_cast<std::size_t>(i)] == o;
      CHECK(members == cat.orbit_class_size(o));
    }
    for (int i = k; i < 4; ++i) CHECK(g.orbit_of_position[static_cast<std::size_t>(i)] == -1);
  }
}

TEST_CASE("enumeration is deterministic") {
  auto a = GraphletCatalog::enumerate();
  auto b = GraphletCatalog::enumerate();
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_csv() == GraphletCatalog::instance().to_csv());
}

TEST_CASE("role orbit sets") {
  const auto& cat = GraphletCatalog::instance();
  auto sets = cat.role_orbit_sets();
  CHECK(sets.peripheral().size() == 8);
  CHECK(sets.broker().size() == 8);
  CHECK(sets.core_nonbroker.size() == 16);
  CHECK(sets.peripheral_import.size() == 4);
  CHECK(sets.peripheral_export.size() == 4);

  std::set<int> all;
  for (const auto* v : {&sets.peripheral_import, &sets.peripheral_export, &sets.broker_import, &sets.broker_export, &sets.core_nonbroker})
    all.insert(v->begin(), v->end());
  CHECK(all.size() == 32);

  // Structural check: in each host graphlet the pendant is the degree-1 node
  // and its neighbor is the attachment node.
  std::set<int> hosts;
  for (int o : all) hosts.insert(cat.graphlet_of_orbit(o));
  CHECK(hosts.size() == 8);
  auto in = [](const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  for (int h : hosts) {
    const auto& g = cat.graphlet(h);
    REQUIRE(g.size == 4);
    REQUIRE(g.edges.size() == 4);
    std::array<int, 4> degree{};
    for (auto [a, b] : g.edges) ++degree[static_cast<std::size_t>(a)], ++degree[static_cast<std::size_t>(b)];
    int pendant = static_cast<int>(std::find(degree.begin(), degree.end(), 1) - degree.begin());
    REQUIRE(pendant < 4);
    int attach = -1;
    bool toward_pendant = false;
    for (auto [a, b] : g.edges) {
      if (a == pendant) attach = b, toward_pendant = false;
      if (b == pendant) attach = a, toward_pendant = true;
    }
    const int po = g.orbit_of_position[static_cast<std::size_t>(pendant)];
    const int ao = g.orbit_of_position[static_cast<std::size_t>(attach)];
    CHECK(in(toward_pendant ? sets.peripheral_import : sets.peripheral_export, po));
    CHECK(in(toward_pendant ? sets.broker_import : sets.broker_export, ao));
    for (int i = 0; i < 4; ++i)
      if (i != pendant && i != attach) CHECK(in(sets.core_nonbroker, g.orbit_of_position[static_cast<std::size_t>(i)]));
  }
}

TEST_CASE("pair code round trip") {
  for (int k = 2; k <= 4; ++k)
    for (unsigned m = 0; m < (1u << 16); m += 7) {
      auto mask = static_cast<AdjacencyMask>(m);
      bool inside = true;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (((m >> (4 * i + j)) & 1u) && (i >= k || j >= k || i == j)) inside = false;
      if (!inside) continue;
      CHECK(to_adjacency_mask(to_pair_code(mask, k), k) == mask);
    }
}
