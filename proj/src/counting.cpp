#include "dgl/counting.hpp"

#include <algorithm>

#include "dgl/catalog.hpp"
#include "dgl/parallel.hpp"

namespace dgl {

std::vector<std::uint64_t> SignatureMatrix::column(std::size_t orbit) const {
  std::vector<std::uint64_t> col(nodes_);
  for (std::size_t i = 0; i < nodes_; ++i) col[i] = at(i, orbit);
  return col;
}

namespace {

// Above this node count the n^2-bit adjacency matrix is skipped in favour of
// binary searches on the CSR lists.
constexpr std::size_t kDenseAdjacencyLimit = 8192;

/// pair(u, v): bit 0 = edge u->v, bit 1 = edge v->u.
class DenseAdjacency {
 public:
  explicit DenseAdjacency(const DirectedGraph& g) : n_(g.node_count()), bits_((n_ * n_ + 63) / 64, 0) {
    for (const auto& [u, v] : g.edges()) {
      std::size_t idx = std::size_t{u} * n_ + v;
      bits_[idx >> 6] |= std::uint64_t{1} << (idx & 63);
    }
  }
  unsigned pair(NodeId u, NodeId v) const { return edge(u, v) | (edge(v, u) << 1); }
  bool adjacent(NodeId u, NodeId v) const { return pair(u, v) != 0; }

 private:
  unsigned edge(NodeId u, NodeId v) const {
    std::size_t idx = std::size_t{u} * n_ + v;
    return static_cast<unsigned>(bits_[idx >> 6] >> (idx & 63)) & 1u;
  }
  std::size_t n_;
  std::vector<std::uint64_t> bits_;
};

class SparseAdjacency {
 public:
  explicit SparseAdjacency(const DirectedGraph& g) : g_(g) {}
  unsigned pair(NodeId u, NodeId v) const {
    return static_cast<unsigned>(g_.has_edge(u, v)) | (static_cast<unsigned>(g_.has_edge(v, u)) << 1);
  }
  bool adjacent(NodeId u, NodeId v) const {
    auto nb = g_.neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

 private:
  const DirectedGraph& g_;
};

struct Accumulator {
  std::vector<std::uint64_t> orbits;  // n x orbit_count
  std::vector<std::uint64_t> graphlets;
};

template <class Adjacency>
class Enumerator {
 public:
  Enumerator(const DirectedGraph& g, const Adjacency& adj, const GraphletCatalog& cat, Accumulator& acc)
      : g_(g), adj_(adj), cat_(cat), acc_(acc), stride_(static_cast<std::size_t>(cat.orbit_count())) {}

  /// ESU rooted at v: each connected subset whose smallest id is v is seen
  /// exactly once, at sizes 2, 3 and 4.
  void run_root(NodeId v) {
    ext1_.clear();
    for (NodeId u : g_.neighbors(v))
      if (u > v) ext1_.push_back(u);
    nodes_[0] = v;

    for (std::size_t i = 0; i < ext1_.size(); ++i) {
      const NodeId w1 = ext1_[i];
      nodes_[1] = w1;
      const auto code2 = static_cast<PairCode>(adj_.pair(v, w1) << pair_bit(0, 1));
      emit(2, code2);

      ext2_.assign(ext1_.begin() + static_cast<std::ptrdiff_t>(i) + 1, ext1_.end());
      for (NodeId u : g_.neighbors(w1))
        if (u > v && !adj_.adjacent(v, u)) ext2_.push_back(u);

      for (std::size_t j = 0; j < ext2_.size(); ++j) {
        const NodeId w2 = ext2_[j];
        nodes_[2] = w2;
        const auto code3 = static_cast<PairCode>(code2 | adj_.pair(v, w2) << pair_bit(0, 2) |
                                                 adj_.pair(w1, w2) << pair_bit(1, 2));
        emit(3, code3);

        for (std::size_t k = j + 1; k < ext2_.size(); ++k) emit_four(code3, ext2_[k]);
        for (NodeId u : g_.neighbors(w2))
          if (u > v && u != w1 && !adj_.adjacent(v, u) && !adj_.adjacent(w1, u)) emit_four(code3, u);
      }
    }
  }

 private:
  void emit_four(PairCode code3, NodeId u) {
    nodes_[3] = u;
    const auto code4 = static_cast<PairCode>(code3 | adj_.pair(nodes_[0], u) << pair_bit(0, 3) |
                                             adj_.pair(nodes_[1], u) << pair_bit(1, 3) |
                                             adj_.pair(nodes_[2], u) << pair_bit(2, 3));
    emit(4, code4);
  }

  void emit(int size, PairCode code) {
    for (const auto& inc : cat_.orbit_increments(code, size))
      acc_.orbits[std::size_t{nodes_[inc.position]} * stride_ + inc.orbit] += inc.count;
    for (const auto& inc : cat_.graphlet_increments(code, size)) acc_.graphlets[inc.graphlet] += inc.count;
  }

  const DirectedGraph& g_;
  const Adjacency& adj_;
  const GraphletCatalog& cat_;
  Accumulator& acc_;
  std::size_t stride_;
  NodeId nodes_[kMaxGraphletSize]{};
  std::vector<NodeId> ext1_, ext2_;
};

template <class Adjacency>
Census run_census(const DirectedGraph& g, const Adjacency& adj, unsigned threads) {
  const auto& cat = GraphletCatalog::instance();
  const std::size_t n = g.node_count();
  const auto orbits = static_cast<std::size_t>(cat.orbit_count());
  const auto graphlets = static_cast<std::size_t>(cat.graphlet_count());

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<Accumulator> accs(threads);
  for (auto& a : accs) {
    a.orbits.assign(n * orbits, 0);
    a.graphlets.assign(graphlets, 0);
  }
  std::vector<Enumerator<Adjacency>> workers;
  workers.reserve(threads);
  for (auto& a : accs) workers.emplace_back(g, adj, cat, a);

  parallel_for(
      n, threads, [&](unsigned worker, std::size_t v) { workers[worker].run_root(static_cast<NodeId>(v)); }, 16);

  Census census{SignatureMatrix(n, orbits), std::vector<std::uint64_t>(graphlets, 0)};
  auto out = census.signatures.data();
  for (const auto& a : accs) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a.orbits[i];
    for (std::size_t i = 0; i < graphlets; ++i) census.frequencies[i] += a.graphlets[i];
  }
  return census;
}

}  // namespace

Census count_census(const DirectedGraph& g, const CountOptions& options) {
  const unsigned threads = resolve_threads(options.threads);
  if (g.node_count() <= kDenseAdjacencyLimit) return run_census(g, DenseAdjacency(g), threads);
  return run_census(g, SparseAdjacency(g), threads);
}

SignatureMatrix count_signatures(const DirectedGraph& g, const CountOptions& options) {
  return count_census(g, options).signatures;
}

std::vector<std::uint64_t> count_frequencies(const DirectedGraph& g, const CountOptions& options) {
  return count_census(g, options).frequencies;
}

}  // namespace dgl
