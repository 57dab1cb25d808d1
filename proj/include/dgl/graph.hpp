#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dgl {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Malformed or unreadable input data. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simple directed graph in CSR form. Self-loops and duplicate edges never
/// survive construction; reciprocal pairs (u->v and v->u) are kept.
///
/// Immutable once built, so a single instance can be read from many threads.
class DirectedGraph {
 public:
  DirectedGraph() = default;

  /// Builds a graph over nodes 0..n-1. Self-loops and repeated edges are
  /// dropped; every endpoint must be < n.
  static DirectedGraph from_edges(std::size_t n, std::span<const Edge> edges,
                                  std::vector<std::string> labels = {});

  std::size_t node_count() const { return out_offsets_.empty() ? 0 : out_offsets_.size() - 1; }
  std::size_t edge_count() const { return out_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId u) const;
  std::span<const NodeId> in_neighbors(NodeId u) const;
  /// Union of in- and out-neighbors, sorted, without repeats.
  std::span<const NodeId> neighbors(NodeId u) const;

  std::size_t out_degree(NodeId u) const { return out_neighbors(u).size(); }
  std::size_t in_degree(NodeId u) const { return in_neighbors(u).size(); }

  /// O(log deg(u)).
  bool has_edge(NodeId u, NodeId v) const;
  std::size_t reciprocal_pairs() const;

  /// Edges sorted by (source, target).
  std::vector<Edge> edges() const;

  /// Label of a node; falls back to the decimal id when no labels were given.
  std::string label(NodeId u) const;
  const std::vector<std::string>& labels() const { return labels_; }

  DirectedGraph reversed() const;

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.out_offsets_ == b.out_offsets_ && a.out_targets_ == b.out_targets_ &&
           a.labels_ == b.labels_;
  }

 private:
  std::vector<std::size_t> out_offsets_, in_offsets_, und_offsets_;
  std::vector<NodeId> out_targets_, in_sources_, und_targets_;
  std::vector<std::string> labels_;
};

struct LoadReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

/// Reads "src dst" lines; '#' starts a comment. Labels are mapped to dense ids
/// in order of first appearance.
DirectedGraph read_edge_list(std::istream& in, LoadReport* report = nullptr);
DirectedGraph load_edge_list(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Writes one "src dst" line per edge using node labels. Isolated nodes are
/// not representable in this format and are lost.
void write_edge_list(const DirectedGraph& g, std::ostream& out);
void save_edge_list(const DirectedGraph& g, const std::filesystem::path& path);

struct TradeRecord {
  std::string exporter;
  std::string importer;
  double value = 0.0;
};

/// Keeps the largest trades covering `coverage` of the total trade value.
/// Records for the same ordered (exporter, importer) pair are summed first;
/// ties keep input order. Every country seen in the records becomes a node.
DirectedGraph build_trade_network(std::span<const TradeRecord> records, double coverage = 0.90);

struct Reaction {
  std::string enzyme;
  std::vector<std::string> substrates;
  std::vector<std::string> products;
};

/// Enzyme-centred metabolic network: e1 -> e2 when some product of a reaction
/// catalysed by e1 is a substrate of a reaction catalysed by e2.
DirectedGraph build_enzyme_network(std::span<const Reaction> reactions);

enum class PerturbationKind {
  kRewire,       // delete k edges, insert k random new ones
  kRemove,       // delete k edges
  kDegreeSwap,   // k double-edge swaps preserving in/out degrees
};

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kRewire;
  double fraction = 0.0;  // in [0, 0.9]
  std::uint64_t seed = 0;
};

/// Returns a perturbed copy; k = floor(fraction * m).
DirectedGraph perturb(const DirectedGraph& g, const PerturbationSpec& spec);

PerturbationKind parse_perturbation_kind(const std::string& name);
std::string perturbation_kind_name(PerturbationKind kind);

}  // namespace dgl
