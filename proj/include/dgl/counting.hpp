#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dgl/graph.hpp"

namespace dgl {

/// n x orbit_count matrix of directed graphlet degrees, row = node id.
class SignatureMatrix {
 public:
  SignatureMatrix() = default;
  SignatureMatrix(std::size_t nodes, std::size_t orbits) : nodes_(nodes), orbits_(orbits), data_(nodes * orbits, 0) {}

  std::size_t node_count() const { return nodes_; }
  std::size_t orbit_count() const { return orbits_; }

  std::span<const std::uint64_t> row(std::size_t node) const { return {data_.data() + node * orbits_, orbits_}; }
  std::span<std::uint64_t> row(std::size_t node) { return {data_.data() + node * orbits_, orbits_}; }
  std::uint64_t at(std::size_t node, std::size_t orbit) const { return data_[node * orbits_ + orbit]; }
  std::uint64_t& at(std::size_t node, std::size_t orbit) { return data_[node * orbits_ + orbit]; }

  /// Column as a dense vector.
  std::vector<std::uint64_t> column(std::size_t orbit) const;

  std::span<const std::uint64_t> data() const { return data_; }
  std::span<std::uint64_t> data() { return data_; }

  friend bool operator==(const SignatureMatrix&, const SignatureMatrix&) = default;

 private:
  std::size_t nodes_ = 0;
  std::size_t orbits_ = 0;
  std::vector<std::uint64_t> data_;
};

struct Census {
  SignatureMatrix signatures;
  /// Occurrences per graphlet id; each resolution of a reciprocal pair
  /// counts as one occurrence.
  std::vector<std::uint64_t> frequencies;
};

struct CountOptions {
  unsigned threads = 0;  // 0: resolve_threads default
};

/// Exact census of all connected induced 2-4 node subsets. Subsets holding k
/// reciprocal pairs contribute once per each of their 2^k single-direction
/// resolutions. Output is identical for every thread count.
Census count_census(const DirectedGraph& g, const CountOptions& options = {});

SignatureMatrix count_signatures(const DirectedGraph& g, const CountOptions& options = {});
std::vector<std::uint64_t> count_frequencies(const DirectedGraph& g, const CountOptions& options = {});

}  // namespace dgl
