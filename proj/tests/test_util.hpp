#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "dgl/graph.hpp"
#include "dgl/models.hpp"

namespace dgl::testing {

/// Random digraph with independent arc probability `density`; a few
/// reciprocal pairs are forced so the resolution rule is always exercised.
inline DirectedGraph random_digraph(std::size_t n, double density, std::uint64_t seed, std::size_t forced_reciprocal = 0) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution arc(density);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && arc(rng)) edges.emplace_back(u, v);
  if (n >= 2) {
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    for (std::size_t i = 0; i < forced_reciprocal; ++i) {
      NodeId u = node(rng), v = node(rng);
      if (u == v) continue;
      edges.emplace_back(u, v);
      edges.emplace_back(v, u);
    }
  }
  return DirectedGraph::from_edges(n, edges);
}

inline GeneratorSpec model_spec(Model model, std::size_t n, double density, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.model = model;
  spec.n = n;
  spec.density = density;
  spec.seed = seed;
  return spec;
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dgl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace dgl::testing
