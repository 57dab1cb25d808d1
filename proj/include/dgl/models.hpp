#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dgl/graph.hpp"

namespace dgl {

enum class Model { kEr, kSfbaSink, kSfbaSource, kSfGd, kGeo, kGeoGd };

std::string model_name(Model m);
Model parse_model(const std::string& name);
std::vector<Model> all_models();

struct GeneratorSpec {
  Model model = Model::kEr;
  std::size_t n = 500;
  double density = 0.005;  // target m = round(density * n * (n - 1))
  std::uint64_t seed = 0;
  // SF-GD: fixed probabilities skip the calibration search.
  std::optional<double> sfgd_p, sfgd_q;
  // GEO-GD: radius of the matching GEO graph; searched when absent.
  std::optional<double> geo_radius;
};

std::size_t target_edge_count(std::size_t n, double density);

struct GeneratedGraph {
  DirectedGraph graph;
  std::size_t target_edges = 0;
  // Parameters actually used, for provenance.
  std::optional<double> p, q, radius;
  int attempts = 1;
  /// GEO and GEO-GD: node coordinates and the edge threshold distance.
  std::vector<std::array<double, 3>> points;
  std::optional<double> threshold;
};

/// Thrown when a model cannot reach its edge target within tolerance; carries
/// the closest graph obtained.
class UnreachableTarget : public std::runtime_error {
 public:
  UnreachableTarget(const std::string& what, GeneratedGraph best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const GeneratedGraph& best() const { return best_; }

 private:
  GeneratedGraph best_;
};

/// Generates one network. Edge counts: exact for ER, SFBA, GEO and GEO-GD;
/// within 5% for SF-GD.
GeneratedGraph generate(const GeneratorSpec& spec);

struct LabeledGraph {
  DirectedGraph graph;
  std::string label;
  std::string name;
};

struct SuiteSpec {
  std::vector<std::size_t> sizes{500, 1000, 2000};
  std::vector<double> densities{0.005, 0.01};
  std::size_t per_cell = 10;
  std::uint64_t seed = 0;
  std::vector<Model> models = all_models();
  unsigned threads = 0;
};

/// models x sizes x densities x per_cell graphs, labeled by model name. Each
/// graph's seed is derived from (seed, cell, replicate).
std::vector<LabeledGraph> generate_suite(const SuiteSpec& spec);

}  // namespace dgl
