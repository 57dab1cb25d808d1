#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgl/counting.hpp"
#include "dgl/graph.hpp"

namespace dgl {

/// Which orbits a correlation matrix is built over.
enum class OrbitSet {
  kSmall,  // the 13 orbits of 2-3 node graphlets
  kAll,    // all 129 orbits
};

std::vector<int> orbit_ids(OrbitSet set);

/// Spearman correlations between orbit-degree columns.
struct CorrelationMatrix {
  std::vector<int> orbit_ids;
  Eigen::MatrixXd values;  // symmetric, unit diagonal, entries in [-1, 1]
};

/// Directed graphlet correlation matrix. One extra pseudo-node with every
/// orbit count equal to 1 is appended before ranking; columns that are still
/// constant correlate 0 with every other column. Throws for fewer than 2 nodes.
CorrelationMatrix dgcm(const SignatureMatrix& signatures, OrbitSet set);
CorrelationMatrix dgcm(const SignatureMatrix& signatures, std::span<const int> orbits);

/// Euclidean distance between the strict upper triangles.
double dgcd(const CorrelationMatrix& a, const CorrelationMatrix& b);

struct DrgfOptions {
  /// Compare -log(N_i / total) instead of N_i / total; empty graphlets are
  /// assigned 0 on both sides.
  bool log_scale = false;
};

/// Sum of absolute differences of normalized graphlet frequencies.
double drgf(std::span<const std::uint64_t> freq1, std::span<const std::uint64_t> freq2, const DrgfOptions& options = {});

enum class AgreementMean { kArithmetic, kGeometric };

/// Scaled, normalized orbit-degree distribution of one orbit: pairs
/// (degree k >= 1, N(k)) with sum N(k) = 1, or empty when no node touches it.
using OrbitDistribution = std::vector<std::pair<std::uint64_t, double>>;
std::vector<OrbitDistribution> orbit_degree_distributions(const SignatureMatrix& signatures);

/// Agreement for one orbit; 1 when absent from both, 0 when absent from one.
double orbit_agreement(const OrbitDistribution& a, const OrbitDistribution& b);

/// Directed graphlet degree distribution agreement in [0, 1].
double dgdda(const std::vector<OrbitDistribution>& a, const std::vector<OrbitDistribution>& b,
             AgreementMean mean = AgreementMean::kArithmetic);
double dgdda(const SignatureMatrix& a, const SignatureMatrix& b, AgreementMean mean = AgreementMean::kArithmetic);

/// Similarity of two directed graphlet degree vectors in [0, 1]. Empty
/// `weights` means weight 1 for every orbit.
double dgdvs(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::span<const double> weights = {});

enum class DegreeSide { kIn, kOut };

/// Fraction of nodes per degree value, index = degree.
std::vector<double> degree_distribution(const DirectedGraph& g, DegreeSide side);
double degree_distribution_distance(std::span<const double> a, std::span<const double> b);
double degree_distribution_distance(const DirectedGraph& a, const DirectedGraph& b, DegreeSide side);

/// Singular values of the adjacency matrix, descending.
std::vector<double> adjacency_singular_values(const DirectedGraph& g);
double spectral_distance(std::span<const double> a, std::span<const double> b);
double spectral_distance(const DirectedGraph& a, const DirectedGraph& b);

/// Network-level measures used by the evaluation harness. DGDDA enters as
/// 1 - agreement so that every measure is a distance.
enum class Measure { kDrgf, kDgdda, kDgcd13, kDgcd129, kInDegree, kOutDegree, kSpectral };

std::string measure_name(Measure m);
Measure parse_measure(const std::string& name);
std::vector<Measure> all_measures();

/// Per-graph precomputation for the measures requested.
struct GraphFeatures {
  std::vector<std::uint64_t> frequencies;
  std::vector<OrbitDistribution> orbit_distributions;
  std::optional<CorrelationMatrix> gcm13, gcm129;
  std::vector<double> in_degrees, out_degrees;
  std::vector<double> singular_values;
};

struct FeatureOptions {
  unsigned threads = 0;
  DrgfOptions drgf;
  AgreementMean dgdda_mean = AgreementMean::kArithmetic;
};

GraphFeatures compute_features(const DirectedGraph& g, std::span<const Measure> measures, const FeatureOptions& options = {});
double feature_distance(Measure m, const GraphFeatures& a, const GraphFeatures& b, const FeatureOptions& options = {});

/// Convenience: computes the features of both graphs and compares them.
double network_distance(Measure m, const DirectedGraph& a, const DirectedGraph& b, const FeatureOptions& options = {});

}  // namespace dgl
