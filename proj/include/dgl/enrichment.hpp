#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dgl/counting.hpp"
#include "dgl/evaluation.hpp"

namespace dgl {

/// P(X' >= x) for X' hypergeometric: `n` draws from `m` items of which `k`
/// carry the term. Summed in log space; x = 0 gives exactly 1.
double hypergeom_pvalue(std::uint64_t x, std::uint64_t n, std::uint64_t k, std::uint64_t m);

/// Binary entity x term matrix for one annotation namespace.
struct AnnotationTable {
  std::vector<std::string> entities;
  std::vector<std::string> terms;
  std::vector<std::vector<std::uint8_t>> values;  // entities x terms, 0 or 1
};

/// entity -> cluster id
using Clustering = std::map<std::string, std::string>;

struct EnrichmentRow {
  std::string cluster, term;
  std::uint64_t x = 0, n = 0, k = 0, m = 0;
  double p = 1.0;
  bool enriched = false;
};

struct EnrichmentOptions {
  double alpha = 0.01;
  /// Benjamini-Hochberg over all (cluster, term) tests instead of raw p <= alpha.
  bool fdr = false;
};

/// One row per (cluster, term). M and K count annotated entities of the
/// clustering; an entity is annotated when it carries at least one term.
std::vector<EnrichmentRow> enrich(const Clustering& clustering, const AnnotationTable& annotations,
                                  const EnrichmentOptions& options = {});

/// Average-linkage agglomerative clustering cut into `clusters` groups.
/// Cluster ids are numbered by first member.
std::vector<int> average_linkage(const PairDistances& distances, std::size_t clusters);

/// 1 - DGDVS between every pair of signature rows.
PairDistances dgdvs_distances(const SignatureMatrix& signatures, std::span<const double> weights = {}, unsigned threads = 0);

}  // namespace dgl
