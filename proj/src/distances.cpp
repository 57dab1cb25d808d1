#include "dgl/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dgl/catalog.hpp"

namespace dgl {

std::vector<int> orbit_ids(OrbitSet set) {
  const auto& cat = GraphletCatalog::instance();
  const int count = set == OrbitSet::kSmall ? cat.orbit_count_up_to(3) : cat.orbit_count();
  std::vector<int> ids(static_cast<std::size_t>(count));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

namespace {

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<std::uint64_t>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

CorrelationMatrix dgcm(const SignatureMatrix& signatures, OrbitSet set) {
  auto ids = orbit_ids(set);
  return dgcm(signatures, ids);
}

CorrelationMatrix dgcm(const SignatureMatrix& signatures, std::span<const int> orbits) {
  const std::size_t n = signatures.node_count();
  if (n < 2) throw std::invalid_argument("graphlet correlation matrix needs at least 2 nodes");
  const auto k = static_cast<Eigen::Index>(orbits.size());
  const auto rows = static_cast<Eigen::Index>(n + 1);

  Eigen::MatrixXd z(rows, k);
  std::vector<bool> constant(orbits.size(), false);
  std::vector<std::uint64_t> column(n + 1);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto orbit = static_cast<std::size_t>(orbits[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < n; ++i) column[i] = signatures.at(i, orbit);
    column[n] = 1;  // pseudo-node
    auto ranks = average_ranks(column);
    Eigen::Map<Eigen::VectorXd> r(ranks.data(), rows);
    Eigen::VectorXd centered = r.array() - r.mean();
    const double norm = centered.norm();
    if (norm <= 1e-12) {
      constant[static_cast<std::size_t>(c)] = true;
      z.col(c).setZero();
    } else {
      z.col(c) = centered / norm;
    }
  }

  CorrelationMatrix result;
  result.orbit_ids.assign(orbits.begin(), orbits.end());
  result.values = z.transpose() * z;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      double v = std::clamp(0.5 * (result.values(i, j) + result.values(j, i)), -1.0, 1.0);
      result.values(i, j) = result.values(j, i) = v;
    }
    result.values(i, i) = 1.0;
  }
  return result;
}

double dgcd(const CorrelationMatrix& a, const CorrelationMatrix& b) {
  if (a.orbit_ids != b.orbit_ids) throw std::invalid_argument("correlation matrices cover different orbits");
  double sum = 0.0;
  const auto k = a.values.rows();
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double d = a.values(i, j) - b.values(i, j);
      sum += d * d;
    }
  return std::sqrt(sum);
}

double drgf(std::span<const std::uint64_t> freq1, std::span<const std::uint64_t> freq2, const DrgfOptions& options) {
  if (freq1.size() != freq2.size()) throw std::invalid_argument("frequency vectors differ in length");
  const double t1 = static_cast<double>(std::accumulate(freq1.begin(), freq1.end(), std::uint64_t{0}));
  const double t2 = static_cast<double>(std::accumulate(freq2.begin(), freq2.end(), std::uint64_t{0}));
  if (t1 == 0.0 || t2 == 0.0) throw std::invalid_argument("graph has no graphlet occurrences");
  double sum = 0.0;
  for (std::size_t i = 0; i < freq1.size(); ++i) {
    double f1 = static_cast<double>(freq1[i]) / t1;
    double f2 = static_cast<double>(freq2[i]) / t2;
    if (options.log_scale) {
      f1 = freq1[i] ? -std::log(f1) : 0.0;
      f2 = freq2[i] ? -std::log(f2) : 0.0;
    }
    sum += std::abs(f1 - f2);
  }
  return sum;
}

std::vector<OrbitDistribution> orbit_degree_distributions(const SignatureMatrix& signatures) {
  std::vector<OrbitDistribution> result(signatures.orbit_count());
  for (std::size_t o = 0; o < signatures.orbit_count(); ++o) {
    std::map<std::uint64_t, std::uint64_t> histogram;
    for (std::size_t v = 0; v < signatures.node_count(); ++v)
      if (auto k = signatures.at(v, o); k > 0) ++histogram[k];
    double total = 0.0;
    auto& dist = result[o];
    for (const auto& [k, count] : histogram) {
      const double scaled = static_cast<double>(count) / static_cast<double>(k);
      dist.emplace_back(k, scaled);
      total += scaled;
    }
    for (auto& entry : dist) entry.second /= total;
  }
  return result;
}

double orbit_agreement(const OrbitDistribution& a, const OrbitDistribution& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  // Merge over the sorted degree supports.
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double d;
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      d = a[i++].second;
    } else if (i == a.size() || b[j].first < a[i].first) {
      d = b[j++].second;
    } else {
      d = a[i++].second - b[j++].second;
    }
    sum += d * d;
  }
  return 1.0 - std::sqrt(sum) / std::sqrt(2.0);
}

double dgdda(const std::vector<OrbitDistribution>& a, const std::vector<OrbitDistribution>& b, AgreementMean mean) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("orbit distribution sets differ in size");
  double arithmetic = 0.0, log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t o = 0; o < a.size(); ++o) {
    const double agreement = std::clamp(orbit_agreement(a[o], b[o]), 0.0, 1.0);
    arithmetic += agreement;
    if (agreement <= 0.0)
      any_zero = true;
    else
      log_sum += std::log(agreement);
  }
  const double count = static_cast<double>(a.size());
  if (mean == AgreementMean::kArithmetic) return arithmetic / count;
  return any_zero ? 0.0 : std::exp(log_sum / count);
}

double dgdda(const SignatureMatrix& a, const SignatureMatrix& b, AgreementMean mean) {
  return dgdda(orbit_degree_distributions(a), orbit_degree_distributions(b), mean);
}

double dgdvs(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::span<const double> weights) {
  if (a.size() != b.size()) throw std::invalid_argument("signatures differ in length");
  if (!weights.empty() && weights.size() != a.size()) throw std::invalid_argument("weight vector has wrong length");
  double distance = 0.0, weight_sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const double x = static_cast<double>(a[i]), y = static_cast<double>(b[i]);
    distance += w * std::abs(std::log(x + 1.0) - std::log(y + 1.0)) / std::log(std::max(x, y) + 2.0);
    weight_sum += w;
  }
  if (weight_sum <= 0.0) throw std::invalid_argument("weights must have a positive sum");
  return std::clamp(1.0 - distance / weight_sum, 0.0, 1.0);
}

std::vector<double> degree_distribution(const DirectedGraph& g, DegreeSide side) {
  const std::size_t n = g.node_count();
  if (n == 0) throw std::invalid_argument("degree distribution of an empty graph");
  std::vector<double> dist;
  for (NodeId u = 0; u < n; ++u) {
    const std::size_t d = side == DegreeSide::kIn ? g.in_degree(u) : g.out_degree(u);
    if (d >= dist.size()) dist.resize(d + 1, 0.0);
    dist[d] += 1.0;
  }
  for (auto& x : dist) x /= static_cast<double>(n);
  return dist;
}

namespace {

double padded_euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const double d = (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace

double degree_distribution_distance(std::span<const double> a, std::span<const double> b) {
  return padded_euclidean(a, b);
}

double degree_distribution_distance(const DirectedGraph& a, const DirectedGraph& b, DegreeSide side) {
  return padded_euclidean(degree_distribution(a, side), degree_distribution(b, side));
}

std::vector<double> adjacency_singular_values(const DirectedGraph& g) {
  // Zero rows and columns only add zero singular values, which padding
  // restores, so the matrix is shrunk to nodes with out- resp. in-edges.
  std::vector<Eigen::Index> row_of(g.node_count(), -1), col_of(g.node_count(), -1);
  Eigen::Index rows = 0, cols = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (g.out_degree(u) > 0) row_of[u] = rows++;
    if (g.in_degree(u) > 0) col_of[u] = cols++;
  }
  if (rows == 0) return {};
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& [u, v] : g.edges()) a(row_of[u], col_of[v]) = 1.0;
  // Square roots of the Gram eigenvalues. Eigen 3.4's BDCSVD returns NaN (or
  // trips an internal assertion) on some sparse 0/1 matrices, and Jacobi SVD
  // is too slow at n = 1000.
  const Eigen::MatrixXd gram = rows <= cols ? Eigen::MatrixXd(a * a.transpose()) : Eigen::MatrixXd(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigenvalue decomposition did not converge");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double floor = static_cast<double>(gram.rows()) * std::numeric_limits<double>::epsilon() * lambda.maxCoeff();
  std::vector<double> values;
  for (double l : lambda) values.push_back(l > floor ? std::sqrt(l) : 0.0);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double spectral_distance(std::span<const double> a, std::span<const double> b) { return padded_euclidean(a, b); }

double spectral_distance(const DirectedGraph& a, const DirectedGraph& b) {
  return padded_euclidean(adjacency_singular_values(a), adjacency_singular_values(b));
}

std::string measure_name(Measure m) {
  switch (m) {
    case Measure::kDrgf: return "drgf";
    case Measure::kDgdda: return "dgdda";
    case Measure::kDgcd13: return "dgcd13";
    case Measure::kDgcd129: return "dgcd129";
    case Measure::kInDegree: return "indeg";
    case Measure::kOutDegree: return "outdeg";
    case Measure::kSpectral: return "spectral";
  }
  return "unknown";
}

Measure parse_measure(const std::string& name) {
  for (Measure m : all_measures())
    if (measure_name(m) == name) return m;
  throw std::invalid_argument("unknown measure: " + name);
}

std::vector<Measure> all_measures() {
  return {Measure::kDrgf,     Measure::kDgdda,     Measure::kDgcd13,  Measure::kDgcd129,
          Measure::kInDegree, Measure::kOutDegree, Measure::kSpectral};
}

GraphFeatures compute_features(const DirectedGraph& g, std::span<const Measure> measures, const FeatureOptions& options) {
  auto wants = [&](Measure m) { return std::find(measures.begin(), measures.end(), m) != measures.end(); };
  GraphFeatures f;
  const bool needs_census =
      wants(Measure::kDrgf) || wants(Measure::kDgdda) || wants(Measure::kDgcd13) || wants(Measure::kDgcd129);
  if (needs_census) {
    Census census = count_census(g, {options.threads});
    if (wants(Measure::kDrgf)) f.frequencies = census.frequencies;
    if (wants(Measure::kDgdda)) f.orbit_distributions = orbit_degree_distributions(census.signatures);
    if (wants(Measure::kDgcd13)) f.gcm13 = dgcm(census.signatures, OrbitSet::kSmall);
    if (wants(Measure::kDgcd129)) f.gcm129 = dgcm(census.signatures, OrbitSet::kAll);
  }
  if (wants(Measure::kInDegree)) f.in_degrees = degree_distribution(g, DegreeSide::kIn);
  if (wants(Measure::kOutDegree)) f.out_degrees = degree_distribution(g, DegreeSide::kOut);
  if (wants(Measure::kSpectral)) f.singular_values = adjacency_singular_values(g);
  return f;
}

double feature_distance(Measure m, const GraphFeatures& a, const GraphFeatures& b, const FeatureOptions& options) {
  switch (m) {
    case Measure::kDrgf: return drgf(a.frequencies, b.frequencies, options.drgf);
    case Measure::kDgdda: return 1.0 - dgdda(a.orbit_distributions, b.orbit_distributions, options.dgdda_mean);
    case Measure::kDgcd13: return dgcd(a.gcm13.value(), b.gcm13.value());
    case Measure::kDgcd129: return dgcd(a.gcm129.value(), b.gcm129.value());
    case Measure::kInDegree: return degree_distribution_distance(a.in_degrees, b.in_degrees);
    case Measure::kOutDegree: return degree_distribution_distance(a.out_degrees, b.out_degrees);
    case Measure::kSpectral: return spectral_distance(a.singular_values, b.singular_values);
  }
  throw std::invalid_argument("unknown measure");
}

double network_distance(Measure m, const DirectedGraph& a, const DirectedGraph& b, const FeatureOptions& options) {
  const Measure ms[] = {m};
  return feature_distance(m, compute_features(a, ms, options), compute_features(b, ms, options), options);
}

}  // namespace dgl
