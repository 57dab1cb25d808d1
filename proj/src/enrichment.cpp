#include "dgl/enrichment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dgl/distances.hpp"
#include "dgl/parallel.hpp"
#include "dgl/roles.hpp"

namespace dgl {

namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double hypergeom_pvalue(std::uint64_t x, std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  if (n > m || k > m || x > n || x > k) throw std::invalid_argument("hypergeometric arguments need x <= n, k <= m");
  const std::uint64_t lo = n > m - k ? n - (m - k) : 0;
  const std::uint64_t hi = std::min(n, k);
  if (x <= lo) return 1.0;
  const double log_total = log_choose(m, n);
  auto log_term = [&](std::uint64_t i) { return log_choose(k, i) + log_choose(m - k, n - i) - log_total; };
  // The mass is unimodal, so the largest term on [x, hi] sits at the mode or
  // at x; sum outward from there and stop once terms no longer register.
  const auto mode = static_cast<std::uint64_t>((static_cast<double>(n) + 1.0) * (static_cast<double>(k) + 1.0) /
                                               (static_cast<double>(m) + 2.0));
  const std::uint64_t peak = std::clamp(mode, x, hi);
  const double top = log_term(peak);
  constexpr double kNegligible = -40.0;  // e^-40 ~ 4e-18
  double sum = 1.0;
  for (std::uint64_t i = peak + 1; i <= hi; ++i) {
    const double t = log_term(i) - top;
    if (t < kNegligible) break;
    sum += std::exp(t);
  }
  for (std::uint64_t i = peak; i > x;) {
    const double t = log_term(--i) - top;
    if (t < kNegligible) break;
    sum += std::exp(t);
  }
  return std::clamp(std::exp(top) * sum, 0.0, 1.0);
}

std::vector<EnrichmentRow> enrich(const Clustering& clustering, const AnnotationTable& annotations,
                                  const EnrichmentOptions& options) {
  if (clustering.empty()) throw std::invalid_argument("clustering is empty");
  const std::size_t terms = annotations.terms.size();
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < annotations.entities.size(); ++i) {
    if (annotations.values[i].size() != terms) throw std::invalid_argument("annotation row width mismatch");
    row_of.emplace(annotations.entities[i], i);
  }

  std::uint64_t m = 0;
  std::vector<std::uint64_t> k(terms, 0);
  std::map<std::string, std::uint64_t> cluster_n;
  std::map<std::string, std::vector<std::uint64_t>> cluster_x;
  for (const auto& [entity, cluster] : clustering) {
    cluster_n.try_emplace(cluster, 0);
    auto& xs = cluster_x.try_emplace(cluster, std::vector<std::uint64_t>(terms, 0)).first->second;
    auto it = row_of.find(entity);
    if (it == row_of.end()) continue;
    const auto& row = annotations.values[it->second];
    if (std::none_of(row.begin(), row.end(), [](std::uint8_t v) { return v != 0; })) continue;
    ++m;
    ++cluster_n[cluster];
    for (std::size_t t = 0; t < terms; ++t)
      if (row[t]) {
        ++k[t];
        ++xs[t];
      }
  }

  std::vector<EnrichmentRow> rows;
  for (const auto& [cluster, n] : cluster_n)
    for (std::size_t t = 0; t < terms; ++t) {
      EnrichmentRow r{cluster, annotations.terms[t], cluster_x[cluster][t], n, k[t], m, 1.0, false};
      r.p = hypergeom_pvalue(r.x, r.n, r.k, r.m);
      rows.push_back(r);
    }
  if (options.fdr) {
    std::vector<double> ps;
    for (const auto& r : rows) ps.push_back(r.p);
    auto reject = benjamini_hochberg(ps, options.alpha);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].enriched = reject[i];
  } else {
    for (auto& r : rows) r.enriched = r.p <= options.alpha;
  }
  return rows;
}

std::vector<int> average_linkage(const PairDistances& distances, std::size_t clusters) {
  const std::size_t n = distances.items();
  if (clusters < 1 || clusters > n) throw std::invalid_argument("cluster count must lie in [1, items]");

  // Nearest-neighbour chain; average linkage is reducible, so the merges
  // found this way match the greedy order once sorted by height.
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = distances.at(i, j);
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  struct Merge {
    double height;
    std::size_t a, b;
  };
  std::vector<Merge> merges;
  std::vector<std::size_t> chain;
  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty())
      for (std::size_t i = 0; i < n; ++i)
        if (active[i]) {
          chain.push_back(i);
          break;
        }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() > 1 ? chain[chain.size() - 2] : n;
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    if (prev != n) {
      best = prev;
      best_d = d[a * n + prev];
    }
    for (std::size_t j = 0; j < n; ++j)
      if (active[j] && j != a && d[a * n + j] < best_d) {
        best_d = d[a * n + j];
        best = j;
      }
    if (best == prev) {
      chain.pop_back();
      chain.pop_back();
      const std::size_t keep = std::min(a, best), gone = std::max(a, best);
      merges.push_back({best_d, keep, gone});
      for (std::size_t j = 0; j < n; ++j)
        if (active[j] && j != keep && j != gone) {
          const double v = (static_cast<double>(size[keep]) * d[keep * n + j] + static_cast<double>(size[gone]) * d[gone * n + j]) /
                           static_cast<double>(size[keep] + size[gone]);
          d[keep * n + j] = d[j * n + keep] = v;
        }
      size[keep] += size[gone];
      active[gone] = false;
      --remaining;
    } else {
      chain.push_back(best);
    }
  }

  std::stable_sort(merges.begin(), merges.end(), [](const Merge& x, const Merge& y) { return x.height < y.height; });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i + clusters < n; ++i) parent[find(merges[i].a)] = find(merges[i].b);

  std::vector<int> ids(n, -1);
  std::map<std::size_t, int> id_of_root;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = id_of_root.try_emplace(find(i), static_cast<int>(id_of_root.size()));
    ids[i] = it->second;
  }
  return ids;
}

PairDistances dgdvs_distances(const SignatureMatrix& signatures, std::span<const double> weights, unsigned threads) {
  const std::size_t n = signatures.node_count();
  PairDistances d(n);
  parallel_for(n, resolve_threads(threads), [&](unsigned, std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) d.at(i, j) = 1.0 - dgdvs(signatures.row(i), signatures.row(j), weights);
  });
  return d;
}

}  // namespace dgl
