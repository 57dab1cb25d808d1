#include "dgl/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include "dgl/parallel.hpp"
#include "dgl/random.hpp"

namespace dgl {

std::string model_name(Model m) {
  switch (m) {
    case Model::kEr: return "er";
    case Model::kSfbaSink: return "sfba-sink";
    case Model::kSfbaSource: return "sfba-source";
    case Model::kSfGd: return "sf-gd";
    case Model::kGeo: return "geo";
    case Model::kGeoGd: return "geo-gd";
  }
  return "unknown";
}

Model parse_model(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Model m : all_models())
    if (model_name(m) == lower) return m;
  throw std::invalid_argument("unknown model: " + name);
}

std::vector<Model> all_models() {
  return {Model::kEr, Model::kSfbaSink, Model::kSfbaSource, Model::kSfGd, Model::kGeo, Model::kGeoGd};
}

std::size_t target_edge_count(std::size_t n, double density) {
  return static_cast<std::size_t>(std::llround(density * static_cast<double>(n) * static_cast<double>(n - 1)));
}

namespace {

std::uint64_t key(NodeId u, NodeId v) { return (std::uint64_t{u} << 32) | v; }

DirectedGraph erdos_renyi(std::size_t n, std::size_t m, Rng& rng) {
  const std::size_t all_pairs = n * (n - 1);
  // Dense targets are easier to reach by sampling the complement.
  const bool complement = m > all_pairs / 2;
  const std::size_t draws = complement ? all_pairs - m : m;
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(2 * draws);
  std::vector<Edge> picked;
  picked.reserve(draws);
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  while (picked.size() < draws) {
    NodeId u = node(rng), v = node(rng);
    if (u == v || !chosen.insert(key(u, v)).second) continue;
    picked.emplace_back(u, v);
  }
  if (!complement) return DirectedGraph::from_edges(n, picked);
  std::vector<Edge> edges;
  edges.reserve(m);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && !chosen.count(key(u, v))) edges.emplace_back(u, v);
  return DirectedGraph::from_edges(n, edges);
}

/// Each new node sends ceil(m/n) edges to distinct older nodes chosen with
/// probability proportional to in-degree + 1; the result is then trimmed or
/// padded to exactly m edges.
DirectedGraph preferential_sink(std::size_t n, std::size_t m, Rng& rng) {
  const std::size_t per_node = (m + n - 1) / n;
  std::vector<NodeId> pool;  // node u appears in_degree(u) + 1 times
  pool.reserve(n + m * 2);
  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> present;
  std::vector<NodeId> targets;
  for (NodeId t = 0; t < n; ++t) {
    const std::size_t want = std::min<std::size_t>(per_node, t);
    targets.clear();
    while (targets.size() < want) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      NodeId target = pool[pick(rng)];
      if (std::find(targets.begin(), targets.end(), target) == targets.end()) targets.push_back(target);
    }
    for (NodeId target : targets) {
      edges.emplace_back(t, target);
      present.insert(key(t, target));
      pool.push_back(target);
    }
    pool.push_back(t);
  }

  if (edges.size() > m) {
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, edges.size() - 1);
      std::swap(edges[i], edges[pick(rng)]);
    }
    edges.resize(m);
  }
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  std::size_t attempts = 0;
  while (edges.size() < m) {
    if (++attempts > 100 * (m + 1)) throw std::runtime_error("preferential attachment padding failed");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    NodeId u = node(rng), v = pool[pick(rng)];
    if (u == v || !present.insert(key(u, v)).second) continue;
    edges.emplace_back(u, v);
    pool.push_back(v);
  }
  return DirectedGraph::from_edges(n, edges);
}

/// Duplication-divergence growth from a directed triangle. Returns the edge
/// list, or nothing when the graph exceeds `edge_cap` (used while calibrating).
std::optional<std::vector<Edge>> duplication_divergence(std::size_t n, double p, double q, Rng& rng,
                                                        std::size_t edge_cap) {
  std::vector<std::vector<NodeId>> out(n), in(n);
  std::size_t edge_count = 0;
  auto add = [&](NodeId u, NodeId v) {
    out[u].push_back(v);
    in[v].push_back(u);
    ++edge_count;
  };
  add(0, 1);
  add(1, 2);
  add(2, 0);
  std::bernoulli_distribution keep(1.0 - q), link(p), coin(0.5);
  for (NodeId child = 3; child < n; ++child) {
    std::uniform_int_distribution<NodeId> pick(0, child - 1);
    const NodeId parent = pick(rng);
    // Copy before mutating: the parent's lists grow when linked to the child.
    const std::vector<NodeId> parent_out = out[parent], parent_in = in[parent];
    for (NodeId v : parent_out)
      if (keep(rng)) add(child, v);
    for (NodeId u : parent_in)
      if (keep(rng)) add(u, child);
    if (link(rng)) {
      if (coin(rng))
        add(parent, child);
      else
        add(child, parent);
    }
    if (edge_count > edge_cap) return std::nullopt;
  }
  std::vector<Edge> edges;
  edges.reserve(edge_count);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v : out[u]) edges.emplace_back(u, v);
  return edges;
}

struct SfgdCalibration {
  double p = 0.5, q = 0.5;
};

constexpr int kPilotRuns = 10;

double pilot_mean(std::size_t n, std::size_t target, double p, double q, std::uint64_t seed, double* spread) {
  double sum = 0.0, sum_sq = 0.0;
  const std::size_t cap = 4 * target + 64;
  for (int r = 0; r < kPilotRuns; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    auto edges = duplication_divergence(n, p, q, rng, cap);
    const double m = edges ? static_cast<double>(edges->size()) : static_cast<double>(cap);
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum / kPilotRuns;
  if (spread) *spread = std::sqrt(std::max(0.0, sum_sq / kPilotRuns - mean * mean));
  return mean;
}

/// For each p on a 0.1 grid, bisects q so the pilot mean edge count meets the
/// target, then keeps the candidate with the smallest pilot spread among
/// those within 5% (closest mean otherwise). Cached per (n, target).
SfgdCalibration calibrate_sfgd(std::size_t n, std::size_t target) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, SfgdCalibration> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find({n, target}); it != cache.end()) return it->second;
  }
  const std::uint64_t pilot_seed = derive_seed(0x5f6d, {n, target});
  const double t = static_cast<double>(target);
  SfgdCalibration best;
  double best_error = INFINITY, best_spread = INFINITY;
  for (int step = 1; step <= 9; ++step) {
    const double p = 0.1 * step;
    double lo = 0.0, hi = 1.0;  // edge count decreases in q
    for (int it = 0; it < 16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (pilot_mean(n, target, p, mid, pilot_seed, nullptr) > t)
        lo = mid;
      else
        hi = mid;
    }
    const double q = 0.5 * (lo + hi);
    double spread = 0.0;
    const double error = std::abs(pilot_mean(n, target, p, q, pilot_seed, &spread) - t) / t;
    const bool within = error <= 0.05;
    const bool best_within = best_error <= 0.05;
    bool better;
    if (within && best_within)
      better = spread < best_spread;
    else
      better = within || (!best_within && error < best_error);
    if (better) {
      best = {p, q};
      best_error = error;
      best_spread = spread;
    }
  }
  std::lock_guard lock(mutex);
  cache.emplace(std::make_pair(n, target), best);
  return best;
}

using Point = std::array<double, 3>;

double squared_distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/// Visits every unordered pair of points closer than `radius` using a cubic
/// cell grid of side `radius`.
template <class Visit>
void for_close_pairs(const std::vector<Point>& pts, double radius, Visit&& visit) {
  Point lo = pts.front(), hi = pts.front();
  for (const auto& p : pts)
    for (int d = 0; d < 3; ++d) {
      lo[static_cast<std::size_t>(d)] = std::min(lo[static_cast<std::size_t>(d)], p[static_cast<std::size_t>(d)]);
      hi[static_cast<std::size_t>(d)] = std::max(hi[static_cast<std::size_t>(d)], p[static_cast<std::size_t>(d)]);
    }
  double extent = 0.0;
  for (int d = 0; d < 3; ++d) extent = std::max(extent, hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]);
  // Cap the grid resolution so tiny radii do not allocate huge grids.
  const double cell = std::max(radius, extent / 64.0 + 1e-12);
  const auto dim = static_cast<long>(std::floor(extent / cell)) + 1;
  auto coord = [&](const Point& p, int d) {
    return std::min(dim - 1, static_cast<long>((p[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) / cell));
  };
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(dim * dim * dim));
  auto index = [&](long x, long y, long z) { return static_cast<std::size_t>((x * dim + y) * dim + z); };
  for (std::size_t i = 0; i < pts.size(); ++i) cells[index(coord(pts[i], 0), coord(pts[i], 1), coord(pts[i], 2))].push_back(i);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const long cx = coord(pts[i], 0), cy = coord(pts[i], 1), cz = coord(pts[i], 2);
    for (long x = std::max(0L, cx - 1); x <= std::min(dim - 1, cx + 1); ++x)
      for (long y = std::max(0L, cy - 1); y <= std::min(dim - 1, cy + 1); ++y)
        for (long z = std::max(0L, cz - 1); z <= std::min(dim - 1, cz + 1); ++z)
          for (std::size_t j : cells[index(x, y, z)])
            if (j > i && squared_distance(pts[i], pts[j]) <= r2) visit(i, j);
  }
}

std::size_t count_close_pairs(const std::vector<Point>& pts, double radius) {
  std::size_t count = 0;
  for_close_pairs(pts, radius, [&](std::size_t, std::size_t) { ++count; });
  return count;
}

/// Smallest radius whose close-pair count reaches m (bisection).
double radius_for_edges(const std::vector<Point>& pts, std::size_t m) {
  double lo = 0.0, hi = 1e-3;
  while (count_close_pairs(pts, hi) < m) hi *= 2.0;
  for (int it = 0; it < 64 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::size_t c = count_close_pairs(pts, mid);
    if (c == m) return mid;
    if (c < m)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

/// Every pair within `radius` gets one edge of uniformly random direction.
DirectedGraph geometric_edges(const std::vector<Point>& pts, double radius, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for_close_pairs(pts, radius, [&](std::size_t i, std::size_t j) { pairs.emplace_back(i, j); });
  std::sort(pairs.begin(), pairs.end());
  std::bernoulli_distribution coin(0.5);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    auto u = static_cast<NodeId>(i), v = static_cast<NodeId>(j);
    if (coin(rng))
      edges.emplace_back(u, v);
    else
      edges.emplace_back(v, u);
  }
  return DirectedGraph::from_edges(pts.size(), edges);
}

std::vector<Point> uniform_points(std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> pts(count);
  for (auto& p : pts)
    for (auto& c : p) c = unit(rng);
  return pts;
}

GeneratedGraph geometric(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  auto pts = uniform_points(n, rng);
  const double r = radius_for_edges(pts, m);
  return {geometric_edges(pts, r, rng), m, std::nullopt, std::nullopt, r, 1, pts, r};
}

GeneratedGraph geometric_duplication(std::size_t n, std::size_t m, std::uint64_t seed, double geo_radius) {
  Rng rng(seed);
  const std::size_t initial = std::min<std::size_t>(5, n);
  auto pts = uniform_points(initial, rng);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  while (pts.size() < n) {
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    const Point parent = pts[pick(rng)];
    Point offset;
    do {
      for (auto& c : offset) c = box(rng);
    } while (offset[0] * offset[0] + offset[1] * offset[1] + offset[2] * offset[2] > 1.0);
    Point child;
    for (std::size_t d = 0; d < 3; ++d) child[d] = parent[d] + 2.0 * geo_radius * offset[d];
    pts.push_back(child);
  }
  const double threshold = radius_for_edges(pts, m);
  return {geometric_edges(pts, threshold, rng), m, std::nullopt, std::nullopt, geo_radius, 1, pts, threshold};
}

GeneratedGraph duplication_divergence_model(const GeneratorSpec& spec, std::size_t m) {
  SfgdCalibration cal;
  if (spec.sfgd_p && spec.sfgd_q)
    cal = {*spec.sfgd_p, *spec.sfgd_q};
  else
    cal = calibrate_sfgd(spec.n, m);

  constexpr int kMaxAttempts = 200;
  const double tolerance = 0.05 * static_cast<double>(m);
  std::optional<std::vector<Edge>> best;
  double best_error = INFINITY;
  int attempts = 0;
  for (int a = 0; a < kMaxAttempts; ++a) {
    ++attempts;
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(a)}));
    auto edges = duplication_divergence(spec.n, cal.p, cal.q, rng, 4 * m + 64);
    if (!edges) continue;
    const double error = std::abs(static_cast<double>(edges->size()) - static_cast<double>(m));
    if (error < best_error) {
      best_error = error;
      best = std::move(edges);
    }
    if (best_error <= tolerance) break;
  }
  GeneratedGraph out{best ? DirectedGraph::from_edges(spec.n, *best) : DirectedGraph::from_edges(spec.n, {}), m,
                     cal.p, cal.q, std::nullopt, attempts, {}, std::nullopt};
  if (best_error > tolerance) {
    std::ostringstream msg;
    msg << "sf-gd could not reach " << m << " edges within 5% (best " << out.graph.edge_count() << ")";
    throw UnreachableTarget(msg.str(), std::move(out));
  }
  return out;
}

}  // namespace

GeneratedGraph generate(const GeneratorSpec& spec) {
  if (spec.n < 5) throw std::invalid_argument("models need at least 5 nodes");
  if (!(spec.density > 0.0 && spec.density < 1.0)) throw std::invalid_argument("density must lie in (0, 1)");
  const std::size_t m = target_edge_count(spec.n, spec.density);

  switch (spec.model) {
    case Model::kEr: {
      Rng rng(spec.seed);
      return {erdos_renyi(spec.n, m, rng), m, std::nullopt, std::nullopt, std::nullopt, 1, {}, std::nullopt};
    }
    case Model::kSfbaSink: {
      Rng rng(spec.seed);
      return {preferential_sink(spec.n, m, rng), m, std::nullopt, std::nullopt, std::nullopt, 1, {}, std::nullopt};
    }
    case Model::kSfbaSource: {
      // Out-degree attachment is in-degree attachment on the reversed graph.
      Rng rng(spec.seed);
      return {preferential_sink(spec.n, m, rng).reversed(), m, std::nullopt, std::nullopt, std::nullopt, 1, {}, std::nullopt};
    }
    case Model::kSfGd: return duplication_divergence_model(spec, m);
    case Model::kGeo: return geometric(spec.n, m, spec.seed);
    case Model::kGeoGd: {
      double r = spec.geo_radius ? *spec.geo_radius : geometric(spec.n, m, derive_seed(spec.seed, {0x6e0})).radius.value();
      return geometric_duplication(spec.n, m, spec.seed, r);
    }
  }
  throw std::invalid_argument("unknown model");
}

std::vector<LabeledGraph> generate_suite(const SuiteSpec& spec) {
  struct Job {
    Model model;
    std::size_t n;
    double density;
    std::uint64_t seed;
    std::string name;
  };
  std::vector<Job> jobs;
  std::uint64_t cell = 0;
  for (Model model : spec.models)
    for (std::size_t n : spec.sizes)
      for (double density : spec.densities) {
        for (std::size_t r = 0; r < spec.per_cell; ++r) {
          std::ostringstream name;
          name << model_name(model) << "_n" << n << "_d" << density << "_r" << r;
          jobs.push_back({model, n, density, derive_seed(spec.seed, {cell, r}), name.str()});
        }
        ++cell;
      }

  std::vector<LabeledGraph> suite(jobs.size());
  parallel_for(jobs.size(), resolve_threads(spec.threads), [&](unsigned, std::size_t i) {
    const Job& job = jobs[i];
    GeneratorSpec g{job.model, job.n, job.density, job.seed, std::nullopt, std::nullopt, std::nullopt};
    suite[i] = {generate(g).graph, model_name(job.model), job.name};
  });
  return suite;
}

}  // namespace dgl
