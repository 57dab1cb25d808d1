#include "dgl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dgl/random.hpp"

namespace dgl {
namespace {

void build_csr(std::size_t n, const std::vector<Edge>& sorted_edges, bool by_source,
               std::vector<std::size_t>& offsets, std::vector<NodeId>& targets) {
  offsets.assign(n + 1, 0);
  for (const auto& [u, v] : sorted_edges) ++offsets[(by_source ? u : v) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  targets.resize(sorted_edges.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [u, v] : sorted_edges) {
    if (by_source)
      targets[cursor[u]++] = v;
    else
      targets[cursor[v]++] = u;
  }
  for (std::size_t i = 0; i < n; ++i)
    std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
              targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
}

std::uint64_t edge_key(NodeId u, NodeId v) { return (std::uint64_t{u} << 32) | v; }

}  // namespace

DirectedGraph DirectedGraph::from_edges(std::size_t n, std::span<const Edge> edges,
                                        std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != n)
    throw std::invalid_argument("label count does not match node count");
  std::vector<Edge> clean;
  clean.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.first >= n || e.second >= n) throw std::invalid_argument("edge endpoint out of range");
    if (e.first != e.second) clean.push_back(e);
  }
  std::sort(clean.begin(), clean.end());
  clean.erase(std::unique(clean.begin(), clean.end()), clean.end());

  DirectedGraph g;
  g.labels_ = std::move(labels);
  build_csr(n, clean, true, g.out_offsets_, g.out_targets_);
  build_csr(n, clean, false, g.in_offsets_, g.in_sources_);

  g.und_offsets_.assign(n + 1, 0);
  g.und_targets_.clear();
  g.und_targets_.reserve(2 * clean.size());
  for (NodeId u = 0; u < n; ++u) {
    auto out = g.out_neighbors(u);
    auto in = g.in_neighbors(u);
    std::set_union(out.begin(), out.end(), in.begin(), in.end(), std::back_inserter(g.und_targets_));
    g.und_offsets_[u + 1] = g.und_targets_.size();
  }
  return g;
}

std::span<const NodeId> DirectedGraph::out_neighbors(NodeId u) const {
  return {out_targets_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
}

std::span<const NodeId> DirectedGraph::in_neighbors(NodeId u) const {
  return {in_sources_.data() + in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]};
}

std::span<const NodeId> DirectedGraph::neighbors(NodeId u) const {
  return {und_targets_.data() + und_offsets_[u], und_offsets_[u + 1] - und_offsets_[u]};
}

bool DirectedGraph::has_edge(NodeId u, NodeId v) const {
  if (u >= node_count() || v >= node_count()) return false;
  auto out = out_neighbors(u);
  return std::binary_search(out.begin(), out.end(), v);
}

std::size_t DirectedGraph::reciprocal_pairs() const {
  std::size_t count = 0;
  for (NodeId u = 0; u < node_count(); ++u)
    for (NodeId v : out_neighbors(u))
      if (u < v && has_edge(v, u)) ++count;
  return count;
}

std::vector<Edge> DirectedGraph::edges() const {
  std::vector<Edge> result;
  result.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u)
    for (NodeId v : out_neighbors(u)) result.emplace_back(u, v);
  return result;
}

std::string DirectedGraph::label(NodeId u) const {
  return labels_.empty() ? std::to_string(u) : labels_[u];
}

DirectedGraph DirectedGraph::reversed() const {
  std::vector<Edge> rev;
  rev.reserve(edge_count());
  for (const auto& [u, v] : edges()) rev.emplace_back(v, u);
  return from_edges(node_count(), rev, labels_);
}

DirectedGraph read_edge_list(std::istream& in, LoadReport* report) {
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> seen;
  LoadReport local;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(name);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string src, dst, extra;
    if (!(fields >> src)) continue;
    if (!(fields >> dst) || (fields >> extra))
      throw InputError("malformed edge at line " + std::to_string(line_no) + ": expected \"src dst\"");
    NodeId u = intern(src);
    NodeId v = intern(dst);
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    if (!seen.insert(edge_key(u, v)).second) {
      ++local.duplicates_dropped;
      continue;
    }
    edges.emplace_back(u, v);
  }
  if (in.bad()) throw InputError("read error while parsing edge list");
  if (report) *report = local;
  std::size_t n = labels.size();
  return DirectedGraph::from_edges(n, edges, std::move(labels));
}

DirectedGraph load_edge_list(const std::filesystem::path& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open edge list: " + path.string());
  try {
    return read_edge_list(in, report);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_edge_list(const DirectedGraph& g, std::ostream& out) {
  for (const auto& [u, v] : g.edges()) out << g.label(u) << ' ' << g.label(v) << '\n';
}

void save_edge_list(const DirectedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write edge list: " + path.string());
  write_edge_list(g, out);
  if (!out) throw InputError("write failed: " + path.string());
}

DirectedGraph build_trade_network(std::span<const TradeRecord> records, double coverage) {
  if (records.empty()) throw std::invalid_argument("trade network needs at least one record");
  if (!(coverage > 0.0 && coverage <= 1.0)) throw std::invalid_argument("coverage must lie in (0, 1]");

  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(name);
    return it->second;
  };

  // Aggregate per ordered pair, remembering first appearance for tie-breaks.
  std::vector<std::pair<Edge, double>> pairs;
  std::unordered_map<std::uint64_t, std::size_t> pair_index;
  for (const auto& r : records) {
    if (!(r.value >= 0.0) || !std::isfinite(r.value))
      throw std::invalid_argument("trade values must be finite and non-negative");
    NodeId u = intern(r.exporter);
    NodeId v = intern(r.importer);
    if (u == v) continue;
    auto [it, inserted] = pair_index.try_emplace(edge_key(u, v), pairs.size());
    if (inserted)
      pairs.push_back({{u, v}, r.value});
    else
      pairs[it->second].second += r.value;
  }

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  double total = 0.0;
  for (const auto& p : pairs) total += p.second;

  std::vector<Edge> kept;
  double cumulative = 0.0;
  const double target = coverage * total;
  for (const auto& [edge, value] : pairs) {
    if (cumulative >= target && !kept.empty()) break;
    kept.push_back(edge);
    cumulative += value;
  }
  std::size_t n = labels.size();
  return DirectedGraph::from_edges(n, kept, std::move(labels));
}

DirectedGraph build_enzyme_network(std::span<const Reaction> reactions) {
  if (reactions.empty()) throw std::invalid_argument("enzyme network needs at least one reaction");
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<std::set<std::string>> products;
  std::map<std::string, std::vector<NodeId>> consumers;  // metabolite -> enzymes using it
  for (const auto& r : reactions) {
    auto [it, inserted] = ids.try_emplace(r.enzyme, static_cast<NodeId>(labels.size()));
    if (inserted) {
      labels.push_back(r.enzyme);
      products.emplace_back();
    }
    NodeId e = it->second;
    products[e].insert(r.products.begin(), r.products.end());
    for (const auto& s : r.substrates) consumers[s].push_back(e);
  }
  std::vector<Edge> edges;
  for (NodeId e = 0; e < labels.size(); ++e)
    for (const auto& metabolite : products[e])
      if (auto it = consumers.find(metabolite); it != consumers.end())
        for (NodeId target : it->second)
          if (target != e) edges.emplace_back(e, target);
  std::size_t n = labels.size();
  return DirectedGraph::from_edges(n, edges, std::move(labels));
}

PerturbationKind parse_perturbation_kind(const std::string& name) {
  if (name == "rewire") return PerturbationKind::kRewire;
  if (name == "remove") return PerturbationKind::kRemove;
  if (name == "swap") return PerturbationKind::kDegreeSwap;
  throw std::invalid_argument("unknown perturbation kind: " + name);
}

std::string perturbation_kind_name(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kRewire: return "rewire";
    case PerturbationKind::kRemove: return "remove";
    case PerturbationKind::kDegreeSwap: return "swap";
  }
  return "unknown";
}

DirectedGraph perturb(const DirectedGraph& g, const PerturbationSpec& spec) {
  if (!(spec.fraction >= 0.0 && spec.fraction <= 0.9 + 1e-12))
    throw std::invalid_argument("perturbation fraction must lie in [0, 0.9]");
  const std::size_t m = g.edge_count();
  const std::size_t n = g.node_count();
  // The small epsilon keeps products like 0.3 * 100 from flooring to 29.
  const auto k = static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(m) + 1e-9));
  if (k == 0) return g;

  Rng rng(spec.seed);
  std::vector<Edge> edges = g.edges();

  if (spec.kind == PerturbationKind::kDegreeSwap) {
    std::unordered_set<std::uint64_t> present;
    for (const auto& [u, v] : edges) present.insert(edge_key(u, v));
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::size_t done = 0, attempts = 0;
    while (done < k) {
      if (++attempts > 100 * m) throw std::runtime_error("degree-preserving swap infeasible");
      std::size_t i = pick(rng), j = pick(rng);
      auto [a, b] = edges[i];
      auto [c, d] = edges[j];
      if (i == j || a == d || c == b) continue;
      if (present.count(edge_key(a, d)) || present.count(edge_key(c, b))) continue;
      present.erase(edge_key(a, b));
      present.erase(edge_key(c, d));
      present.insert(edge_key(a, d));
      present.insert(edge_key(c, b));
      edges[i] = {a, d};
      edges[j] = {c, b};
      ++done;
    }
    return DirectedGraph::from_edges(n, edges, g.labels());
  }

  // Partial Fisher-Yates: the first k entries become the deleted sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(edges[i], edges[pick(rng)]);
  }
  std::vector<Edge> kept(edges.begin() + static_cast<std::ptrdiff_t>(k), edges.end());

  if (spec.kind == PerturbationKind::kRewire) {
    std::unordered_set<std::uint64_t> present;
    for (const auto& [u, v] : kept) present.insert(edge_key(u, v));
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    std::size_t added = 0, attempts = 0;
    while (added < k) {
      if (++attempts > 100 * m) throw std::runtime_error("rewiring infeasible: graph is nearly complete");
      NodeId u = node(rng), v = node(rng);
      if (u == v || !present.insert(edge_key(u, v)).second) continue;
      kept.emplace_back(u, v);
      ++added;
    }
  }
  return DirectedGraph::from_edges(n, kept, g.labels());
}

}  // namespace dgl
