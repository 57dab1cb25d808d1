#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "dgl/models.hpp"
#include "test_util.hpp"

using namespace dgl;
using testing::model_spec;

namespace {

std::size_t max_in_degree(const DirectedGraph& g) {
  std::size_t best = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) best = std::max(best, g.in_degree(u));
  return best;
}

std::size_t max_out_degree(const DirectedGraph& g) {
  std::size_t best = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) best = std::max(best, g.out_degree(u));
  return best;
}

double dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

void check_simple(const DirectedGraph& g) {
  auto e = g.edges();
  CHECK(std::adjacent_find(e.begin(), e.end()) == e.end());
  for (auto [u, v] : e) CHECK(u != v);
}

void check_geometry(const GeneratedGraph& gen) {
  REQUIRE(gen.threshold.has_value());
  REQUIRE(gen.points.size() == gen.graph.node_count());
  const double r = *gen.threshold;
  const auto& g = gen.graph;
  std::size_t close = 0;
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (NodeId v = u + 1; v < g.node_count(); ++v) {
      const int arcs = g.has_edge(u, v) + g.has_edge(v, u);
      if (dist(gen.points[u], gen.points[v]) <= r) {
        ++close;
        CHECK(arcs == 1);
      } else {
        CHECK(arcs == 0);
      }
    }
  CHECK(close == g.edge_count());
}

}  // namespace

TEST_CASE("target edge count") {
  CHECK(target_edge_count(500, 0.005) == 1248);
  CHECK(target_edge_count(1000, 0.01) == 9990);
  CHECK(target_edge_count(2000, 0.005) == 19990);
}

TEST_CASE("model names round trip") {
  CHECK(all_models().size() == 6);
  for (Model m : all_models()) CHECK(parse_model(model_name(m)) == m);
  CHECK_THROWS(parse_model("kronecker"));
}

TEST_CASE("ER is exact") {
  auto gen = generate(model_spec(Model::kEr, 500, 0.005, 1));
  CHECK(gen.graph.node_count() == 500);
  CHECK(gen.graph.edge_count() == 1248);
  check_simple(gen.graph);
  // Dense target goes through the complement branch.
  auto dense = generate(model_spec(Model::kEr, 40, 0.8, 2));
  CHECK(dense.graph.edge_count() == target_edge_count(40, 0.8));
  check_simple(dense.graph);
}

TEST_CASE("edge counts for every model") {
  for (Model m : all_models())
    for (double d : {0.005, 0.01}) {
      CAPTURE(model_name(m));
      CAPTURE(d);
      auto gen = generate(model_spec(m, 500, d, 17));
      const auto target = target_edge_count(500, d);
      CHECK(gen.target_edges == target);
      CHECK(gen.graph.node_count() == 500);
      check_simple(gen.graph);
      const double m_got = static_cast<double>(gen.graph.edge_count());
      if (m == Model::kSfGd) {
        CHECK(std::abs(m_got - static_cast<double>(target)) <= 0.05 * static_cast<double>(target));
        CHECK(gen.p.has_value());
        CHECK(gen.q.has_value());
      } else if (m == Model::kGeo || m == Model::kGeoGd) {
        CHECK(std::abs(m_got - static_cast<double>(target)) <= 0.02 * static_cast<double>(target));
      } else {
        CHECK(gen.graph.edge_count() == target);
      }
    }
}

TEST_CASE("fixed seed reproduces the graph") {
  for (Model m : all_models()) {
    CAPTURE(model_name(m));
    auto a = generate(model_spec(m, 300, 0.01, 5)), b = generate(model_spec(m, 300, 0.01, 5));
    CHECK(a.graph == b.graph);
    auto c = generate(model_spec(m, 300, 0.01, 6));
    CHECK_FALSE(a.graph == c.graph);
  }
}

TEST_CASE("preferential attachment produces hubs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto er = generate(model_spec(Model::kEr, 1000, 0.01, seed)).graph;
    auto sink = generate(model_spec(Model::kSfbaSink, 1000, 0.01, seed)).graph;
    auto source = generate(model_spec(Model::kSfbaSource, 1000, 0.01, seed)).graph;
    CHECK(max_in_degree(sink) > 2 * max_in_degree(er));
    CHECK(max_out_degree(source) > 2 * max_out_degree(er));
  }
}

TEST_CASE("SFBA source is the mirror of sink") {
  auto sink = generate(model_spec(Model::kSfbaSink, 400, 0.01, 9)).graph;
  auto source = generate(model_spec(Model::kSfbaSource, 400, 0.01, 9)).graph;
  CHECK(source == sink.reversed());
}

TEST_CASE("geometric models are consistent with their points") {
  SUBCASE("GEO") {
    auto gen = generate(model_spec(Model::kGeo, 500, 0.01, 3));
    check_geometry(gen);
    for (const auto& p : gen.points)
      for (double x : p) CHECK((x >= 0.0 && x <= 1.0));
  }
  SUBCASE("GEO-GD") {
    auto gen = generate(model_spec(Model::kGeoGd, 500, 0.01, 3));
    check_geometry(gen);
    CHECK(gen.radius.has_value());
  }
}

TEST_CASE("SF-GD with fixed probabilities skips calibration") {
  auto spec = model_spec(Model::kSfGd, 200, 0.02, 4);
  spec.sfgd_p = 0.5;
  spec.sfgd_q = 0.7;
  try {
    auto gen = generate(spec);
    CHECK(*gen.p == 0.5);
    CHECK(*gen.q == 0.7);
    check_simple(gen.graph);
  } catch (const UnreachableTarget& e) {
    CHECK(*e.best().p == 0.5);
    CHECK(e.best().graph.node_count() == 200);
  }
}

TEST_CASE("invalid specs") {
  CHECK_THROWS(generate(model_spec(Model::kEr, 4, 0.5, 0)));
  CHECK_THROWS(generate(model_spec(Model::kEr, 100, 0.0, 0)));
  CHECK_THROWS(generate(model_spec(Model::kEr, 100, 1.0, 0)));
}

TEST_CASE("suite layout") {
  SuiteSpec spec;
  spec.sizes = {200};
  spec.densities = {0.02};
  spec.per_cell = 2;
  spec.seed = 11;
  auto suite = generate_suite(spec);
  CHECK(suite.size() == 12);
  std::map<std::string, int> per_label;
  for (const auto& g : suite) ++per_label[g.label];
  CHECK(per_label.size() == 6);
  for (const auto& [label, count] : per_label) CHECK(count == 2);

  spec.sizes = {200, 300};
  spec.densities = {0.01, 0.02};
  spec.per_cell = 1;
  spec.threads = 1;
  auto serial = generate_suite(spec);
  CHECK(serial.size() == 24);
  spec.threads = 3;
  auto parallel = generate_suite(spec);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(parallel[i].name == serial[i].name);
    CHECK(parallel[i].label == serial[i].label);
    CHECK(parallel[i].graph == serial[i].graph);
  }
}
