#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "dgl/catalog.hpp"
#include "dgl/counting.hpp"
#include "dgl/distances.hpp"
#include "dgl/enrichment.hpp"
#include "dgl/evaluation.hpp"
#include "dgl/graph.hpp"
#include "dgl/models.hpp"
#include "dgl/parallel.hpp"
#include "dgl/roles.hpp"
#include "dgl/table_io.hpp"

#ifndef DGL_VERSION
#define DGL_VERSION "0.0.0"
#endif

namespace dgl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

json graph_metadata(const DirectedGraph& g) {
  return {{"n", g.node_count()}, {"m", g.edge_count()}, {"reciprocal_pairs", g.reciprocal_pairs()}};
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

/// Options shared by every subcommand plus the bookkeeping for the manifest.
struct Session {
  Session(std::ostream& o, std::shared_ptr<spdlog::logger> l) : out(o), log(std::move(l)) {}

  std::ostream& out;
  std::shared_ptr<spdlog::logger> log;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  CLI::App* command = nullptr;
  std::vector<fs::path> inputs, outputs;
  json extra = json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  DirectedGraph load_graph(const fs::path& path) {
    LoadReport report;
    DirectedGraph g = load_edge_list(path, &report);
    inputs.push_back(path);
    if (report.self_loops_dropped) log->warn("{}: dropped {} self-loops", path.string(), report.self_loops_dropped);
    if (report.duplicates_dropped) log->warn("{}: dropped {} duplicate edges", path.string(), report.duplicates_dropped);
    return g;
  }

  std::ifstream input(const fs::path& path) {
    inputs.push_back(path);
    return open_input(path);
  }

  std::ofstream output(const fs::path& path) {
    outputs.push_back(path);
    return open_output(path);
  }

  /// <primary>.manifest.json next to the first output.
  void write_manifest() {
    if (outputs.empty()) return;
    json options = json::object();
    for (const CLI::Option* opt : command->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
      const auto& results = opt->results();
      std::string name = opt->get_single_name();
      if (opt->get_expected_max() == 0)
        options[name] = opt->count() > 0;
      else if (results.empty())
        options[name] = opt->get_default_str();
      else if (results.size() == 1)
        options[name] = results.front();
      else
        options[name] = results;
    }
    json digests = json::object();
    for (const auto& p : inputs) digests[p.string()] = fnv1a_file(p);
    json outs = json::array();
    for (const auto& p : outputs) outs.push_back(p.string());
    json m = {{"subcommand", command->get_name()},
              {"options", options},
              {"seed", seed},
              {"threads", resolve_threads(threads)},
              {"inputs", digests},
              {"outputs", outs},
              {"tool_version", DGL_VERSION},
              {"wall_clock_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    fs::path path = outputs.front();
    path += ".manifest.json";
    write_json(path, m);
  }
};

struct ManifestEntry {
  fs::path path;
  std::string label, cell;
};

/// Lines "path<TAB or comma>label[<sep>cell]"; relative paths resolve against
/// the manifest's directory.
std::vector<ManifestEntry> read_suite_manifest(Session& s, const fs::path& path) {
  auto in = s.input(path);
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == '\t') c = ',';
    auto fields = split_csv_line(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
      throw InputError(path.string() + ": line " + std::to_string(line_no) + ": expected \"path label [cell]\"");
    fs::path p = fields[0];
    if (p.is_relative()) p = path.parent_path() / p;
    entries.push_back({p, fields[1], fields.size() == 3 ? fields[2] : std::string()});
  }
  if (entries.empty()) throw InputError(path.string() + ": manifest lists no graphs");
  return entries;
}

std::vector<Measure> resolve_measures(const std::vector<std::string>& names) {
  std::vector<Measure> out;
  for (const auto& n : names) {
    if (n == "all") return all_measures();
    out.push_back(parse_measure(n));
  }
  return out;
}

std::string catalog_markdown(const GraphletCatalog& cat) {
  std::ostringstream md;
  md << "# Directed graphlet and orbit table\n\n"
     << "Generated by `dgl catalog --format markdown`. Graphlets are ordered by (size, edge count, canonical code); "
     << "orbits by (graphlet, smallest canonical position). Edges use canonical positions.\n\n"
     << "| graphlet | size | edges | orbit per position |\n|---|---|---|---|\n";
  for (const auto& g : cat.graphlets()) {
    md << "| G" << g.id << " | " << g.size << " | ";
    for (std::size_t e = 0; e < g.edges.size(); ++e) md << (e ? ", " : "") << g.edges[e].first << "&rarr;" << g.edges[e].second;
    md << " | ";
    for (int p = 0; p < g.size; ++p) md << (p ? ", " : "") << g.orbit_of_position[static_cast<std::size_t>(p)];
    md << " |\n";
  }
  const auto sets = cat.role_orbit_sets();
  auto list = [](const std::vector<int>& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
    return s.str();
  };
  md << "\n## Triangle-plus-pendant role sets\n\n"
     << "| set | orbits |\n|---|---|\n"
     << "| peripheral import (edge points at the pendant) | " << list(sets.peripheral_import) << " |\n"
     << "| peripheral export (edge leaves the pendant) | " << list(sets.peripheral_export) << " |\n"
     << "| broker import | " << list(sets.broker_import) << " |\n"
     << "| broker export | " << list(sets.broker_export) << " |\n"
     << "| core, not broker | " << list(sets.core_nonbroker) << " |\n";
  return md.str();
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : split_csv_line(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(f, &used));
      if (used != f.size()) throw std::invalid_argument(f);
    } catch (const std::exception&) {
      throw CLI::ValidationError("not a number list: " + s);
    }
  }
  return out;
}

/// Rows of `table` reordered to `names`; throws when a column is missing.
Eigen::MatrixXd select_columns(const NumericTable& table, const std::vector<std::string>& names, const std::string& what) {
  Eigen::MatrixXd out(table.values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto it = std::find(table.columns.begin(), table.columns.end(), names[j]);
    if (it == table.columns.end()) throw InputError(what + " lacks column " + names[j]);
    out.col(static_cast<Eigen::Index>(j)) = table.values.col(static_cast<Eigen::Index>(it - table.columns.begin()));
  }
  return out;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Directed graphlet toolkit", "dgl"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("dgl", sink);
  log->set_pattern("[%l] %v");
  Session s(out, log);
  std::string level = "warn";
  app.add_option("--threads", s.threads, "Worker threads (0: $DGL_THREADS or all cores)");
  app.add_option("--log-level", level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_option("--seed", s.seed, "Random seed");

  std::function<void()> action;
  auto command = [&](const std::string& name, const std::string& help) {
    return app.add_subcommand(name, help);
  };

  // catalog
  std::string catalog_format = "csv";
  std::string catalog_out;
  {
    auto* c = command("catalog", "Print the graphlet/orbit table");
    c->add_subcommand("dump", "Same as plain catalog");
    c->add_option("--format", catalog_format)->check(CLI::IsMember({"csv", "markdown"}));
    c->add_option("--out", catalog_out, "Output file (default stdout)");
    c->final_callback([&] {
      action = [&] {
        const auto& cat = GraphletCatalog::instance();
        const std::string text = catalog_format == "csv" ? cat.to_csv() : catalog_markdown(cat);
        if (catalog_out.empty()) {
          s.out << text;
        } else {
          auto f = s.output(catalog_out);
          f << text;
        }
      };
    });
  }

  // count
  std::string count_in, count_out, count_freq, count_meta;
  {
    auto* c = command("count", "Per-node orbit counts");
    c->add_option("--in", count_in, "Edge list")->required();
    c->add_option("--out", count_out, "Signature CSV")->required();
    c->add_option("--frequencies", count_freq, "Graphlet frequency CSV");
    c->add_option("--meta", count_meta, "Graph metadata JSON");
    c->final_callback([&] {
      action = [&] {
        DirectedGraph g = s.load_graph(count_in);
        Census census = count_census(g, {s.threads});
        {
          auto f = s.output(count_out);
          write_signatures_csv(f, census.signatures, g);
        }
        if (!count_freq.empty()) {
          auto f = s.output(count_freq);
          f << "graphlet,count\n";
          for (std::size_t i = 0; i < census.frequencies.size(); ++i) f << i << ',' << census.frequencies[i] << '\n';
        }
        if (!count_meta.empty()) {
          s.outputs.push_back(count_meta);
          write_json(count_meta, graph_metadata(g));
        }
        s.extra["graph"] = graph_metadata(g);
      };
    });
  }

  // gcm
  std::string gcm_in, gcm_out;
  int gcm_orbits = 13;
  {
    auto* c = command("gcm", "Graphlet correlation matrix as CSV");
    c->add_option("--in", gcm_in, "Edge list")->required();
    c->add_option("--out", gcm_out, "Output CSV")->required();
    c->add_option("--orbits", gcm_orbits, "13 or 129")->check(CLI::IsMember({13, 129}));
    c->final_callback([&] {
      action = [&] {
        DirectedGraph g = s.load_graph(gcm_in);
        auto m = dgcm(count_signatures(g, {s.threads}), gcm_orbits == 13 ? OrbitSet::kSmall : OrbitSet::kAll);
        std::vector<std::string> names;
        for (int o : m.orbit_ids) names.push_back("o" + std::to_string(o));
        auto f = s.output(gcm_out);
        write_numeric_table(f, "orbit", names, names, m.values);
        s.extra["graph"] = graph_metadata(g);
      };
    });
  }

  // dist
  std::string dist_a, dist_b, dist_measure, dist_out, dist_node_a, dist_node_b;
  bool dist_log = false, dist_geometric = false;
  {
    auto* c = command("dist", "Distance between two networks");
    c->add_option("--a", dist_a, "First edge list")->required();
    c->add_option("--b", dist_b, "Second edge list")->required();
    c->add_option("--measure", dist_measure, "drgf, dgdda, dgcd13, dgcd129, dgdvs, indeg, outdeg or spectral")
        ->required()
        ->check(CLI::IsMember({"drgf", "dgdda", "dgcd13", "dgcd129", "dgdvs", "indeg", "outdeg", "spectral"}));
    c->add_option("--node-a", dist_node_a, "dgdvs: node label in the first graph");
    c->add_option("--node-b", dist_node_b, "dgdvs: node label in the second graph");
    c->add_flag("--log", dist_log, "drgf: compare -log frequencies");
    c->add_flag("--geometric", dist_geometric, "dgdda: geometric mean over orbits");
    c->add_option("--out", dist_out, "JSON report (default stdout)");
    c->final_callback([&] {
      action = [&] {
        DirectedGraph a = s.load_graph(dist_a), b = s.load_graph(dist_b);
        FeatureOptions opts;
        opts.threads = s.threads;
        opts.drgf.log_scale = dist_log;
        opts.dgdda_mean = dist_geometric ? AgreementMean::kGeometric : AgreementMean::kArithmetic;
        json report = {{"measure", dist_measure}, {"a", dist_a}, {"b", dist_b}};
        if (dist_measure == "dgdvs") {
          if (dist_node_a.empty() || dist_node_b.empty()) throw CLI::ValidationError("dgdvs needs --node-a and --node-b");
          auto find = [](const DirectedGraph& g, const std::string& label) {
            for (NodeId v = 0; v < g.node_count(); ++v)
              if (g.label(v) == label) return v;
            throw InputError("node not found: " + label);
          };
          const NodeId u = find(a, dist_node_a), v = find(b, dist_node_b);
          auto sa = count_signatures(a, {s.threads}), sb = count_signatures(b, {s.threads});
          report["value"] = dgdvs(sa.row(u), sb.row(v));
          report["kind"] = "similarity";
          report["node_a"] = dist_node_a;
          report["node_b"] = dist_node_b;
        } else {
          const Measure m = parse_measure(dist_measure);
          double v = network_distance(m, a, b, opts);
          if (m == Measure::kDgdda) {
            report["value"] = 1.0 - v;
            report["kind"] = "agreement";
          } else {
            report["value"] = v;
            report["kind"] = "distance";
          }
          report["options"] = {{"log", dist_log}, {"geometric", dist_geometric}};
        }
        if (dist_out.empty()) {
          s.out << report.dump(2) << '\n';
        } else {
          s.outputs.push_back(dist_out);
          write_json(dist_out, report);
        }
      };
    });
  }

  // generate
  std::string gen_model = "er", gen_out, gen_out_dir, gen_sizes = "500,1000,2000", gen_densities = "0.005,0.01";
  std::size_t gen_n = 500, gen_per_cell = 10;
  double gen_density = 0.005;
  std::optional<double> gen_p, gen_q, gen_radius;
  bool gen_suite = false;
  std::vector<std::string> gen_models;
  {
    auto* c = command("generate", "Random network models");
    c->add_option("--model", gen_model)->check(CLI::IsMember({"er", "sfba-sink", "sfba-source", "sf-gd", "geo", "geo-gd"}));
    c->add_option("--n", gen_n)->check(CLI::Range(std::size_t{5}, std::size_t{10000000}));
    c->add_option("--density", gen_density)->check(CLI::Range(1e-12, 1.0 - 1e-12));
    c->add_option("--p", gen_p, "sf-gd link probability (skips calibration with --q)")->check(CLI::Range(0.0, 1.0));
    c->add_option("--q", gen_q, "sf-gd inherited-edge deletion probability")->check(CLI::Range(0.0, 1.0));
    c->add_option("--radius", gen_radius, "geo-gd offset radius");
    c->add_option("--out", gen_out, "Edge list (single graph)");
    c->add_flag("--suite", gen_suite, "Generate models x sizes x densities x per-cell graphs");
    c->add_option("--out-dir", gen_out_dir, "Suite directory (edge lists plus suite.tsv)");
    c->add_option("--sizes", gen_sizes, "Suite sizes, comma separated");
    c->add_option("--densities", gen_densities, "Suite densities, comma separated");
    c->add_option("--per-cell", gen_per_cell, "Suite graphs per (model, size, density)");
    c->add_option("--models", gen_models, "Suite models (default all)")->delimiter(',');
    c->final_callback([&] {
      if (gen_suite ? gen_out_dir.empty() : gen_out.empty())
        throw CLI::ValidationError(gen_suite ? "--suite needs --out-dir" : "generate needs --out");
      action = [&] {
        if (!gen_suite) {
          GeneratorSpec spec{parse_model(gen_model), gen_n, gen_density, s.seed, gen_p, gen_q, gen_radius};
          GeneratedGraph g;
          try {
            g = generate(spec);
          } catch (const UnreachableTarget& e) {
            s.log->error("{}", e.what());
            throw;
          }
          s.outputs.push_back(gen_out);
          save_edge_list(g.graph, gen_out);
          json prov = {{"model", gen_model}, {"seed", s.seed}, {"target_m", g.target_edges}, {"achieved_m", g.graph.edge_count()},
                       {"attempts", g.attempts}};
          if (g.p) prov["p"] = *g.p;
          if (g.q) prov["q"] = *g.q;
          if (g.radius) prov["radius"] = *g.radius;
          s.extra["provenance"] = prov;
          s.extra["graph"] = graph_metadata(g.graph);
          return;
        }
        SuiteSpec spec;
        spec.seed = s.seed;
        spec.threads = s.threads;
        spec.per_cell = gen_per_cell;
        spec.sizes.clear();
        for (double v : parse_double_list(gen_sizes)) spec.sizes.push_back(static_cast<std::size_t>(v));
        spec.densities = parse_double_list(gen_densities);
        if (!gen_models.empty()) {
          spec.models.clear();
          for (const auto& m : gen_models) spec.models.push_back(parse_model(m));
        }
        auto suite = generate_suite(spec);
        fs::create_directories(gen_out_dir);
        const fs::path manifest = fs::path(gen_out_dir) / "suite.tsv";
        auto tsv = s.output(manifest);
        for (const auto& g : suite) {
          const std::string file = g.name + ".el";
          save_edge_list(g.graph, fs::path(gen_out_dir) / file);
          // The cell key drops the model and replicate parts of the name.
          const auto first = g.name.find("_n"), last = g.name.rfind("_r");
          tsv << file << '\t' << g.label << '\t' << g.name.substr(first + 1, last - first - 1) << '\n';
        }
        s.extra["graphs"] = suite.size();
      };
    });
  }

  // eval
  std::string eval_manifest, eval_out, eval_curve;
  std::vector<std::string> eval_measures{"dgcd13"};
  bool eval_per_cell = false;
  {
    auto* c = command("eval", "Precision-recall and ROC evaluation over a labeled suite");
    c->add_option("--manifest", eval_manifest, "Lines \"path label [cell]\"")->required();
    c->add_option("--measure", eval_measures, "Measures, or all")->delimiter(',');
    c->add_option("--out", eval_out, "JSON report")->required();
    c->add_option("--curve", eval_curve, "Curve CSV");
    c->add_flag("--per-cell", eval_per_cell, "Also evaluate each cell separately");
    c->final_callback([&] {
      action = [&] {
        auto entries = read_suite_manifest(s, eval_manifest);
        std::vector<LabeledGraph> graphs;
        std::vector<std::string> cells;
        for (const auto& e : entries) {
          graphs.push_back({s.load_graph(e.path), e.label, e.path.stem().string()});
          cells.push_back(e.cell);
        }
        const auto measures = resolve_measures(eval_measures);
        FeatureOptions opts;
        opts.threads = s.threads;
        auto reports = evaluate(graphs, measures, opts);
        json j = {{"reports", json::array()}};
        for (const auto& r : reports) j["reports"].push_back(to_json(r));
        if (eval_per_cell) {
          j["cells"] = json::object();
          for (const auto& [cell, rs] : evaluate_per_cell(graphs, cells, measures, opts)) {
            j["cells"][cell] = json::array();
            for (const auto& r : rs) j["cells"][cell].push_back(to_json(r));
          }
        }
        s.outputs.push_back(eval_out);
        write_json(eval_out, j);
        if (!eval_curve.empty()) {
          auto f = s.output(eval_curve);
          write_curve_csv(f, reports);
        }
      };
    });
  }

  // robustness
  std::string rob_manifest, rob_out, rob_kind = "rewire", rob_levels = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::vector<std::string> rob_measures{"all"};
  std::size_t rob_repeats = 30;
  {
    auto* c = command("robustness", "AUPR under random rewiring or edge removal");
    c->add_option("--manifest", rob_manifest)->required();
    c->add_option("--measure", rob_measures, "Measures, or all")->delimiter(',');
    c->add_option("--kind", rob_kind)->check(CLI::IsMember({"rewire", "remove", "swap"}));
    c->add_option("--levels", rob_levels, "Fractions, comma separated");
    c->add_option("--repeats", rob_repeats)->check(CLI::PositiveNumber);
    c->add_option("--out", rob_out, "JSON report")->required();
    c->final_callback([&] {
      action = [&] {
        auto entries = read_suite_manifest(s, rob_manifest);
        std::vector<LabeledGraph> graphs;
        for (const auto& e : entries) graphs.push_back({s.load_graph(e.path), e.label, e.path.stem().string()});
        RobustnessSpec spec;
        spec.kind = parse_perturbation_kind(rob_kind);
        spec.levels = parse_double_list(rob_levels);
        spec.repeats = rob_repeats;
        spec.seed = s.seed;
        FeatureOptions opts;
        opts.threads = s.threads;
        json j = {{"reports", json::array()}};
        for (const auto& r : robustness(graphs, resolve_measures(rob_measures), spec, opts)) j["reports"].push_back(to_json(r));
        s.outputs.push_back(rob_out);
        write_json(rob_out, j);
      };
    });
  }

  // cca
  std::string cca_roles, cca_attrs, cca_out, cca_pred, cca_sig;
  std::size_t cca_trials = 1000;
  double cca_fdr = 0.05;
  {
    auto* c = command("cca", "Fit the canonical correlation model of roles against attributes");
    c->add_option("--roles", cca_roles, "Signature CSV")->required();
    c->add_option("--attributes", cca_attrs, "Attribute CSV keyed by entity")->required();
    c->add_option("--out", cca_out, "Model JSON")->required();
    c->add_option("--predictions", cca_pred, "Predicted attributes CSV");
    c->add_option("--significance", cca_sig, "Permutation significance CSV");
    c->add_option("--trials", cca_trials)->check(CLI::PositiveNumber);
    c->add_option("--fdr", cca_fdr)->check(CLI::Range(0.0, 1.0));
    c->final_callback([&] {
      action = [&] {
        NumericTable roles, attrs;
        {
          auto in = s.input(cca_roles);
          roles = read_numeric_table(in);
        }
        {
          auto in = s.input(cca_attrs);
          attrs = read_numeric_table(in);
        }
        if (!attrs.dropped.empty()) s.log->warn("dropped {} attribute rows with missing values", attrs.dropped.size());
        std::map<std::string, Eigen::Index> attr_row;
        for (std::size_t i = 0; i < attrs.ids.size(); ++i) attr_row.emplace(attrs.ids[i], static_cast<Eigen::Index>(i));
        std::vector<Eigen::Index> role_rows, attr_rows;
        std::vector<std::string> entities;
        for (std::size_t i = 0; i < roles.ids.size(); ++i)
          if (auto it = attr_row.find(roles.ids[i]); it != attr_row.end()) {
            role_rows.push_back(static_cast<Eigen::Index>(i));
            attr_rows.push_back(it->second);
            entities.push_back(roles.ids[i]);
          }
        const std::size_t unmatched = roles.ids.size() - entities.size();
        if (unmatched) s.log->warn("{} role rows have no attributes and were skipped", unmatched);
        RoleDataset data;
        data.roles = roles.values(role_rows, Eigen::all);
        data.attributes = attrs.values(attr_rows, Eigen::all);
        data.role_names = roles.columns;
        data.attribute_names = attrs.columns;
        data.entities = entities;
        CcaModel model = fit_cca(data);
        for (const auto& d : model.dropped_roles) s.log->info("constant role column dropped: {}", d);
        for (const auto& d : model.dropped_attributes) s.log->warn("constant attribute dropped: {}", d);
        const Eigen::MatrixXd predicted = predict(model, data.roles);
        const Eigen::VectorXd quality = column_correlations(predicted, data.attributes);
        json j = to_json(model);
        j["prediction_correlations"] = std::vector<double>(quality.data(), quality.data() + quality.size());
        s.outputs.push_back(cca_out);
        write_json(cca_out, j);
        if (!cca_pred.empty()) {
          auto f = s.output(cca_pred);
          write_numeric_table(f, "entity", entities, model.attribute_names, predicted);
        }
        if (!cca_sig.empty()) {
          auto sig = permutation_significance(data, {cca_trials, s.seed, cca_fdr, s.threads});
          auto f = s.output(cca_sig);
          f << "attribute,observed,p,significant\n" << std::setprecision(17);
          for (std::size_t i = 0; i < sig.attributes.size(); ++i)
            f << sig.attributes[i] << ',' << sig.observed[i] << ',' << sig.p_values[i] << ',' << (sig.significant[i] ? 1 : 0)
              << '\n';
        }
        s.extra["rows"] = entities.size();
        s.extra["skipped_rows"] = unmatched + attrs.dropped.size();
      };
    });
  }

  // score
  std::string score_model, score_roles, score_out;
  bool score_loadings = false;
  {
    auto* c = command("score", "Brokerage and peripheral scores from a fitted model");
    c->add_option("--model", score_model, "Model JSON from cca")->required();
    c->add_option("--roles", score_roles, "Signature CSV")->required();
    c->add_option("--out", score_out, "Scores CSV")->required();
    c->add_flag("--loadings", score_loadings, "Weight orbits by first-variate loadings instead of weights");
    c->final_callback([&] {
      action = [&] {
        s.inputs.push_back(score_model);
        CcaModel model;
        try {
          model = cca_model_from_json(read_json(score_model));
        } catch (const json::exception& e) {
          throw InputError(score_model + ": " + e.what());
        }
        NumericTable roles;
        {
          auto in = s.input(score_roles);
          roles = read_numeric_table(in);
        }
        const Eigen::MatrixXd x = select_columns(roles, model.role_names, score_roles);
        auto scores = brokerage_scores(model, x, GraphletCatalog::instance().role_orbit_sets(),
                                       score_loadings ? ScoreWeights::kLoadings : ScoreWeights::kWeights);
        Eigen::MatrixXd table(x.rows(), 4);
        table << scores.brokerage, scores.peripheral, scores.brokerage_import, scores.brokerage_export;
        auto f = s.output(score_out);
        write_numeric_table(f, "entity", roles.ids, {"brokerage", "peripheral", "brokerage_import", "brokerage_export"}, table);
      };
    });
  }

  // enrich
  std::string en_clustering, en_annotations, en_out, en_signatures, en_clustering_out;
  std::size_t en_clusters = 0;
  double en_alpha = 0.01;
  bool en_fdr = false;
  {
    auto* c = command("enrich", "Hypergeometric term enrichment of clusters");
    c->add_option("--clustering", en_clustering, "CSV \"entity,cluster\"");
    c->add_option("--signatures", en_signatures, "Signature CSV to cluster by average linkage on 1 - DGDVS");
    c->add_option("--clusters", en_clusters, "Cluster count for --signatures");
    c->add_option("--clustering-out", en_clustering_out, "Write the computed clustering");
    c->add_option("--annotations", en_annotations, "CSV \"entity,<term>...\" of 0/1")->required();
    c->add_option("--alpha", en_alpha)->check(CLI::Range(0.0, 1.0));
    c->add_flag("--fdr", en_fdr, "Benjamini-Hochberg at alpha instead of raw p <= alpha");
    c->add_option("--out", en_out, "Enrichment CSV")->required();
    c->final_callback([&] {
      if (en_clustering.empty() == en_signatures.empty())
        throw CLI::ValidationError("give exactly one of --clustering and --signatures");
      if (!en_signatures.empty() && en_clusters == 0) throw CLI::ValidationError("--signatures needs --clusters");
      action = [&] {
        Clustering clustering;
        if (!en_clustering.empty()) {
          auto in = s.input(en_clustering);
          clustering = read_clustering(in);
        } else {
          NumericTable sig;
          {
            auto in = s.input(en_signatures);
            sig = read_numeric_table(in);
          }
          SignatureMatrix m(static_cast<std::size_t>(sig.values.rows()), static_cast<std::size_t>(sig.values.cols()));
          for (Eigen::Index i = 0; i < sig.values.rows(); ++i)
            for (Eigen::Index j = 0; j < sig.values.cols(); ++j) {
              const double v = sig.values(i, j);
              if (v < 0 || v != std::floor(v)) throw InputError(en_signatures + ": counts must be non-negative integers");
              m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = static_cast<std::uint64_t>(v);
            }
          if (en_clusters > m.node_count()) throw CLI::ValidationError("--clusters exceeds the number of entities");
          auto ids = average_linkage(dgdvs_distances(m, {}, s.threads), en_clusters);
          for (std::size_t i = 0; i < ids.size(); ++i) clustering[sig.ids[i]] = "c" + std::to_string(ids[i]);
          if (!en_clustering_out.empty()) {
            auto f = s.output(en_clustering_out);
            write_clustering(f, clustering);
          }
        }
        AnnotationTable annotations;
        {
          auto in = s.input(en_annotations);
          annotations = read_annotations(in);
        }
        auto rows = enrich(clustering, annotations, {en_alpha, en_fdr});
        auto f = s.output(en_out);
        // The primary output goes first so the manifest lands next to it.
        std::rotate(s.outputs.rbegin(), s.outputs.rbegin() + 1, s.outputs.rend());
        write_enrichment(f, rows);
        s.extra["enriched"] = std::count_if(rows.begin(), rows.end(), [](const EnrichmentRow& r) { return r.enriched; });
      };
    });
  }

  // build-wtn
  std::string wtn_trade, wtn_out;
  double wtn_coverage = 0.9;
  {
    auto* c = command("build-wtn", "Trade network from exporter,importer,value records");
    c->add_option("--trade", wtn_trade, "Trade CSV")->required();
    c->add_option("--coverage", wtn_coverage, "Fraction of total value kept")->check(CLI::Range(1e-12, 1.0));
    c->add_option("--out", wtn_out, "Edge list")->required();
    c->final_callback([&] {
      action = [&] {
        std::vector<TradeRecord> records;
        {
          auto in = s.input(wtn_trade);
          records = read_trade_records(in);
        }
        if (records.empty()) throw InputError(wtn_trade + ": no trade records");
        DirectedGraph g = build_trade_network(records, wtn_coverage);
        s.outputs.push_back(wtn_out);
        save_edge_list(g, wtn_out);
        s.extra["graph"] = graph_metadata(g);
      };
    });
  }

  // build-metabolic
  std::string met_reactions, met_out;
  {
    auto* c = command("build-metabolic", "Enzyme network from enzyme,substrates,products records");
    c->add_option("--reactions", met_reactions, "Reaction CSV")->required();
    c->add_option("--out", met_out, "Edge list")->required();
    c->final_callback([&] {
      action = [&] {
        std::vector<Reaction> reactions;
        {
          auto in = s.input(met_reactions);
          reactions = read_reactions(in);
        }
        if (reactions.empty()) throw InputError(met_reactions + ": no reactions");
        DirectedGraph g = build_enzyme_network(reactions);
        s.outputs.push_back(met_out);
        save_edge_list(g, met_out);
        s.extra["graph"] = graph_metadata(g);
      };
    });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return 1;
  }

  log->set_level(spdlog::level::from_str(level));
  s.command = app.get_subcommands().front();
  try {
    action();
    s.write_manifest();
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    log->error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return 2;
  }
  return 0;
}

}  // namespace dgl::cli
