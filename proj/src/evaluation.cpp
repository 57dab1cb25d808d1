#include "dgl/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "dgl/parallel.hpp"
#include "dgl/random.hpp"

namespace dgl {
namespace {

void check_labels(std::span<const std::string> labels, std::size_t items) {
  if (labels.size() != items) throw std::invalid_argument("label count does not match distance matrix");
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw std::invalid_argument("evaluation needs at least 2 labels");
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) area += (x[i] - x[i - 1]) * 0.5 * (y[i] + y[i - 1]);
  return area;
}

}  // namespace

EvaluationReport evaluate_distances(std::span<const std::string> labels, const PairDistances& distances,
                                    const std::string& measure) {
  const std::size_t n = distances.items();
  check_labels(labels, n);

  struct Scored {
    double distance;
    bool positive;
  };
  std::vector<Scored> scored;
  scored.reserve(distances.pair_count());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distances.at(i, j);
      if (!std::isfinite(d))
        throw std::invalid_argument(measure + " distance between items " + std::to_string(i) + " and " + std::to_string(j) +
                                    " is not finite");
      scored.push_back({d, labels[i] == labels[j]});
    }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.distance < b.distance; });

  EvaluationReport r;
  r.measure = measure;
  r.graphs = n;
  r.pairs = scored.size();
  r.positives = static_cast<std::size_t>(std::count_if(scored.begin(), scored.end(), [](const Scored& s) { return s.positive; }));
  const std::uint64_t pos = r.positives, neg = r.pairs - r.positives;

  auto point = [&](double eps, std::uint64_t tp, std::uint64_t fp) {
    SweepPoint p;
    p.epsilon = eps;
    p.tp = tp;
    p.fp = fp;
    p.fn = pos - tp;
    p.tn = neg - fp;
    p.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    p.recall = pos == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pos);
    p.fpr = neg == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(neg);
    return p;
  };

  // Walking the sorted pairs: at epsilon = the next distinct value, all pairs
  // strictly below it are declared similar.
  std::uint64_t tp = 0, fp = 0;
  if (scored.empty() || scored.front().distance > 0.0) r.sweep.push_back(point(0.0, 0, 0));
  for (std::size_t i = 0; i < scored.size();) {
    const double eps = scored[i].distance;
    r.sweep.push_back(point(eps, tp, fp));
    for (; i < scored.size() && scored[i].distance == eps; ++i) (scored[i].positive ? tp : fp) += 1;
  }
  const double top = scored.empty() ? 0.0 : scored.back().distance;
  r.sweep.push_back(point(top + 1.0, tp, fp));

  std::vector<double> recall, precision, fpr;
  for (const auto& p : r.sweep) {
    recall.push_back(p.recall);
    precision.push_back(p.precision);
    fpr.push_back(p.fpr);
  }
  r.aupr = std::clamp(trapezoid(recall, precision), 0.0, 1.0);
  r.auc = std::clamp(trapezoid(fpr, recall), 0.0, 1.0);
  return r;
}

double mann_whitney_auc(std::span<const std::string> labels, const PairDistances& distances) {
  const std::size_t n = distances.items();
  check_labels(labels, n);
  std::vector<std::pair<double, bool>> scored;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) scored.emplace_back(distances.at(i, j), labels[i] == labels[j]);
  std::sort(scored.begin(), scored.end());
  // Rank-sum form: U counts (positive, negative) pairs with the negative
  // ranked above, ties contributing one half.
  double rank_sum_negative = 0.0;
  double negatives = 0.0, positives = 0.0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (scored[k].second) {
        positives += 1.0;
      } else {
        negatives += 1.0;
        rank_sum_negative += rank;
      }
    }
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) return 0.0;
  const double u = rank_sum_negative - negatives * (negatives + 1.0) / 2.0;
  return u / (positives * negatives);
}

PairDistances all_pair_distances(Measure m, std::span<const GraphFeatures> features, const FeatureOptions& options) {
  PairDistances d(features.size());
  parallel_for(features.size(), resolve_threads(options.threads), [&](unsigned, std::size_t i) {
    for (std::size_t j = i + 1; j < features.size(); ++j) d.at(i, j) = feature_distance(m, features[i], features[j], options);
  });
  return d;
}

std::vector<GraphFeatures> compute_all_features(std::span<const DirectedGraph* const> graphs, std::span<const Measure> measures,
                                                const FeatureOptions& options) {
  std::vector<GraphFeatures> features(graphs.size());
  FeatureOptions inner = options;
  inner.threads = 1;  // parallelism is across graphs
  parallel_for(graphs.size(), resolve_threads(options.threads), [&](unsigned, std::size_t i) {
    features[i] = compute_features(*graphs[i], measures, inner);
  }, 1);
  return features;
}

std::vector<EvaluationReport> evaluate(std::span<const LabeledGraph> graphs, std::span<const Measure> measures,
                                       const FeatureOptions& options) {
  std::vector<const DirectedGraph*> ptrs;
  std::vector<std::string> labels;
  for (const auto& g : graphs) {
    ptrs.push_back(&g.graph);
    labels.push_back(g.label);
  }
  check_labels(labels, labels.size());
  auto features = compute_all_features(ptrs, measures, options);
  std::vector<EvaluationReport> reports;
  for (Measure m : measures)
    reports.push_back(evaluate_distances(labels, all_pair_distances(m, features, options), measure_name(m)));
  return reports;
}

EvaluationReport evaluate(std::span<const LabeledGraph> graphs, Measure measure, const FeatureOptions& options) {
  const Measure ms[] = {measure};
  return evaluate(graphs, ms, options).front();
}

std::map<std::string, std::vector<EvaluationReport>> evaluate_per_cell(std::span<const LabeledGraph> graphs,
                                                                       std::span<const std::string> cells,
                                                                       std::span<const Measure> measures,
                                                                       const FeatureOptions& options) {
  if (cells.size() != graphs.size()) throw std::invalid_argument("cell count does not match graph count");
  std::map<std::string, std::vector<LabeledGraph>> groups;
  for (std::size_t i = 0; i < graphs.size(); ++i) groups[cells[i]].push_back(graphs[i]);
  std::map<std::string, std::vector<EvaluationReport>> out;
  for (const auto& [cell, members] : groups) out[cell] = evaluate(members, measures, options);
  return out;
}

std::vector<RobustnessReport> robustness(std::span<const LabeledGraph> graphs, std::span<const Measure> measures,
                                         const RobustnessSpec& spec, const FeatureOptions& options) {
  if (spec.repeats < 1) throw std::invalid_argument("robustness needs at least one repeat");
  std::vector<RobustnessReport> reports(measures.size());
  for (std::size_t k = 0; k < measures.size(); ++k) {
    reports[k].measure = measure_name(measures[k]);
    reports[k].kind = perturbation_kind_name(spec.kind);
  }

  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    std::vector<std::vector<double>> aupr(measures.size()), auc(measures.size());
    for (std::size_t rep = 0; rep < spec.repeats; ++rep) {
      std::vector<LabeledGraph> noisy(graphs.size());
      parallel_for(graphs.size(), resolve_threads(options.threads), [&](unsigned, std::size_t i) {
        PerturbationSpec p{spec.kind, spec.levels[l], derive_seed(spec.seed, {l, rep, i})};
        noisy[i] = {perturb(graphs[i].graph, p), graphs[i].label, graphs[i].name};
      }, 1);
      auto rs = evaluate(noisy, measures, options);
      for (std::size_t k = 0; k < measures.size(); ++k) {
        aupr[k].push_back(rs[k].aupr);
        auc[k].push_back(rs[k].auc);
      }
    }
    for (std::size_t k = 0; k < measures.size(); ++k) {
      RobustnessLevel level;
      level.level = spec.levels[l];
      level.min = *std::min_element(aupr[k].begin(), aupr[k].end());
      level.max = *std::max_element(aupr[k].begin(), aupr[k].end());
      level.mean = std::accumulate(aupr[k].begin(), aupr[k].end(), 0.0) / static_cast<double>(aupr[k].size());
      level.mean_auc = std::accumulate(auc[k].begin(), auc[k].end(), 0.0) / static_cast<double>(auc[k].size());
      reports[k].levels.push_back(level);
    }
  }
  return reports;
}

nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& p : r.sweep)
    sweep.push_back({{"epsilon", p.epsilon}, {"tp", p.tp}, {"fp", p.fp}, {"tn", p.tn}, {"fn", p.fn},
                     {"precision", p.precision}, {"recall", p.recall}, {"fpr", p.fpr}});
  return {{"measure", r.measure}, {"graphs", r.graphs}, {"positives", r.positives}, {"pairs", r.pairs},
          {"aupr", r.aupr},       {"auc", r.auc},       {"sweep", sweep}};
}

EvaluationReport evaluation_report_from_json(const nlohmann::json& j) {
  EvaluationReport r;
  r.measure = j.at("measure").get<std::string>();
  r.graphs = j.at("graphs").get<std::size_t>();
  r.positives = j.at("positives").get<std::size_t>();
  r.pairs = j.at("pairs").get<std::size_t>();
  r.aupr = j.at("aupr").get<double>();
  r.auc = j.at("auc").get<double>();
  for (const auto& p : j.at("sweep")) {
    SweepPoint s;
    s.epsilon = p.at("epsilon").get<double>();
    s.tp = p.at("tp").get<std::uint64_t>();
    s.fp = p.at("fp").get<std::uint64_t>();
    s.tn = p.at("tn").get<std::uint64_t>();
    s.fn = p.at("fn").get<std::uint64_t>();
    s.precision = p.at("precision").get<double>();
    s.recall = p.at("recall").get<double>();
    s.fpr = p.at("fpr").get<double>();
    r.sweep.push_back(s);
  }
  return r;
}

nlohmann::json to_json(const RobustnessReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"level", l.level}, {"min", l.min}, {"mean", l.mean}, {"max", l.max}, {"mean_auc", l.mean_auc}});
  return {{"measure", r.measure}, {"kind", r.kind}, {"levels", levels}};
}

void write_curve_csv(std::ostream& out, std::span<const EvaluationReport> reports) {
  out << "measure,epsilon,tp,fp,tn,fn,precision,recall,fpr\n";
  const auto old = out.precision(17);
  for (const auto& r : reports)
    for (const auto& p : r.sweep)
      out << r.measure << ',' << p.epsilon << ',' << p.tp << ',' << p.fp << ',' << p.tn << ',' << p.fn << ',' << p.precision << ',' << p.recall
          << ',' << p.fpr << '\n';
  out.precision(old);
}

}  // namespace dgl
