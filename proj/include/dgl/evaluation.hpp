#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgl/distances.hpp"
#include "dgl/graph.hpp"
#include "dgl/models.hpp"

namespace dgl {

/// Condensed upper triangle of a symmetric distance matrix, row-major over
/// pairs (i, j) with i < j.
class PairDistances {
 public:
  PairDistances() = default;
  explicit PairDistances(std::size_t items) : items_(items), values_(items * (items - (items ? 1 : 0)) / 2, 0.0) {}

  std::size_t items() const { return items_; }
  std::size_t pair_count() const { return values_.size(); }
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * items_ - i * (i + 1) / 2 + (j - i - 1);
  }
  double at(std::size_t i, std::size_t j) const { return values_[index(i, j)]; }
  double& at(std::size_t i, std::size_t j) { return values_[index(i, j)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  std::size_t items_ = 0;
  std::vector<double> values_;
};

struct SweepPoint {
  double epsilon = 0.0;
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 1.0, recall = 0.0, fpr = 0.0;

  bool operator==(const SweepPoint&) const = default;
};

struct EvaluationReport {
  std::string measure;
  std::size_t graphs = 0;
  std::size_t positives = 0;  // same-label pairs
  std::size_t pairs = 0;
  std::vector<SweepPoint> sweep;  // ascending epsilon
  double aupr = 0.0;
  double auc = 0.0;

  bool operator==(const EvaluationReport&) const = default;
};

/// A pair is declared similar when its distance is strictly below epsilon.
/// The grid is 0, every observed distance, and max + 1.
EvaluationReport evaluate_distances(std::span<const std::string> labels, const PairDistances& distances,
                                    const std::string& measure);

/// Probability that a same-label pair scores below a cross-label pair, ties
/// counting one half. Equals the ROC area of `evaluate_distances`.
double mann_whitney_auc(std::span<const std::string> labels, const PairDistances& distances);

PairDistances all_pair_distances(Measure m, std::span<const GraphFeatures> features, const FeatureOptions& options = {});

std::vector<GraphFeatures> compute_all_features(std::span<const DirectedGraph* const> graphs, std::span<const Measure> measures,
                                                const FeatureOptions& options = {});

/// Evaluates every requested measure on one pooled sweep over all graphs.
std::vector<EvaluationReport> evaluate(std::span<const LabeledGraph> graphs, std::span<const Measure> measures,
                                       const FeatureOptions& options = {});
EvaluationReport evaluate(std::span<const LabeledGraph> graphs, Measure measure, const FeatureOptions& options = {});

/// Separate sweeps per cell key (for example "n500_d0.005"); graphs[i] belongs
/// to cells[i].
std::map<std::string, std::vector<EvaluationReport>> evaluate_per_cell(std::span<const LabeledGraph> graphs,
                                                                       std::span<const std::string> cells,
                                                                       std::span<const Measure> measures,
                                                                       const FeatureOptions& options = {});

struct RobustnessSpec {
  PerturbationKind kind = PerturbationKind::kRewire;
  std::vector<double> levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t repeats = 30;
  std::uint64_t seed = 0;
};

struct RobustnessLevel {
  double level = 0.0;
  double min = 0.0, mean = 0.0, max = 0.0;  // AUPR over repeats
  double mean_auc = 0.0;
};

struct RobustnessReport {
  std::string measure;
  std::string kind;
  std::vector<RobustnessLevel> levels;
};

/// Each repeat perturbs every graph independently and re-evaluates all
/// measures on the perturbed suite.
std::vector<RobustnessReport> robustness(std::span<const LabeledGraph> graphs, std::span<const Measure> measures,
                                         const RobustnessSpec& spec, const FeatureOptions& options = {});

nlohmann::json to_json(const EvaluationReport& r);
EvaluationReport evaluation_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RobustnessReport& r);

/// Columns: measure,epsilon,tp,fp,tn,fn,precision,recall,fpr.
void write_curve_csv(std::ostream& out, std::span<const EvaluationReport> reports);

}  // namespace dgl
