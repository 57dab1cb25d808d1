#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dgl/catalog.hpp"

namespace dgl {

/// Rows are entities in the same order on both sides.
struct RoleDataset {
  Eigen::MatrixXd roles;       // n x t orbit degrees
  Eigen::MatrixXd attributes;  // n x f
  std::vector<std::string> role_names, attribute_names, entities;
};

/// Role columns named "o<k>" are orbit k; empty name lists default to that.
std::vector<std::string> default_role_names(std::size_t t);

/// Canonical correlation model fitted on column-standardized data. Columns
/// with zero variance are kept in every matrix as zero rows and listed in
/// `dropped_*`. The number of variates r is min(rank(roles), rank(attributes)).
struct CcaModel {
  std::vector<std::string> role_names, attribute_names;
  std::vector<std::string> dropped_roles, dropped_attributes;
  Eigen::VectorXd role_mean, role_sd, attribute_mean, attribute_sd;  // sd 0 marks a dropped column
  Eigen::MatrixXd w1;  // t x r, scores Z_roles * w1 have unit variance
  Eigen::MatrixXd w2;  // f x r
  Eigen::VectorXd rho;  // descending, in [0, 1]
  Eigen::MatrixXd role_loadings, attribute_loadings;  // t x r, f x r
  Eigen::MatrixXd association;  // t x f, maps standardized roles to standardized attributes
  std::size_t samples = 0;

  std::size_t variates() const { return static_cast<std::size_t>(rho.size()); }
};

CcaModel fit_cca(const RoleDataset& data);

/// Moore-Penrose inverse via SVD; singular values at or below
/// max(rows, cols) * eps * largest are treated as zero.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m);

/// w1 * diag(rho) * pinv(w2).
Eigen::MatrixXd association_matrix(const CcaModel& model);

/// Predicts attributes in original units for rows of orbit degrees.
Eigen::MatrixXd predict(const CcaModel& model, const Eigen::MatrixXd& roles);

/// Pearson correlation per column; 0 when either column is constant.
Eigen::VectorXd column_correlations(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Benjamini-Hochberg step-up decisions at false discovery rate q.
std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double q);

struct PermutationOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double fdr = 0.05;
  unsigned threads = 0;
};

struct SignificanceResult {
  std::vector<std::string> attributes;
  std::vector<double> observed;  // in-sample prediction correlation
  std::vector<double> p_values;  // (1 + #null >= observed) / (1 + trials)
  std::vector<bool> significant;  // after Benjamini-Hochberg
  std::size_t trials = 0;
};

/// Null distribution from refitting on row-shuffled role matrices. Trial i
/// shuffles with its own stream derived from (seed, i).
SignificanceResult permutation_significance(const RoleDataset& data, const PermutationOptions& options = {});

enum class ScoreWeights {
  kWeights,   // first-variate canonical weights
  kLoadings,  // first-variate role loadings
};

struct BrokerageScores {
  Eigen::VectorXd brokerage, peripheral, brokerage_import, brokerage_export;
};

/// First-variate weighted sums of standardized orbit degrees over the broker
/// and peripheral orbit sets.
BrokerageScores brokerage_scores(const CcaModel& model, const Eigen::MatrixXd& roles, const RoleOrbitSets& sets,
                                 ScoreWeights weights = ScoreWeights::kWeights);

nlohmann::json to_json(const CcaModel& model);
CcaModel cca_model_from_json(const nlohmann::json& j);

}  // namespace dgl
