#include "dgl/roles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

#include "dgl/parallel.hpp"
#include "dgl/random.hpp"

namespace dgl {

std::vector<std::string> default_role_names(std::size_t t) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < t; ++j) names.push_back("o" + std::to_string(j));
  return names;
}

namespace {

struct Standardized {
  Eigen::VectorXd mean, sd;
  std::vector<Eigen::Index> kept;
  Eigen::MatrixXd z;  // n x kept.size()
};

Standardized standardize(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  Standardized s;
  s.mean = m.colwise().mean().transpose();
  s.sd = Eigen::VectorXd::Zero(m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double var = (m.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean(c)))) {
      s.sd(c) = sd;
      s.kept.push_back(c);
    }
  }
  s.z.resize(n, static_cast<Eigen::Index>(s.kept.size()));
  for (std::size_t k = 0; k < s.kept.size(); ++k) {
    const Eigen::Index c = s.kept[k];
    s.z.col(static_cast<Eigen::Index>(k)) = (m.col(c).array() - s.mean(c)) / s.sd(c);
  }
  return s;
}

/// Rank-truncated thin SVD. Jacobi rather than BDCSVD: the latter returns
/// NaN on some sparse integer matrices in Eigen 3.4.
struct Decomposition {
  Eigen::MatrixXd u, v;
  Eigen::VectorXd s;
};

Decomposition decompose(const Eigen::MatrixXd& z) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index rank = 0;
  if (s.size() > 0) {
    const double tol = static_cast<double>(std::max(z.rows(), z.cols())) * std::numeric_limits<double>::epsilon() * s(0);
    while (rank < s.size() && s(rank) > tol) ++rank;
  }
  return {svd.matrixU().leftCols(rank), svd.matrixV().leftCols(rank), s.head(rank)};
}

struct Core {
  Eigen::MatrixXd w1, w2;  // over kept columns
  Eigen::VectorXd rho;
  Eigen::MatrixXd role_scores;  // n x r
};

/// CCA on whitened bases: with X = Ux Sx Vx' and Y = Uy Sy Vy', the canonical
/// directions are the singular vectors of Ux' Uy.
Core cca_core(const Eigen::MatrixXd& ux, const Decomposition& dx, const Decomposition& dy, const Eigen::MatrixXd& zy) {
  const double scale = std::sqrt(static_cast<double>(ux.rows() - 1));
  Eigen::MatrixXd c = ux.transpose() * dy.u;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index r = std::min(dx.s.size(), dy.s.size());
  Core core;
  core.rho = svd.singularValues().head(r).cwiseMax(0.0).cwiseMin(1.0);
  const Eigen::MatrixXd p = svd.matrixU().leftCols(r), q = svd.matrixV().leftCols(r);
  core.w1 = dx.v * dx.s.cwiseInverse().asDiagonal() * p * scale;
  core.w2 = dy.v * dy.s.cwiseInverse().asDiagonal() * q * scale;
  core.role_scores = ux * p * scale;
  // Orient each variate so that its attribute loadings sum to >= 0.
  const Eigen::MatrixXd attribute_scores = dy.u * q * scale;
  for (Eigen::Index j = 0; j < r; ++j) {
    if ((zy.transpose() * attribute_scores.col(j)).sum() < 0.0) {
      core.w1.col(j) *= -1.0;
      core.w2.col(j) *= -1.0;
      core.role_scores.col(j) *= -1.0;
    }
  }
  return core;
}

Eigen::MatrixXd expand_rows(const Eigen::MatrixXd& kept_rows, const std::vector<Eigen::Index>& kept, Eigen::Index total) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(total, kept_rows.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) full.row(kept[k]) = kept_rows.row(static_cast<Eigen::Index>(k));
  return full;
}

std::vector<std::string> dropped_names(const std::vector<std::string>& names, const Eigen::VectorXd& sd) {
  std::vector<std::string> out;
  for (Eigen::Index c = 0; c < sd.size(); ++c)
    if (sd(c) == 0.0) out.push_back(names[static_cast<std::size_t>(c)]);
  return out;
}

void check_dataset(const RoleDataset& data) {
  if (data.roles.rows() != data.attributes.rows()) throw std::invalid_argument("role and attribute row counts differ");
  if (data.roles.rows() < 3) throw std::invalid_argument("CCA needs at least 3 rows");
  if (data.roles.cols() == 0 || data.attributes.cols() == 0) throw std::invalid_argument("CCA needs non-empty matrices");
}

/// Prediction correlation per attribute column (all f columns, 0 for dropped).
Eigen::VectorXd prediction_quality(const Core& core, const Standardized& sy, Eigen::Index f) {
  const Eigen::MatrixXd predicted = core.role_scores * core.rho.asDiagonal() * pseudoinverse(core.w2);
  const Eigen::VectorXd kept_corr = column_correlations(predicted, sy.z);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f);
  for (std::size_t k = 0; k < sy.kept.size(); ++k) out(sy.kept[k]) = kept_corr(static_cast<Eigen::Index>(k));
  return out;
}

}  // namespace

CcaModel fit_cca(const RoleDataset& data) {
  check_dataset(data);
  const Eigen::Index n = data.roles.rows(), t = data.roles.cols(), f = data.attributes.cols();
  Standardized sx = standardize(data.roles), sy = standardize(data.attributes);
  if (sx.kept.empty() || sy.kept.empty()) throw std::invalid_argument("all role or attribute columns are constant");
  const Decomposition dx = decompose(sx.z), dy = decompose(sy.z);
  const Core core = cca_core(dx.u, dx, dy, sy.z);

  CcaModel m;
  m.role_names = data.role_names.empty() ? default_role_names(static_cast<std::size_t>(t)) : data.role_names;
  m.attribute_names = data.attribute_names;
  if (m.attribute_names.empty())
    for (Eigen::Index j = 0; j < f; ++j) m.attribute_names.push_back("a" + std::to_string(j));
  if (static_cast<Eigen::Index>(m.role_names.size()) != t || static_cast<Eigen::Index>(m.attribute_names.size()) != f)
    throw std::invalid_argument("column name count does not match matrix width");
  m.role_mean = sx.mean;
  m.role_sd = sx.sd;
  m.attribute_mean = sy.mean;
  m.attribute_sd = sy.sd;
  m.dropped_roles = dropped_names(m.role_names, sx.sd);
  m.dropped_attributes = dropped_names(m.attribute_names, sy.sd);
  m.rho = core.rho;
  m.w1 = expand_rows(core.w1, sx.kept, t);
  m.w2 = expand_rows(core.w2, sy.kept, f);
  const double denom = static_cast<double>(n - 1);
  const Eigen::MatrixXd attribute_scores = sy.z * core.w2;
  m.role_loadings = expand_rows((sx.z.transpose() * core.role_scores / denom).cwiseMax(-1.0).cwiseMin(1.0), sx.kept, t);
  m.attribute_loadings = expand_rows((sy.z.transpose() * attribute_scores / denom).cwiseMax(-1.0).cwiseMin(1.0), sy.kept, f);
  m.samples = static_cast<std::size_t>(n);
  m.association = association_matrix(m);
  return m;
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::MatrixXd::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() * s(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd association_matrix(const CcaModel& model) {
  return model.w1 * model.rho.asDiagonal() * pseudoinverse(model.w2);
}

Eigen::MatrixXd predict(const CcaModel& model, const Eigen::MatrixXd& roles) {
  if (roles.cols() != model.w1.rows()) throw std::invalid_argument("role column count does not match the model");
  Eigen::MatrixXd z(roles.rows(), roles.cols());
  for (Eigen::Index c = 0; c < roles.cols(); ++c) {
    if (model.role_sd(c) == 0.0)
      z.col(c).setZero();
    else
      z.col(c) = (roles.col(c).array() - model.role_mean(c)) / model.role_sd(c);
  }
  Eigen::MatrixXd out = z * model.association;
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    out.col(c) = out.col(c).array() * model.attribute_sd(c) + model.attribute_mean(c);
  return out;
}

Eigen::VectorXd column_correlations(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("matrix shapes differ");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const Eigen::VectorXd x = a.col(c).array() - a.col(c).mean();
    const Eigen::VectorXd y = b.col(c).array() - b.col(c).mean();
    const double nx = x.norm(), ny = y.norm();
    // Relative test so that round-off noise around a constant column reads as constant.
    const double sx = a.col(c).cwiseAbs().maxCoeff(), sy = b.col(c).cwiseAbs().maxCoeff();
    const double floor = 1e-12 * std::sqrt(static_cast<double>(a.rows()));
    if (nx <= floor * std::max(1.0, sx) || ny <= floor * std::max(1.0, sy)) continue;
    out(c) = std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
  }
  return out;
}

std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double q) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::size_t cutoff = 0;  // number of rejections
  for (std::size_t k = m; k >= 1; --k) {
    if (p_values[order[k - 1]] <= q * static_cast<double>(k) / static_cast<double>(m)) {
      cutoff = k;
      break;
    }
  }
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < cutoff; ++k) reject[order[k]] = true;
  return reject;
}

SignificanceResult permutation_significance(const RoleDataset& data, const PermutationOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("permutation test needs at least one trial");
  check_dataset(data);
  const Eigen::Index n = data.roles.rows(), f = data.attributes.cols();
  Standardized sx = standardize(data.roles), sy = standardize(data.attributes);
  if (sx.kept.empty() || sy.kept.empty()) throw std::invalid_argument("all role or attribute columns are constant");
  const Decomposition dx = decompose(sx.z), dy = decompose(sy.z);
  // Shuffling role rows permutes the rows of the left singular vectors and
  // leaves the rest of the decomposition unchanged.
  const Eigen::VectorXd observed = prediction_quality(cca_core(dx.u, dx, dy, sy.z), sy, f);

  std::vector<std::vector<std::size_t>> exceed(options.trials);
  parallel_for(options.trials, resolve_threads(options.threads), [&](unsigned, std::size_t trial) {
    Rng rng(derive_seed(options.seed, {trial}));
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd ux(n, dx.u.cols());
    for (Eigen::Index i = 0; i < n; ++i) ux.row(i) = dx.u.row(perm[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd null = prediction_quality(cca_core(ux, dx, dy, sy.z), sy, f);
    for (Eigen::Index c = 0; c < f; ++c)
      if (null(c) >= observed(c)) exceed[trial].push_back(static_cast<std::size_t>(c));
  });

  SignificanceResult out;
  out.trials = options.trials;
  out.attributes = data.attribute_names;
  if (out.attributes.empty())
    for (Eigen::Index j = 0; j < f; ++j) out.attributes.push_back("a" + std::to_string(j));
  std::vector<std::size_t> counts(static_cast<std::size_t>(f), 0);
  for (const auto& e : exceed)
    for (std::size_t c : e) ++counts[c];
  for (Eigen::Index c = 0; c < f; ++c) {
    out.observed.push_back(observed(c));
    out.p_values.push_back(static_cast<double>(1 + counts[static_cast<std::size_t>(c)]) /
                           static_cast<double>(1 + options.trials));
  }
  out.significant = benjamini_hochberg(out.p_values, options.fdr);
  return out;
}

BrokerageScores brokerage_scores(const CcaModel& model, const Eigen::MatrixXd& roles, const RoleOrbitSets& sets,
                                 ScoreWeights weights) {
  if (model.variates() == 0) throw std::invalid_argument("model has no canonical variates");
  if (roles.cols() != model.w1.rows()) throw std::invalid_argument("role column count does not match the model");
  const Eigen::MatrixXd& source = weights == ScoreWeights::kWeights ? model.w1 : model.role_loadings;

  auto column_of = [&](int orbit) {
    const std::string name = "o" + std::to_string(orbit);
    auto it = std::find(model.role_names.begin(), model.role_names.end(), name);
    if (it == model.role_names.end()) throw std::invalid_argument("model has no column for orbit " + std::to_string(orbit));
    return static_cast<Eigen::Index>(it - model.role_names.begin());
  };
  auto score = [&](const std::vector<int>& orbits) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(roles.rows());
    for (int orbit : orbits) {
      const Eigen::Index c = column_of(orbit);
      if (model.role_sd(c) == 0.0) continue;
      s += source(c, 0) * ((roles.col(c).array() - model.role_mean(c)) / model.role_sd(c)).matrix();
    }
    return s;
  };
  return {score(sets.broker()), score(sets.peripheral()), score(sets.broker_import), score(sets.broker_export)};
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows) throw std::invalid_argument("matrix row count mismatch in model");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("matrix column count mismatch in model");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd json_vector(const nlohmann::json& j, Eigen::Index size) {
  auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != size) throw std::invalid_argument("vector length mismatch in model");
  return Eigen::Map<Eigen::VectorXd>(v.data(), size);
}

}  // namespace

nlohmann::json to_json(const CcaModel& m) {
  return {{"role_names", m.role_names},
          {"attribute_names", m.attribute_names},
          {"dropped_roles", m.dropped_roles},
          {"dropped_attributes", m.dropped_attributes},
          {"samples", m.samples},
          {"role_mean", to_vector(m.role_mean)},
          {"role_sd", to_vector(m.role_sd)},
          {"attribute_mean", to_vector(m.attribute_mean)},
          {"attribute_sd", to_vector(m.attribute_sd)},
          {"rho", to_vector(m.rho)},
          {"w1", matrix_json(m.w1)},
          {"w2", matrix_json(m.w2)},
          {"role_loadings", matrix_json(m.role_loadings)},
          {"attribute_loadings", matrix_json(m.attribute_loadings)},
          {"association", matrix_json(m.association)}};
}

CcaModel cca_model_from_json(const nlohmann::json& j) {
  CcaModel m;
  m.role_names = j.at("role_names").get<std::vector<std::string>>();
  m.attribute_names = j.at("attribute_names").get<std::vector<std::string>>();
  m.dropped_roles = j.at("dropped_roles").get<std::vector<std::string>>();
  m.dropped_attributes = j.at("dropped_attributes").get<std::vector<std::string>>();
  m.samples = j.at("samples").get<std::size_t>();
  const auto t = static_cast<Eigen::Index>(m.role_names.size());
  const auto f = static_cast<Eigen::Index>(m.attribute_names.size());
  const auto r = static_cast<Eigen::Index>(j.at("rho").size());
  m.role_mean = json_vector(j.at("role_mean"), t);
  m.role_sd = json_vector(j.at("role_sd"), t);
  m.attribute_mean = json_vector(j.at("attribute_mean"), f);
  m.attribute_sd = json_vector(j.at("attribute_sd"), f);
  m.rho = json_vector(j.at("rho"), r);
  m.w1 = json_matrix(j.at("w1"), t, r);
  m.w2 = json_matrix(j.at("w2"), f, r);
  m.role_loadings = json_matrix(j.at("role_loadings"), t, r);
  m.attribute_loadings = json_matrix(j.at("attribute_loadings"), f, r);
  m.association = json_matrix(j.at("association"), t, f);
  return m;
}

}  // namespace dgl
