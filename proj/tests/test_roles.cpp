#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dgl/catalog.hpp"
#include "dgl/roles.hpp"

using namespace dgl;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

Eigen::MatrixXd standardized(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m.rowwise() - m.colwise().mean();
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) /= std::sqrt(out.col(j).squaredNorm() / static_cast<double>(m.rows() - 1));
  return out;
}

double rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

RoleDataset dataset(Eigen::MatrixXd roles, Eigen::MatrixXd attributes) {
  RoleDataset d;
  d.roles = std::move(roles);
  d.attributes = std::move(attributes);
  return d;
}

void check_model_invariants(const CcaModel& m, const RoleDataset& data) {
  for (Eigen::Index k = 0; k < m.rho.size(); ++k) {
    CHECK(m.rho(k) >= 0.0);
    CHECK(m.rho(k) <= 1.0);
    if (k > 0) CHECK(m.rho(k) <= m.rho(k - 1));
  }
  CHECK(m.role_loadings.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  CHECK(m.attribute_loadings.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  // Canonical scores are uncorrelated within each side.
  auto scores = [](const Eigen::MatrixXd& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& sd, const Eigen::MatrixXd& w) {
    Eigen::MatrixXd z = x.rowwise() - mean.transpose();
    for (Eigen::Index j = 0; j < z.cols(); ++j) z.col(j) = sd(j) > 0 ? Eigen::VectorXd(z.col(j) / sd(j)) : Eigen::VectorXd::Zero(z.rows());
    return Eigen::MatrixXd(z * w);
  };
  for (const auto& u : {scores(data.roles, m.role_mean, m.role_sd, m.w1), scores(data.attributes, m.attribute_mean, m.attribute_sd, m.w2)}) {
    Eigen::MatrixXd c = standardized(u);
    Eigen::MatrixXd corr = c.transpose() * c / static_cast<double>(u.rows() - 1);
    for (Eigen::Index i = 0; i < corr.rows(); ++i)
      for (Eigen::Index j = 0; j < corr.cols(); ++j)
        if (i != j) CHECK(std::abs(corr(i, j)) <= 1e-8);
  }
}

}  // namespace

TEST_CASE("identity map") {
  auto x = gaussian(300, 6, 1);
  auto data = dataset(x, x);
  auto m = fit_cca(data);
  REQUIRE(m.variates() == 6);
  for (Eigen::Index k = 0; k < 6; ++k) CHECK(std::abs(m.rho(k) - 1.0) <= 1e-6);
  CHECK((m.association - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-5);
  check_model_invariants(m, data);
}

TEST_CASE("linear map is recovered") {
  auto x = gaussian(500, 20, 2);
  auto mix = gaussian(20, 5, 3);
  Eigen::MatrixXd y = x * mix;
  auto data = dataset(x, y);
  auto m = fit_cca(data);
  REQUIRE(m.variates() == 5);
  for (Eigen::Index k = 0; k < 5; ++k) CHECK(std::abs(m.rho(k) - 1.0) <= 1e-6);
  CHECK(rmse(predict(m, x), y) <= 1e-6);
  CHECK(rmse(standardized(x) * m.association, standardized(y)) <= 1e-6);
  CHECK((association_matrix(m) - m.association).cwiseAbs().maxCoeff() <= 1e-12);
  check_model_invariants(m, data);
}

TEST_CASE("independent data stays below the permutation 95th percentile") {
  auto x = gaussian(1000, 10, 4);
  auto y = gaussian(1000, 3, 5);
  const double observed = fit_cca(dataset(x, y)).rho(0);
  std::mt19937_64 rng(6);
  std::vector<double> null;
  std::vector<Eigen::Index> perm(1000);
  std::iota(perm.begin(), perm.end(), 0);
  for (int t = 0; t < 200; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    null.push_back(fit_cca(dataset(x(perm, Eigen::all), y)).rho(0));
  }
  std::sort(null.begin(), null.end());
  CHECK(observed < null[189]);
  CHECK(observed < 0.2);
}

TEST_CASE("scale invariance") {
  auto x = gaussian(400, 8, 7);
  Eigen::MatrixXd y = x.leftCols(3) * gaussian(3, 3, 8) + 0.5 * gaussian(400, 3, 9);
  auto base = fit_cca(dataset(x, y));
  Eigen::MatrixXd scaled = y;
  scaled.col(1) *= 1234.5;
  scaled.col(2) *= 0.001;
  auto other = fit_cca(dataset(x, scaled));
  CHECK((base.rho - other.rho).cwiseAbs().maxCoeff() <= 1e-8);
  auto c1 = column_correlations(predict(base, x), y);
  auto c2 = column_correlations(predict(other, x), scaled);
  CHECK((c1 - c2).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("zero correlations give a zero association matrix") {
  CcaModel m;
  m.w1 = gaussian(4, 2, 10);
  m.w2 = gaussian(3, 2, 11);
  m.rho = Eigen::VectorXd::Zero(2);
  CHECK(association_matrix(m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pseudoinverse") {
  auto a = gaussian(6, 4, 12);
  auto p = pseudoinverse(a);
  CHECK((a * p * a - a).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((p * a - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::MatrixXd rank1 = a.col(0) * a.col(0).transpose();
  auto q = pseudoinverse(rank1);
  CHECK((rank1 * q * rank1 - rank1).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("prediction at the training means") {
  auto x = gaussian(200, 5, 13);
  Eigen::MatrixXd y = x * gaussian(5, 2, 14) + gaussian(200, 2, 15);
  y.array() += 40.0;
  auto m = fit_cca(dataset(x, y));
  Eigen::MatrixXd row = x.colwise().mean();
  Eigen::RowVectorXd expected = y.colwise().mean();
  CHECK((predict(m, row).row(0) - expected).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS(predict(m, Eigen::MatrixXd::Zero(1, 4)));
}

TEST_CASE("constant columns are dropped and kept as zero rows") {
  auto x = gaussian(100, 4, 16);
  x.col(2).setConstant(3.0);
  auto y = gaussian(100, 2, 17);
  y.col(1) = x.col(0) + x.col(1);
  RoleDataset d = dataset(x, y);
  d.role_names = {"a", "b", "c", "d"};
  d.attribute_names = {"u", "v"};
  auto m = fit_cca(d);
  CHECK(m.dropped_roles == std::vector<std::string>{"c"});
  CHECK(m.role_sd(2) == 0.0);
  CHECK(m.w1.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.association.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.w1.rows() == 4);

  x.setConstant(1.0);
  CHECK_THROWS_AS(fit_cca(dataset(x, y)), std::invalid_argument);
  CHECK_THROWS_AS(fit_cca(dataset(gaussian(2, 2, 1), gaussian(2, 2, 2))), std::invalid_argument);
}

TEST_CASE("Benjamini-Hochberg") {
  // Thresholds k/4 * 0.05 = 0.0125, 0.025, 0.0375, 0.05; 0.04 misses the third.
  std::vector<double> p{0.01, 0.02, 0.04, 0.9};
  CHECK(benjamini_hochberg(p, 0.05) == std::vector<bool>{true, true, false, false});
  std::vector<double> shuffled{0.9, 0.04, 0.01, 0.02};
  CHECK(benjamini_hochberg(shuffled, 0.05) == std::vector<bool>{false, false, true, true});
  std::vector<double> relaxed{0.01, 0.02, 0.04, 0.9};
  CHECK(benjamini_hochberg(relaxed, 0.06) == std::vector<bool>{true, true, true, false});
  // Step-up: 0.02 misses the rank-1 threshold (0.05/3) but 0.03 passes at rank 2.
  std::vector<double> step{0.03, 0.02, 0.5};
  CHECK(benjamini_hochberg(step, 0.05) == std::vector<bool>{true, true, false});
  std::vector<double> step2{0.045, 0.04, 0.048};
  CHECK(benjamini_hochberg(step2, 0.05) == std::vector<bool>{true, true, true});
  std::vector<double> none{0.2, 0.3};
  CHECK(benjamini_hochberg(none, 0.05) == std::vector<bool>{false, false});
}

TEST_CASE("permutation significance") {
  int exact_hits = 0, noise_quiet = 0;
  const int runs = 20;
  for (int run = 0; run < runs; ++run) {
    auto x = gaussian(150, 6, 100 + static_cast<std::uint64_t>(run));
    Eigen::MatrixXd y(150, 2);
    y.col(0) = x.col(3);
    y.col(1) = gaussian(150, 1, 500 + static_cast<std::uint64_t>(run));
    PermutationOptions opt;
    opt.trials = 99;
    opt.seed = static_cast<std::uint64_t>(run);
    auto r = permutation_significance(dataset(x, y), opt);
    REQUIRE(r.p_values.size() == 2);
    CHECK(r.trials == 99);
    exact_hits += r.p_values[0] == 1.0 / 100.0;
    noise_quiet += !r.significant[1];
    CHECK(r.significant[0]);
  }
  CHECK(exact_hits >= 20);  // at least 99% of 20 runs
  CHECK(noise_quiet >= 18);

  auto x = gaussian(60, 3, 1);
  PermutationOptions opt;
  opt.trials = 30;
  opt.seed = 3;
  opt.threads = 1;
  auto a = permutation_significance(dataset(x, gaussian(60, 2, 2)), opt);
  opt.threads = 4;
  auto b = permutation_significance(dataset(x, gaussian(60, 2, 2)), opt);
  CHECK(a.p_values == b.p_values);
  opt.trials = 0;
  CHECK_THROWS(permutation_significance(dataset(x, gaussian(60, 2, 2)), opt));
}

TEST_CASE("brokerage scores") {
  const auto& cat = GraphletCatalog::instance();
  auto sets = cat.role_orbit_sets();
  const Eigen::Index n = 2000, t = cat.orbit_count();
  Eigen::MatrixXd roles = gaussian(n, t, 20).array().abs() * 5.0;
  // Entity 0 dominates every broker orbit.
  for (int o : sets.broker()) roles(0, o) = 60.0;
  Eigen::MatrixXd attributes(n, 1);
  attributes.col(0).setZero();
  for (int o : sets.broker()) attributes.col(0) += roles.col(o);
  attributes.col(0) += 0.5 * gaussian(n, 1, 21);
  RoleDataset data = dataset(roles, attributes);
  data.role_names = default_role_names(static_cast<std::size_t>(t));
  auto m = fit_cca(data);
  auto s = brokerage_scores(m, roles, sets);

  CHECK(((s.brokerage_import + s.brokerage_export) - s.brokerage).cwiseAbs().maxCoeff() <= 1e-9);
  Eigen::Index best = -1;
  s.brokerage.maxCoeff(&best);
  CHECK(best == 0);

  // Closed form for a row with zeros on the broker orbits.
  Eigen::MatrixXd row = roles.colwise().mean();
  for (int o : sets.broker()) row(0, o) = 0.0;
  double expected = 0;
  for (int o : sets.broker()) expected += m.w1(o, 0) * (-m.role_mean(o) / m.role_sd(o));
  CHECK(brokerage_scores(m, row, sets).brokerage(0) == doctest::Approx(expected).epsilon(1e-12));

  auto by_loadings = brokerage_scores(m, roles, sets, ScoreWeights::kLoadings);
  CHECK(by_loadings.brokerage.size() == n);

  RoleDataset unnamed = dataset(roles.leftCols(5), attributes);
  unnamed.role_names = {"a", "b", "c", "d", "e"};
  CHECK_THROWS(brokerage_scores(fit_cca(unnamed), roles.leftCols(5), sets));
}

TEST_CASE("model JSON round trip") {
  auto x = gaussian(80, 4, 30);
  x.col(1).setConstant(2.0);
  Eigen::MatrixXd y = x * gaussian(4, 2, 31) + gaussian(80, 2, 32);
  auto m = fit_cca(dataset(x, y));
  auto back = cca_model_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(back.role_names == m.role_names);
  CHECK(back.attribute_names == m.attribute_names);
  CHECK(back.dropped_roles == m.dropped_roles);
  CHECK(back.samples == m.samples);
  CHECK(back.rho == m.rho);
  CHECK(back.w1 == m.w1);
  CHECK(back.w2 == m.w2);
  CHECK(back.association == m.association);
  CHECK(back.role_sd == m.role_sd);
  CHECK(predict(back, x) == predict(m, x));
}
