#include <gtest/gtest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "sci/classifier.hpp"
#include "sci/errors.hpp"
#include "sci/experiments.hpp"
#include "sci/rng.hpp"

using namespace sci;

namespace {

ScoredSet make_set(std::initializer_list<double> s, std::initializer_list<int> y) {
  Eigen::VectorXd scores(static_cast<Eigen::Index>(s.size()));
  Eigen::VectorXi labels(static_cast<Eigen::Index>(y.size()));
  Eigen::Index i = 0;
  for (double v : s) scores[i++] = v;
  i = 0;
  for (int v : y) labels[i++] = v;
  return ScoredSet("t", scores, labels);
}

}  // namespace

TEST(RocAuc, PerfectAndTied) {
  EXPECT_EQ(roc_auc(make_set({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1})), 1.0);
  EXPECT_EQ(roc_auc(make_set({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1})), 0.5);
  EXPECT_EQ(roc_auc(make_set({0.1, 0.5, 0.5, 0.9}, {0, 1, 0, 1})), 0.875);
  EXPECT_THROW(roc_auc(make_set({0.1, 0.2}, {1, 1})), DomainError);
}

TEST(RocAuc, IndependentLabelsNearHalf) {
  Stream rng(3);
  Eigen::VectorXd s(20000);
  Eigen::VectorXi y(20000);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s[i] = rng.normal();
    y[i] = rng.uniform() < 0.5;
  }
  EXPECT_NEAR(roc_auc(ScoredSet("noise", s, y)), 0.5, 0.02);
}

TEST(RocCurve, RunsCornerToCorner) {
  const auto curve = roc_curve(make_set({0.1, 0.5, 0.5, 0.9}, {0, 1, 0, 1}));
  ASSERT_GE(curve.size(), 2u);
  EXPECT_EQ(curve.front().tpr, 0.0);
  EXPECT_EQ(curve.front().fpr, 0.0);
  EXPECT_EQ(curve.back().tpr, 1.0);
  EXPECT_EQ(curve.back().fpr, 1.0);
  EXPECT_EQ(curve.size(), 4u);  // three unique scores, ties grouped
}

TEST(Youden, SeparatedPicksGapMidpoint) {
  const auto op = youden_threshold(make_set({0.1, 0.2, 0.6, 0.9}, {0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(op.tau, 0.4);
  EXPECT_EQ(op.tpr, 1.0);
  EXPECT_EQ(op.fpr, 0.0);
}

TEST(Youden, TiesGoToLargerThreshold) {
  // Cuts at 0.15 and 0.35 both give J = 0.5.
  const auto op = youden_threshold(make_set({0.1, 0.2, 0.3, 0.4}, {0, 1, 0, 1}));
  EXPECT_DOUBLE_EQ(op.tau, 0.35);
}

TEST(Bootstrap, ConstantScoresDegenerate) {
  const auto [lo, hi] = bootstrap_ci(make_set({0.3, 0.3, 0.3, 0.3, 0.3, 0.3}, {0, 1, 0, 1, 0, 1}), 200, 1);
  EXPECT_EQ(lo, 0.5);
  EXPECT_EQ(hi, 0.5);
  EXPECT_THROW(bootstrap_ci(make_set({0.1, 0.9}, {0, 1}), 99, 1), ConfigError);
}

TEST(Bootstrap, ThreadCountDoesNotMatter) {
  Stream rng(5);
  Eigen::VectorXd s(300);
  Eigen::VectorXi y(300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    y[i] = i % 2;
    s[i] = rng.normal() + y[i];
  }
  const ScoredSet set("x", s, y);
  EXPECT_EQ(bootstrap_ci(set, 500, 17, 1), bootstrap_ci(set, 500, 17, 6));
}

TEST(Scorers, NoTradePathsScoreZero) {
  std::vector<SciComponents> comps(2);
  comps[0] = make_components(0.5, 0.2, 0.1);
  comps[1].no_trade = true;
  Eigen::VectorXi y(2);
  y << 1, 0;
  EXPECT_EQ(score_additive(comps, y).scores[1], 0.0);
  EXPECT_DOUBLE_EQ(score_additive(comps, y).scores[0], (0.5 + 0.8 + 0.9) / 3.0);
  EXPECT_EQ(score_component(comps, y, Component::OneMinusTs).scores[0], 0.8);
  EXPECT_EQ(feature_matrix(comps).row(1).sum(), 0.0);
}

TEST(Logistic, MatchesNewtonOracle) {
  Stream rng(8);
  const int n = 200;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXi y(n);
  std::vector<std::vector<double>> rows;
  std::vector<int> ys;
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    const double p = 1.0 / (1.0 + std::exp(-(0.3 + 1.2 * x(i, 0) - 0.8 * x(i, 1))));
    y[i] = rng.uniform() < p;
    rows.push_back({x(i, 0), x(i, 1)});
    ys.push_back(y[i]);
  }
  bool ok = false;
  const auto beta = oracle::logistic_newton(rows, ys, ok);
  ASSERT_TRUE(ok);
  const LogisticModel m = fit_logistic(x, y);
  EXPECT_NEAR(m.intercept, beta[0], 1e-6);
  EXPECT_NEAR(m.coefficients[0], beta[1], 1e-6);
  EXPECT_NEAR(m.coefficients[1], beta[2], 1e-6);
  EXPECT_FALSE(m.ridge_applied);
  EXPECT_LT(m.gradient_norm, 1e-8);
}

TEST(Logistic, SeparationUsesRidge) {
  Eigen::MatrixXd x(6, 1);
  x << -3, -2, -1, 1, 2, 3;
  Eigen::VectorXi y(6);
  y << 0, 0, 0, 1, 1, 1;
  const LogisticModel m = fit_logistic(x, y);
  EXPECT_TRUE(m.ridge_applied);
  EXPECT_GT(m.coefficients[0], 0.0);
}

TEST(Logistic, AffineFeatureMapKeepsOutOfFoldAuc) {
  Stream rng(9);
  const int n = 400;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal() + 0.5 * y[i] * (j + 1);
  }
  Eigen::MatrixXd z = x;
  z.col(0) = 3.0 * x.col(0).array() + 2.0;
  z.col(2) = -0.5 * x.col(2).array() + 1.0;
  const auto a = fit_logistic_cv(x, y, 5, 4);
  const auto b = fit_logistic_cv(z, y, 5, 4);
  EXPECT_NEAR(roc_auc(a.out_of_fold), roc_auc(b.out_of_fold), 1e-9);
  EXPECT_EQ(a.fold_auc.size(), 5u);
}

TEST(Experiments, RegimeVerdicts) {
  EXPECT_EQ(regime_verdict(0.45, 0.11, 0.27), "informed");
  EXPECT_EQ(regime_verdict(0.005, 0.97, 0.27), "disagreement");
  EXPECT_EQ(regime_verdict(0.16, 0.17, 0.27), "liquidity");
}

TEST(Experiments, UnknownIdAndBadConfig) {
  ExperimentConfig cfg;
  EXPECT_THROW(run_experiment("exp9", cfg, "0"), ConfigError);
  cfg.bootstrap = 10;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Experiments, Exp2FlagsFailureModes) {
  ExperimentConfig cfg;
  cfg.bootstrap = 100;
  cfg.tau_star = 0.27;
  const Exp2Result r = run_exp2(cfg);
  for (const auto& row : r.rows) {
    if (row.name == "whale_informed") EXPECT_EQ(row.failure, "Type II");
    if (row.name == "coord_manip_broad") EXPECT_EQ(row.failure, "Type I");
    if (row.name == "noisy_broad") EXPECT_LT(row.p_above, 0.01);
  }
}
