#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <variant>

#include "sci/classifier.hpp"
#include "sci/core_metrics.hpp"
#include "sci/dgp.hpp"
#include "sci/errors.hpp"
#include "sci/experiments.hpp"

using namespace sci;

TEST(BuiltinSpecs, EightRegimesWithLabels) {
  EXPECT_EQ(builtin_specs().size(), 8u);
  for (const char* name : {"informed", "whale_informed", "manip_then_info"})
    EXPECT_EQ(builtin_spec(name).label, 1) << name;
  for (const char* name : {"liquidity", "disagreement", "noisy_broad", "persistent_two_sided", "coord_manip_broad"})
    EXPECT_EQ(builtin_spec(name).label, 0) << name;
  EXPECT_THROW(builtin_spec("nope"), ConfigError);
}

TEST(BuiltinSpecs, RegimeParameters) {
  const DgpSpec& informed = builtin_spec("informed");
  const auto& r = std::get<IidNormal>(informed.returns);
  EXPECT_EQ(r.mean, 0.0010);
  EXPECT_EQ(r.sd, 0.0022);
  const auto& v = std::get<TwoGamma>(informed.volumes);
  EXPECT_EQ(v.buy.shape, 2.5);
  EXPECT_EQ(v.buy.scale, 5e4);
  EXPECT_EQ(v.sell.shape, 0.5);
  EXPECT_EQ(v.sell.scale, 1.5e4);
  EXPECT_EQ(informed.traders_lo, 150);
  EXPECT_EQ(informed.traders_hi, 250);
  EXPECT_EQ(informed.dirichlet_alpha, 4.0);

  const auto& ar = std::get<Ar1>(builtin_spec("liquidity").returns);
  EXPECT_EQ(ar.phi, -0.55);
  EXPECT_EQ(ar.mean, -0.0008);
  EXPECT_EQ(ar.sd, 0.0025);

  const DgpSpec& coord = builtin_spec("coord_manip_broad");
  EXPECT_EQ(coord.dirichlet_alpha, 4.0);
  EXPECT_EQ(coord.traders_lo, 80);
  EXPECT_EQ(coord.traders_hi, 130);

  const DgpSpec& mti = builtin_spec("manip_then_info");
  EXPECT_EQ(std::get<PiecewiseReturns>(mti.returns).switch_bin, 6);
  EXPECT_EQ(std::get<PiecewiseVolumes>(mti.volumes).switch_bin, 6);
}

TEST(SamplePath, ShapeAndStart) {
  Stream rng = path_stream(1, "informed", 0);
  const SimulatedPath p = sample_path(builtin_spec("informed"), rng);
  EXPECT_EQ(p.prices.size(), 49);
  EXPECT_EQ(p.buy.size(), 48);
  EXPECT_EQ(p.sell.size(), 48);
  EXPECT_EQ(p.prices[0], 0.72);
  EXPECT_DOUBLE_EQ(p.logits()[0], std::log(0.72 / 0.28));
}

TEST(SamplePath, DegenerateSpecIsNoTrade) {
  DgpSpec flat = builtin_spec("informed");
  flat.name = "flat";
  flat.returns = IidNormal{0.0, 0.0};
  EXPECT_NO_THROW(flat.validate());
  Stream rng = path_stream(1, "flat", 0);
  const SimulatedPath p = sample_path(flat, rng);
  EXPECT_TRUE((p.prices.array() == 0.72).all());
  const auto c = compute_sci_for_shock(p.logits(), p.buy, p.sell, p.trader_flows(), 0, 48);
  EXPECT_TRUE(c.no_trade);
  EXPECT_EQ(c.sci, 0.0);
}

TEST(GenerateDataset, CountsAndDeterminism) {
  const Dataset a = generate_dataset(builtin_names(), 25, 99, 1);
  const Dataset b = generate_dataset(builtin_names(), 25, 99, 3);
  EXPECT_EQ(a.paths.size(), 200u);
  std::ostringstream sa, sb;
  write_dataset(sa, a);
  write_dataset(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_THROW(generate_dataset(builtin_names(), 0, 99), ConfigError);
  const std::vector<std::string> bad{"informed", "mystery"};
  EXPECT_THROW(generate_dataset(bad, 5, 99), ConfigError);
}

TEST(GenerateDataset, FullScaleCount) {
  const Dataset ds = generate_dataset(builtin_names(), 1500, kDefaultSeed);
  EXPECT_EQ(ds.paths.size(), 12000u);
}

TEST(GenerateDataset, RegimeDrawsIndependentOfList) {
  const std::vector<std::string> one{"liquidity"};
  const Dataset a = generate_dataset(one, 10, 5, 1);
  const Dataset b = generate_dataset(baseline_names(), 10, 5, 1);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.paths[i].prices, b.paths[10 + i].prices);
}

TEST(Dataset, JsonLinesRoundTrip) {
  const Dataset a = generate_dataset(baseline_names(), 4, 3, 1);
  std::stringstream s;
  write_dataset(s, a);
  const Dataset b = read_dataset(s);
  ASSERT_EQ(a.paths.size(), b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    EXPECT_EQ(a.paths[i].dgp_name, b.paths[i].dgp_name);
    EXPECT_EQ(a.paths[i].prices, b.paths[i].prices);
    EXPECT_EQ(a.paths[i].buy, b.paths[i].buy);
    EXPECT_EQ(a.paths[i].flows, b.paths[i].flows);
  }
}

TEST(SweepSpecs, OnlyTheSweptFieldChanges) {
  const std::vector<double> grid{-0.55, -0.3, 0.0};
  const auto specs = sweep_specs(builtin_spec("liquidity"), SweepParam::ArCoefficient, grid);
  ASSERT_EQ(specs.size(), 3u);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    EXPECT_EQ(std::get<Ar1>(specs[i].returns).phi, grid[i]);
    EXPECT_EQ(std::get<Ar1>(specs[i].returns).sd, 0.0025);
    EXPECT_EQ(specs[i].traders_lo, builtin_spec("liquidity").traders_lo);
  }
  EXPECT_THROW(sweep_specs(builtin_spec("informed"), SweepParam::ArCoefficient, grid), ConfigError);
}

TEST(SweepSpecs, HhiFallsWithConcentration) {
  const std::vector<double> grid{0.25, 1.0, 4.0, 8.0};
  const auto specs = sweep_specs(builtin_spec("informed"), SweepParam::DirichletAlpha, grid);
  double prev = 2.0;
  for (const auto& spec : specs) {
    const Dataset ds = generate_dataset(std::span<const DgpSpec>(&spec, 1), 500, 11);
    double sum = 0.0;
    for (const auto& c : score_components(ds, 48)) sum += c.hhi;
    const double mean = sum / 500.0;
    EXPECT_LT(mean, prev) << spec.name;
    prev = mean;
  }
}

TEST(Baseline, WithinRegimeCorrelationsSmall) {
  ExperimentConfig cfg;
  cfg.bootstrap = 100;
  const Exp1Result r = run_exp1(cfg);
  for (const auto& d : r.dgps) {
    EXPECT_LT(std::fabs(d.corr_pr_ts), 0.1) << d.name;
    EXPECT_LT(std::fabs(d.corr_pr_hhi), 0.1) << d.name;
    EXPECT_LT(std::fabs(d.corr_ts_hhi), 0.1) << d.name;
  }
  const DgpSummary& dis = r.dgps[2];
  EXPECT_NEAR(dis.ts.mean, 0.97, 0.03);
  EXPECT_NEAR(dis.sci.mean, 0.005, 0.02);
}
