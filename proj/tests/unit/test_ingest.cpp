#include <gtest/gtest.h>

#include <sstream>

#include "sci/dgp.hpp"
#include "sci/errors.hpp"
#include "sci/ingest.hpp"

using namespace sci;

namespace {

constexpr std::int64_t kShock = 1'720'000'000'000;

ParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trades(in, "mem");
}

std::vector<TradeRecord> priced(std::initializer_list<double> prices) {
  std::vector<TradeRecord> out;
  std::int64_t ts = kShock;
  for (double p : prices) out.push_back({ts++, p, 1.0, Side::Unknown, "w"});
  return out;
}

}  // namespace

TEST(ParseTrades, EmptyFile) {
  EXPECT_TRUE(parse("").trades.empty());
  EXPECT_TRUE(parse("ts_ms,price,size,wallet\n").trades.empty());
}

TEST(ParseTrades, SideColumnKept) {
  const auto r = parse("ts_ms,price,size,side,wallet\n1,0.5,2,B,a\n2,0.4,1,S,b\n3,0.6,1,,c\n");
  ASSERT_EQ(r.trades.size(), 3u);
  EXPECT_TRUE(r.has_side_column);
  EXPECT_EQ(r.trades[0].side, Side::Buy);
  EXPECT_EQ(r.trades[1].side, Side::Sell);
  EXPECT_EQ(r.trades[2].side, Side::Unknown);
}

TEST(ParseTrades, ReordersByTimestamp) {
  const auto r = parse("wallet,ts_ms,price,size\na,30,0.5,1\nb,10,0.5,1\nc,20,0.5,1\nd,10,0.6,1\n");
  EXPECT_TRUE(r.reordered);
  ASSERT_EQ(r.trades.size(), 4u);
  EXPECT_EQ(r.trades[0].wallet, "b");
  EXPECT_EQ(r.trades[1].wallet, "d");  // stable among equal stamps
  EXPECT_EQ(r.trades[3].wallet, "a");
}

TEST(ParseTrades, ClipsPrices) {
  const auto r = parse("ts_ms,price,size,wallet\n1,0.001,1,a\n2,0.995,1,b\n3,0.5,1,c\n");
  EXPECT_EQ(r.clipped, 2u);
  EXPECT_EQ(r.trades[0].price, 0.01);
  EXPECT_EQ(r.trades[1].price, 0.99);
}

TEST(ParseTrades, MalformedLimit) {
  std::string text = "ts_ms,price,size,wallet\n";
  for (int i = 0; i < 199; ++i) text += std::to_string(i) + ",0.5,1,w\n";
  const auto ok = parse(text + "oops,0.5,1,w\n");
  EXPECT_EQ(ok.malformed.size(), 1u);
  EXPECT_EQ(ok.malformed[0].line, 201u);
  EXPECT_EQ(ok.trades.size(), 199u);
  EXPECT_THROW(parse(text + "oops,0.5,1,w\n1,2.0,1,w\n3,0.5,-1,w\n"), DataError);
  EXPECT_THROW(parse("ts_ms,price,size\n1,0.5,1\n"), DataError);
  EXPECT_THROW(parse("ts_ms,price,size,wallet,venue\n"), DataError);
}

TEST(TickRule, Examples) {
  const auto r = tick_rule_classify(priced({0.50, 0.52, 0.52, 0.51}));
  EXPECT_EQ(r[0].side, Side::Unknown);
  EXPECT_EQ(r[1].side, Side::Buy);
  EXPECT_EQ(r[2].side, Side::Buy);
  EXPECT_EQ(r[3].side, Side::Sell);

  const auto up = tick_rule_classify(priced({0.1, 0.2, 0.3, 0.4}));
  for (std::size_t i = 1; i < up.size(); ++i) EXPECT_EQ(up[i].side, Side::Buy);

  for (const auto& t : tick_rule_classify(priced({0.3, 0.3, 0.3}))) EXPECT_EQ(t.side, Side::Unknown);
}

TEST(TickRule, LabelledSidesKept) {
  auto trades = priced({0.5, 0.6});
  trades[1].side = Side::Sell;
  EXPECT_EQ(tick_rule_classify(trades)[1].side, Side::Sell);
}

TEST(BinSeries, HalfOpenBins) {
  const ShockSpec shock{kShock, 15, 5};
  const std::int64_t bin = shock.bin_ms();
  std::vector<TradeRecord> t{{kShock, 0.5, 1, Side::Buy, "a"},
                             {kShock + bin - 1, 0.55, 1, Side::Buy, "a"},
                             {kShock + bin, 0.6, 2, Side::Sell, "b"},
                             {kShock + 3 * bin, 0.9, 5, Side::Buy, "c"}};
  const BinnedSeries s = bin_series(t, shock);
  EXPECT_EQ(s.trades_per_bin, (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_EQ(s.buy[0], 2.0);
  EXPECT_EQ(s.sell[1], 2.0);
  EXPECT_EQ(s.prices[0], 0.5);  // no pre-shock trade: first in-window price
  EXPECT_EQ(s.prices[1], 0.55);
  EXPECT_EQ(s.prices[2], 0.6);
  EXPECT_EQ(s.prices[3], 0.6);  // forward filled, the 0.9 trade is outside
}

TEST(BinSeries, SingleTradeIsFlat) {
  const ShockSpec shock{kShock, 240, 5};
  std::vector<TradeRecord> t{{kShock + 1000, 0.4, 3, Side::Buy, "a"}};
  const auto c = compute_shock(t, shock);
  EXPECT_TRUE(c.no_trade);
  EXPECT_EQ(c.sci, 0.0);
  EXPECT_THROW(bin_series({{kShock - 5, 0.4, 1, Side::Buy, "a"}}, shock), DataError);
}

TEST(ShockSpec, WindowMustDivide) {
  EXPECT_THROW((ShockSpec{0, 62, 5}.validate()), ConfigError);
  EXPECT_NO_THROW((ShockSpec{0, 60, 5}.validate()));
}

TEST(TraderFlows, NetsAndDrops) {
  const ShockSpec shock{kShock, 60, 5};
  std::vector<TradeRecord> t{{kShock, 0.5, 2, Side::Buy, "a"},
                             {kShock + 1, 0.5, 1, Side::Buy, "a"},
                             {kShock + 2, 0.5, 4, Side::Buy, "b"},
                             {kShock + 3, 0.5, 4, Side::Sell, "b"},
                             {kShock + 4, 0.5, 1, Side::Sell, "c"},
                             {kShock + 5, 0.5, 9, Side::Unknown, "d"}};
  const auto m = trader_flows(t, shock).to_map();
  EXPECT_EQ(m, (std::map<std::string, double>{{"a", 3.0}, {"c", -1.0}}));
  EXPECT_DOUBLE_EQ(hhi_flow(trader_flows(t, shock)), 0.625);
}

TEST(ExportTape, ReplaysPathPrices) {
  Stream rng = path_stream(kDefaultSeed, "informed", 3);
  const SimulatedPath p = sample_path(builtin_spec("informed"), rng);
  const ShockSpec shock{kShock, 240, 5};
  const auto tape = export_tape(p, shock);
  const BinnedSeries s = bin_series(tape, shock);
  EXPECT_EQ(s.prices, p.prices);
  for (Eigen::Index b = 0; b < 48; ++b) {
    EXPECT_NEAR(s.buy[b], p.buy[b], 1e-9 * p.buy[b]);
    EXPECT_NEAR(s.sell[b], p.sell[b], 1e-9 * p.sell[b] + 1e-12);
  }
}

TEST(TradeBootstrap, BracketsAndRepeats) {
  Stream rng = path_stream(kDefaultSeed, "informed", 3);
  const SimulatedPath p = sample_path(builtin_spec("informed"), rng);
  const ShockSpec shock{kShock, 240, 5};
  const auto tape = export_tape(p, shock);
  const auto a = trade_bootstrap_ci(tape, shock, 100, 1, nullptr, 1);
  const auto b = trade_bootstrap_ci(tape, shock, 100, 1, nullptr, 4);
  EXPECT_EQ(a.low, b.low);
  EXPECT_EQ(a.high, b.high);
  EXPECT_LE(a.low, a.high);
  EXPECT_THROW(trade_bootstrap_ci(tape, shock, 50, 1), ConfigError);
}
