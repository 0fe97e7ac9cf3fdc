#pragma once

// Trade tapes: parsing, tick-rule side classification, binning and
// per-wallet flows for one shock window.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sci/core_metrics.hpp"
#include "sci/dgp.hpp"
#include "sci/flows.hpp"

namespace sci {

enum class Side { Buy, Sell, Unknown };

struct TradeRecord {
  std::int64_t ts_ms{0};
  double price{0.5};
  double size{0.0};
  Side side{Side::Unknown};
  std::string wallet;
};

struct ShockSpec {
  std::int64_t shock_time{0};  // UTC epoch milliseconds
  int window_minutes{240};
  int bin_minutes{5};

  void validate() const;  // ConfigError unless bins divide the window
  int bins() const { return window_minutes / bin_minutes; }
  std::int64_t bin_ms() const { return std::int64_t{bin_minutes} * 60'000; }
  std::int64_t end_time() const { return shock_time + std::int64_t{window_minutes} * 60'000; }
};

struct MalformedLine {
  std::size_t line;
  std::string reason;
};

struct ParseResult {
  std::vector<TradeRecord> trades;  // time-ordered
  std::size_t data_lines{0};
  std::vector<MalformedLine> malformed;
  std::size_t clipped{0};
  bool reordered{false};
  bool has_side_column{false};
};

inline constexpr double kMalformedLimit = 0.01;

/// Reads a header line naming ts_ms, price, size, wallet and optionally side,
/// then one trade per line. Malformed lines are skipped and reported; more
/// than 1% of them is a DataError. Prices are clipped to [0.01, 0.99].
ParseResult parse_trades(std::istream& in, const std::string& source = "trades");
ParseResult parse_trades_file(const std::string& path);

/// Fills Unknown sides: up-tick buy, down-tick sell, zero tick repeats the
/// last direction. Trades before the first price change stay Unknown.
std::vector<TradeRecord> tick_rule_classify(std::vector<TradeRecord> trades);

struct BinnedSeries {
  Eigen::VectorXd prices;  // bins + 1; prices[0] is the last pre-shock trade
  Eigen::VectorXd logits;
  Eigen::VectorXd buy;
  Eigen::VectorXd sell;
  std::vector<std::size_t> trades_per_bin;
};

/// Half-open bins [t_s + b*bin, t_s + (b+1)*bin). Bin price is the last trade
/// in the bin, forward-filled through empty bins. Throws DataError when no
/// trade falls in the window.
BinnedSeries bin_series(const std::vector<TradeRecord>& trades, const ShockSpec& shock);

/// Net signed size per wallet over the window; Unknown sides and zero nets
/// are dropped.
TraderFlows trader_flows(const std::vector<TradeRecord>& trades, const ShockSpec& shock);

/// Same, per bin, for the rolling index.
std::vector<TraderFlows> trader_flows_by_bin(const std::vector<TradeRecord>& trades,
                                             const ShockSpec& shock);

/// Applied to window flows before clustering, e.g. a custodial filter.
using FlowFilter = std::function<TraderFlows(const TraderFlows&)>;

/// The full pipeline on one shock: bin, flows, optional filter and
/// clustering, index.
SciComponents compute_shock(const std::vector<TradeRecord>& trades, const ShockSpec& shock,
                            const ClusterMap* clusters = nullptr, const FlowFilter& filter = {});

struct TradeBootstrap {
  double low{0.0};
  double high{0.0};
  int resamples{0};
  int failed{0};  // resamples with no usable volume or flow
};

/// Percentile 2.5/97.5 SCI bounds from resampling in-window trades uniformly
/// with replacement. Pre-shock trades are kept as they are.
TradeBootstrap trade_bootstrap_ci(const std::vector<TradeRecord>& trades, const ShockSpec& shock,
                                  int resamples, std::uint64_t seed,
                                  const ClusterMap* clusters = nullptr, unsigned threads = 0,
                                  const FlowFilter& filter = {});

/// Synthetic side-labelled tape that reproduces a simulated path's bin
/// prices, per-bin volumes and flow concentration. Throws DomainError when
/// total buy and sell volume are equal (no wallet net can be nonzero).
std::vector<TradeRecord> export_tape(const SimulatedPath& path, const ShockSpec& shock);

void write_trades(std::ostream& out, const std::vector<TradeRecord>& trades);

const char* to_string(Side side) noexcept;

}  // namespace sci
