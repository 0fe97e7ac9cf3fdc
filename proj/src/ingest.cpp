#include "sci/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sci/errors.hpp"
#include "sci/parallel.hpp"
#include "sci/rng.hpp"

namespace sci {

void ShockSpec::validate() const {
  if (window_minutes <= 0) throw ConfigError("window_minutes: must be positive");
  if (bin_minutes <= 0) throw ConfigError("bin_minutes: must be positive");
  if (window_minutes % bin_minutes != 0)
    throw ConfigError("window_minutes: must be a multiple of bin_minutes");
}

const char* to_string(Side side) noexcept {
  switch (side) {
    case Side::Buy: return "B";
    case Side::Sell: return "S";
    case Side::Unknown: return "";
  }
  return "";
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ParseResult parse_trades(std::istream& in, const std::string& source) {
  ParseResult r;
  std::string line;
  std::size_t lineno = 0;
  int col_ts = -1, col_price = -1, col_size = -1, col_side = -1, col_wallet = -1;
  std::size_t ncols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto header = split(trim(line));
    ncols = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string h = trim(header[i]);
      const int idx = static_cast<int>(i);
      if (h == "ts_ms") col_ts = idx;
      else if (h == "price") col_price = idx;
      else if (h == "size") col_size = idx;
      else if (h == "side") col_side = idx;
      else if (h == "wallet") col_wallet = idx;
      else throw DataError(source + ":" + std::to_string(lineno) + ": unknown column '" + h + "'");
    }
    if (col_ts < 0 || col_price < 0 || col_size < 0 || col_wallet < 0)
      throw DataError(source + ":" + std::to_string(lineno) +
                      ": header must name ts_ms, price, size and wallet");
    break;
  }
  r.has_side_column = col_side >= 0;
  if (ncols == 0) return r;  // empty file

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++r.data_lines;
    const auto fields = split(trim(line));
    auto bad = [&](std::string why) { r.malformed.push_back({lineno, std::move(why)}); };
    if (fields.size() != ncols) {
      bad("expected " + std::to_string(ncols) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    TradeRecord t;
    if (!parse_number(trim(fields[static_cast<std::size_t>(col_ts)]), t.ts_ms)) {
      bad("bad timestamp");
      continue;
    }
    if (!parse_number(trim(fields[static_cast<std::size_t>(col_price)]), t.price) ||
        !(t.price > 0.0 && t.price < 1.0)) {
      bad("price must be a number in (0, 1)");
      continue;
    }
    if (!parse_number(trim(fields[static_cast<std::size_t>(col_size)]), t.size) ||
        !(t.size > 0.0) || !std::isfinite(t.size)) {
      bad("size must be a positive number");
      continue;
    }
    if (col_side >= 0) {
      const std::string s = trim(fields[static_cast<std::size_t>(col_side)]);
      if (s == "B") t.side = Side::Buy;
      else if (s == "S") t.side = Side::Sell;
      else if (s.empty()) t.side = Side::Unknown;
      else {
        bad("side must be B, S or empty");
        continue;
      }
    }
    t.wallet = trim(fields[static_cast<std::size_t>(col_wallet)]);
    if (t.wallet.empty()) {
      bad("missing wallet");
      continue;
    }
    if (t.price < kPriceFloor || t.price > kPriceCeiling) {
      t.price = std::clamp(t.price, kPriceFloor, kPriceCeiling);
      ++r.clipped;
    }
    r.trades.push_back(std::move(t));
  }

  if (r.data_lines > 0 &&
      static_cast<double>(r.malformed.size()) > kMalformedLimit * static_cast<double>(r.data_lines)) {
    std::string msg = source + ": " + std::to_string(r.malformed.size()) + " of " +
                      std::to_string(r.data_lines) + " lines malformed";
    for (std::size_t i = 0; i < std::min<std::size_t>(r.malformed.size(), 5); ++i)
      msg += "; line " + std::to_string(r.malformed[i].line) + ": " + r.malformed[i].reason;
    throw DataError(msg);
  }
  auto earlier = [](const TradeRecord& a, const TradeRecord& b) { return a.ts_ms < b.ts_ms; };
  if (!std::is_sorted(r.trades.begin(), r.trades.end(), earlier)) {
    std::stable_sort(r.trades.begin(), r.trades.end(), earlier);
    r.reordered = true;
  }
  return r;
}

ParseResult parse_trades_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read trade file " + path);
  return parse_trades(in, path);
}

std::vector<TradeRecord> tick_rule_classify(std::vector<TradeRecord> trades) {
  std::optional<double> last_price;
  Side direction = Side::Unknown;
  for (auto& t : trades) {
    if (last_price) {
      if (t.price > *last_price) direction = Side::Buy;
      else if (t.price < *last_price) direction = Side::Sell;
    }
    last_price = t.price;
    if (t.side == Side::Unknown) t.side = direction;
  }
  return trades;
}

namespace {

// Bin of an in-window trade, or -1.
int bin_of(const TradeRecord& t, const ShockSpec& shock) {
  if (t.ts_ms < shock.shock_time || t.ts_ms >= shock.end_time()) return -1;
  return static_cast<int>((t.ts_ms - shock.shock_time) / shock.bin_ms());
}

double signed_size(const TradeRecord& t) {
  return t.side == Side::Buy ? t.size : t.side == Side::Sell ? -t.size : 0.0;
}

TraderFlows to_flows(const std::map<std::string, double>& net) {
  std::map<std::string, double> kept;
  for (const auto& [w, v] : net)
    if (v != 0.0) kept.emplace(w, v);
  return TraderFlows::from_map(kept);
}

}  // namespace

BinnedSeries bin_series(const std::vector<TradeRecord>& trades, const ShockSpec& shock) {
  shock.validate();
  const int n = shock.bins();
  BinnedSeries s;
  s.buy = Eigen::VectorXd::Zero(n);
  s.sell = Eigen::VectorXd::Zero(n);
  s.trades_per_bin.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::optional<double>> last(static_cast<std::size_t>(n));
  std::optional<double> pre, first_in;
  for (const auto& t : trades) {
    if (t.ts_ms < shock.shock_time) {
      pre = t.price;
      continue;
    }
    const int b = bin_of(t, shock);
    if (b < 0) continue;
    if (!first_in) first_in = t.price;
    const auto sb = static_cast<std::size_t>(b);
    last[sb] = t.price;
    ++s.trades_per_bin[sb];
    if (t.side == Side::Buy) s.buy[b] += t.size;
    else if (t.side == Side::Sell) s.sell[b] += t.size;
  }
  if (!first_in) throw DataError("no trade falls inside the shock window");
  s.prices.resize(n + 1);
  s.prices[0] = pre ? *pre : *first_in;
  for (int b = 0; b < n; ++b)
    s.prices[b + 1] = last[static_cast<std::size_t>(b)] ? *last[static_cast<std::size_t>(b)] : s.prices[b];
  s.logits = logit(s.prices);
  return s;
}

TraderFlows trader_flows(const std::vector<TradeRecord>& trades, const ShockSpec& shock) {
  shock.validate();
  std::map<std::string, double> net;
  for (const auto& t : trades)
    if (bin_of(t, shock) >= 0 && t.side != Side::Unknown) net[t.wallet] += signed_size(t);
  return to_flows(net);
}

std::vector<TraderFlows> trader_flows_by_bin(const std::vector<TradeRecord>& trades,
                                             const ShockSpec& shock) {
  shock.validate();
  std::vector<std::map<std::string, double>> net(static_cast<std::size_t>(shock.bins()));
  for (const auto& t : trades) {
    const int b = bin_of(t, shock);
    if (b >= 0 && t.side != Side::Unknown) net[static_cast<std::size_t>(b)][t.wallet] += signed_size(t);
  }
  std::vector<TraderFlows> out;
  out.reserve(net.size());
  for (const auto& m : net) out.push_back(to_flows(m));
  return out;
}

SciComponents compute_shock(const std::vector<TradeRecord>& trades, const ShockSpec& shock,
                            const ClusterMap* clusters, const FlowFilter& filter) {
  const BinnedSeries s = bin_series(trades, shock);
  TraderFlows flows = trader_flows(trades, shock);
  if (filter) flows = filter(flows);
  return compute_sci_for_shock(s.logits, s.buy, s.sell, flows, 0, shock.bins(), clusters);
}

TradeBootstrap trade_bootstrap_ci(const std::vector<TradeRecord>& trades, const ShockSpec& shock,
                                  int resamples, std::uint64_t seed, const ClusterMap* clusters,
                                  unsigned threads, const FlowFilter& filter) {
  if (resamples < 100) throw ConfigError("bootstrap: need at least 100 resamples");
  std::vector<TradeRecord> fixed;
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < trades.size(); ++i) {
    if (bin_of(trades[i], shock) >= 0) window.push_back(i);
    else fixed.push_back(trades[i]);
  }
  if (window.empty()) throw DataError("no trade falls inside the shock window");
  std::vector<std::optional<double>> values(static_cast<std::size_t>(resamples));
  parallel_for(values.size(), threads, [&](std::size_t b) {
    Stream rng = Stream::derive(seed, 0x7ade, b);
    std::vector<std::size_t> pick(window.size());
    for (auto& p : pick)
      p = window[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(window.size()) - 1))];
    std::sort(pick.begin(), pick.end());  // keeps tape order, duplicates adjacent
    std::vector<TradeRecord> sample = fixed;
    for (std::size_t p : pick) sample.push_back(trades[p]);
    std::stable_sort(sample.begin(), sample.end(),
                     [](const TradeRecord& a, const TradeRecord& c) { return a.ts_ms < c.ts_ms; });
    try {
      values[b] = compute_shock(sample, shock, clusters, filter).sci;
    } catch (const ZeroVolumeError&) {
    } catch (const ZeroFlowError&) {
    }
  });
  TradeBootstrap out;
  out.resamples = resamples;
  std::vector<double> ok;
  for (const auto& v : values) {
    if (v) ok.push_back(*v);
    else ++out.failed;
  }
  if (ok.empty()) throw DataError("trade bootstrap: every resample lacked volume or flow");
  std::sort(ok.begin(), ok.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(ok.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, ok.size() - 1);
    return ok[lo] + (pos - static_cast<double>(lo)) * (ok[hi] - ok[lo]);
  };
  out.low = q(0.025);
  out.high = q(0.975);
  return out;
}

std::vector<TradeRecord> export_tape(const SimulatedPath& path, const ShockSpec& shock) {
  shock.validate();
  const Eigen::Index n = path.buy.size();
  if (shock.bins() != n) throw DomainError("export tape: shock window must cover the path's bins");
  const double total_buy = path.buy.sum();
  const double total_sell = path.sell.sum();
  if (total_buy == total_sell)
    throw DomainError("export tape: equal total buy and sell volume leave no net flow");
  const Eigen::VectorXd mag = path.flows.cwiseAbs();
  const double m = mag.sum();
  if (!(m > 0.0)) throw ZeroFlowError("export tape: path has no trader flow");

  // Wallet j buys B_b m_j / M and sells S_b m_j / M in every bin, so bin
  // volumes match exactly and each net is proportional to m_j.
  std::vector<TradeRecord> tape;
  tape.push_back({shock.shock_time - 1, path.prices[0], 1.0, Side::Buy, "pre_shock"});
  for (Eigen::Index b = 0; b < n; ++b) {
    std::int64_t ts = shock.shock_time + b * shock.bin_ms();
    const double price = path.prices[b + 1];
    if (path.buy[b] == 0.0 && path.sell[b] == 0.0 && price != path.prices[b])
      throw DomainError("export tape: a price move in a bin without volume cannot be replayed");
    for (Eigen::Index j = 0; j < mag.size(); ++j) {
      if (mag[j] == 0.0) continue;
      const std::string wallet = "w" + std::to_string(j);
      const double share = mag[j] / m;
      if (path.buy[b] > 0.0) tape.push_back({ts++, price, path.buy[b] * share, Side::Buy, wallet});
      if (path.sell[b] > 0.0) tape.push_back({ts++, price, path.sell[b] * share, Side::Sell, wallet});
    }
    if (ts >= shock.shock_time + (b + 1) * shock.bin_ms())
      throw DomainError("export tape: too many wallets to fit one bin");
  }
  return tape;
}

void write_trades(std::ostream& out, const std::vector<TradeRecord>& trades) {
  out << "ts_ms,price,size,side,wallet\n";
  for (const auto& t : trades)
    out << t.ts_ms << ',' << fmt17(t.price) << ',' << fmt17(t.size) << ',' << to_string(t.side)
        << ',' << t.wallet << '\n';
}

}  // namespace sci
