#include "sci/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sci/classifier.hpp"
#include "sci/clustering.hpp"
#include "sci/errors.hpp"
#include "sci/experiments.hpp"
#include "sci/ingest.hpp"
#include "sci/manifest.hpp"

namespace sci {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kOutEnv = "SCI_OUT_DIR";

struct Overrides {
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::size_t> n;
  std::vector<std::string> dgps;
  std::optional<std::string> trades;
  std::optional<std::string> graph;
  std::optional<std::string> dataset;
  std::optional<std::int64_t> shock_time;
  std::optional<int> window;
  std::optional<int> bin;
  std::optional<int> rolling;
  std::optional<double> tau;
  std::optional<double> tau_star;
  std::optional<int> bootstrap;
  std::optional<int> trade_bootstrap;
  std::vector<double> weights;
  std::optional<std::string> custodial_mode;
};

RunManifest resolve(const Overrides& o) {
  RunManifest m = o.manifest_path.empty() ? RunManifest{} : RunManifest::load(o.manifest_path);
  if (o.seed) m.seed = *o.seed;
  if (o.out) m.out = *o.out;
  if (o.threads) m.threads = *o.threads;
  if (o.n) m.n_per_dgp = *o.n;
  if (!o.dgps.empty()) m.dgps = o.dgps;
  if (o.trades) m.trades = *o.trades;
  if (o.graph) m.wallet_graph = *o.graph;
  if (o.dataset) m.dataset = *o.dataset;
  if (o.shock_time) m.shock_time = *o.shock_time;
  if (o.window) m.window_minutes = *o.window;
  if (o.bin) m.bin_minutes = *o.bin;
  if (o.rolling) m.rolling_window_minutes = *o.rolling;
  if (o.tau) m.tau = *o.tau;
  if (o.tau_star) m.tau_star = *o.tau_star;
  if (o.bootstrap) m.bootstrap = *o.bootstrap;
  if (o.trade_bootstrap) m.trade_bootstrap = *o.trade_bootstrap;
  if (!o.weights.empty()) m.weights = o.weights;
  if (o.custodial_mode) m.custodial_mode = *o.custodial_mode;
  if (m.out.empty()) {
    const char* env = std::getenv(kOutEnv);
    m.out = env && *env ? env : "sci_out";
  }
  m.validate();
  return m;
}

fs::path ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << content;
}

ordered_json header(const char* schema, const RunManifest& m) {
  return {{"schema", schema}, {"manifest_hash", m.hash()}, {"seed", m.seed}};
}

ordered_json components_json(const SciComponents& c) {
  return {{"pr", c.pr}, {"ts", c.ts}, {"hhi", c.hhi}, {"sci", c.sci}, {"no_trade", c.no_trade}};
}

struct LoadedTape {
  std::vector<TradeRecord> trades;
  ordered_json ingest;
};

LoadedTape load_tape(const RunManifest& m, std::ostream& err) {
  if (m.trades.empty()) throw ConfigError("trades: no trade file given");
  if (!m.shock_time) throw ConfigError("shock_time: required for trade files");
  ParseResult parsed = parse_trades_file(m.trades);
  for (const auto& bad : parsed.malformed)
    err << "warning: " << m.trades << ":" << bad.line << ": skipped, " << bad.reason << '\n';
  if (parsed.reordered) err << "warning: " << m.trades << ": timestamps out of order, re-sorted\n";
  if (parsed.clipped) err << "warning: " << parsed.clipped << " prices clipped to [0.01, 0.99]\n";
  if (parsed.trades.empty()) throw DataError(m.trades + ": no trades");
  const bool tick = !parsed.has_side_column;
  LoadedTape t;
  t.trades = tick ? tick_rule_classify(std::move(parsed.trades)) : std::move(parsed.trades);
  t.ingest = {{"file", m.trades},
              {"data_lines", parsed.data_lines},
              {"malformed", parsed.malformed.size()},
              {"clipped", parsed.clipped},
              {"reordered", parsed.reordered},
              {"tick_rule", tick}};
  return t;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunManifest& m, std::ostream& out) {
  const Dataset ds = generate_dataset(std::span<const std::string>(m.dgps), m.n_per_dgp.value_or(2000),
                                      m.seed, m.threads);
  const fs::path file = ensure_dir(m.out) / "dataset.jsonl";
  std::ostringstream os;
  write_dataset(os, ds);
  write_file(file, os.str());
  out << "wrote " << ds.paths.size() << " paths to " << file.string() << '\n';
  return kExitOk;
}

int cmd_experiment(const std::string& id, const RunManifest& m, std::ostream& out) {
  const ExperimentOutput result = run_experiment(id, m.experiment_config(), m.hash());
  const fs::path dir = ensure_dir(fs::path(m.out) / id);
  write_file(dir / "report.json", result.report.dump(2) + "\n");
  for (const auto& s : result.series) write_file(dir / s.name, s.csv);
  out << "wrote " << (dir / "report.json").string() << " and " << result.series.size()
      << " series files\n";
  return kExitOk;
}

int cmd_compute(const RunManifest& m, std::ostream& out, std::ostream& err) {
  const LoadedTape tape = load_tape(m, err);
  const ShockSpec shock = m.shock();

  std::optional<WalletGraph> graph;
  std::optional<ClusterMap> clusters;
  FlowFilter filter;
  if (!m.wallet_graph.empty()) {
    std::ifstream in(m.wallet_graph);
    if (!in) throw DataError("cannot read wallet graph " + m.wallet_graph);
    graph = read_wallet_graph(in);
    clusters = build_cluster_map(*graph, m.cluster_options());
    const auto custodial = graph->custodial;
    const auto mode = m.custodial();
    const double lambda = m.custodial_weight;
    filter = [custodial, mode, lambda](const TraderFlows& f) {
      return filter_custodial(f, custodial, mode, lambda);
    };
  }
  const ClusterMap* cmap = clusters ? &*clusters : nullptr;
  const SciComponents c = compute_shock(tape.trades, shock, cmap, filter);

  ordered_json report = header("sci-compute/1", m);
  report["shock"] = {{"shock_time", shock.shock_time},
                     {"window_minutes", shock.window_minutes},
                     {"bin_minutes", shock.bin_minutes}};
  report["ingest"] = tape.ingest;
  report["components"] = components_json(c);
  report["weighted"] = {{"weights", m.weights}, {"sci", weighted_sci(c, m.weight_triple())}};
  report["tau"] = m.tau;
  report["verdict"] = c.sci > m.tau ? "above threshold" : "below threshold";
  if (clusters) {
    TraderFlows flows = trader_flows(tape.trades, shock);
    if (filter) flows = filter(flows);
    ordered_json cl = {{"clusters", clusters->cluster_count()}, {"wallets", graph->wallets.size()}};
    if (flows.has_nonzero()) {
      const HhiRobustness h = hhi_robustness_report(flows, *clusters);
      cl["hhi_raw"] = h.hhi_raw;
      cl["hhi_clustered"] = h.hhi_clustered;
      cl["gap"] = h.gap;
    }
    report["clustering"] = cl;
  }
  if (m.trade_bootstrap > 0) {
    const TradeBootstrap b =
        trade_bootstrap_ci(tape.trades, shock, m.trade_bootstrap, m.seed, cmap, m.threads, filter);
    report["bootstrap"] = {{"resamples", b.resamples}, {"failed", b.failed}, {"low", b.low}, {"high", b.high}};
  }
  const fs::path dir = ensure_dir(fs::path(m.out) / "compute");
  write_file(dir / "report.json", report.dump(2) + "\n");
  out << "PR " << c.pr << "  TS " << c.ts << "  HHI " << c.hhi << "  SCI " << c.sci
      << (c.no_trade ? "  (no trade)" : "") << "\n"
      << "verdict at tau " << m.tau << ": " << report["verdict"].get<std::string>() << '\n';
  return kExitOk;
}

int cmd_monitor(const RunManifest& m, std::ostream& out, std::ostream& err) {
  err << "warning: tau = " << m.tau
      << " is calibrated on simulated shocks, not on labelled real events\n";
  const LoadedTape tape = load_tape(m, err);
  const ShockSpec shock = m.shock();
  const int w = m.rolling_window_minutes / shock.bin_minutes;
  if (w > shock.bins()) throw ConfigError("rolling_window_minutes: longer than the replay window");
  const BinnedSeries s = bin_series(tape.trades, shock);
  const auto by_bin = trader_flows_by_bin(tape.trades, shock);
  const auto rolling = rolling_sci(s.logits, s.buy, s.sell, std::span<const TraderFlows>(by_bin), w);
  const auto values = sci_values(rolling);
  const AlarmSummary alarm = alarm_summary(std::span<const std::optional<double>>(values), m.tau,
                                           std::chrono::minutes{shock.bin_minutes});

  std::ostringstream csv;
  csv << "bin,minute,pr,ts,hhi,sci,alarm\n";
  for (std::size_t t = 0; t < rolling.size(); ++t) {
    if (!rolling[t]) continue;
    const auto& c = *rolling[t];
    csv << t << ',' << t * static_cast<std::size_t>(shock.bin_minutes) << ',' << c.pr << ',' << c.ts
        << ',' << c.hhi << ',' << c.sci << ',' << (c.sci > m.tau ? 1 : 0) << '\n';
  }
  ordered_json report = header("sci-monitor/1", m);
  report["shock"] = {{"shock_time", shock.shock_time},
                     {"window_minutes", shock.window_minutes},
                     {"bin_minutes", shock.bin_minutes}};
  report["rolling_window_minutes"] = m.rolling_window_minutes;
  report["tau"] = m.tau;
  report["ingest"] = tape.ingest;
  auto opt_minutes = [&](std::optional<Eigen::Index> bin) {
    return bin ? ordered_json(*bin * shock.bin_minutes) : ordered_json(nullptr);
  };
  report["alarm"] = {{"onset_minute", opt_minutes(alarm.onset)},
                     {"duration_minutes", alarm.duration.count()},
                     {"decay_minutes", alarm.decay_time ? ordered_json(alarm.decay_time->count())
                                                        : ordered_json(nullptr)},
                     {"peak_minute", opt_minutes(alarm.peak)},
                     {"sustained", alarm.sustained}};
  const fs::path dir = ensure_dir(fs::path(m.out) / "monitor");
  write_file(dir / "rolling_sci.csv", csv.str());
  write_file(dir / "report.json", report.dump(2) + "\n");
  if (alarm.onset)
    out << "alarm onset at minute " << *alarm.onset * shock.bin_minutes << ", duration "
        << alarm.duration.count() << " min" << (alarm.sustained ? " (sustained)" : "") << '\n';
  else
    out << "no alarm at tau " << m.tau << '\n';
  return kExitOk;
}

int cmd_calibrate(const RunManifest& m, std::ostream& out) {
  Dataset ds;
  std::string source;
  if (!m.dataset.empty()) {
    std::ifstream in(m.dataset);
    if (!in) throw DataError("cannot read dataset " + m.dataset);
    ds = read_dataset(in);
    source = m.dataset;
  } else {
    ds = generate_dataset(std::span<const std::string>(m.dgps), m.n_per_dgp.value_or(2000), m.seed,
                          m.threads);
    source = "simulated";
  }
  const int window_bins = m.window_minutes / m.bin_minutes;
  const auto comps = score_components(ds, window_bins, m.threads);
  const ScoredSet set = score_sci(comps, labels_of(ds));
  const RocResult r = evaluate(set, m.bootstrap, m.seed, m.threads);
  ordered_json report = header("sci-calibrate/1", m);
  report["source"] = source;
  report["paths"] = ds.paths.size();
  report["window_bins"] = window_bins;
  report["roc"] = {{"auc", r.auc},   {"ci_low", r.ci_low}, {"ci_high", r.ci_high},
                   {"tau_star", r.tau_star}, {"tpr", r.tpr}, {"fpr", r.fpr}};
  const fs::path dir = ensure_dir(fs::path(m.out) / "calibrate");
  write_file(dir / "report.json", report.dump(2) + "\n");
  write_file(dir / "roc.csv", roc_csv(roc_curve(set)));
  out << "tau* " << r.tau_star << "  TPR " << r.tpr << "  FPR " << r.fpr << "  AUC " << r.auc
      << " [" << r.ci_low << ", " << r.ci_high << "]\n";
  return kExitOk;
}

int cmd_export_tape(const RunManifest& m, const std::string& dgp, std::size_t index,
                    std::ostream& out) {
  const DgpSpec& spec = builtin_spec(dgp);
  Stream rng = path_stream(m.seed, dgp, index);
  const SimulatedPath path = sample_path(spec, rng);
  ShockSpec shock = m.shock();
  shock.window_minutes = spec.n_bins * shock.bin_minutes;
  const auto tape = export_tape(path, shock);
  const fs::path file = ensure_dir(m.out) / ("tape_" + dgp + "_" + std::to_string(index) + ".csv");
  std::ostringstream os;
  write_trades(os, tape);
  write_file(file, os.str());
  out << "wrote " << tape.size() << " trades to " << file.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signal Credibility Index: simulation, experiments and trade-tape scoring", "sci"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--manifest", o.manifest_path, "JSON run manifest")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out, std::string("output directory (default $") + kOutEnv + " or sci_out)");
  app.add_option("--threads", o.threads, "worker threads, 0 = all cores");

  auto* simulate = app.add_subcommand("simulate", "generate a dataset file");
  simulate->add_option("--n", o.n, "paths per DGP");
  simulate->add_option("--dgps", o.dgps, "DGP names")->delimiter(',');

  std::string experiment_id;
  auto* experiment = app.add_subcommand("experiment", "run an experiment and write its report");
  experiment->add_option("id", experiment_id, "experiment id")
      ->required()
      ->check(CLI::IsMember(experiment_ids()));
  experiment->add_option("--n", o.n, "paths per DGP");
  experiment->add_option("--bootstrap", o.bootstrap, "AUC bootstrap resamples");
  experiment->add_option("--tau-star", o.tau_star, "frozen threshold for exp2 / illustrative");

  auto add_tape_options = [&](CLI::App* cmd) {
    cmd->add_option("--trades", o.trades, "trade CSV");
    cmd->add_option("--shock-time", o.shock_time, "shock time, UTC epoch ms");
    cmd->add_option("--window", o.window, "window minutes");
    cmd->add_option("--bin", o.bin, "bin minutes");
    cmd->add_option("--tau", o.tau, "alarm threshold");
  };
  auto* compute = app.add_subcommand("compute", "score one shock from a trade file");
  add_tape_options(compute);
  compute->add_option("--graph", o.graph, "wallet graph for clustering");
  compute->add_option("--trade-bootstrap", o.trade_bootstrap, "trade-level resamples, 0 = off");
  compute->add_option("--weights", o.weights, "exponents a1,a2,a3 summing to 3")->delimiter(',');
  compute->add_option("--custodial-mode", o.custodial_mode, "exclude or downweight");

  auto* monitor = app.add_subcommand("monitor", "replay a trade file through the rolling index");
  add_tape_options(monitor);
  monitor->add_option("--rolling", o.rolling, "rolling window minutes");

  auto* calibrate = app.add_subcommand("calibrate", "Youden threshold on a labelled dataset");
  calibrate->add_option("--dataset", o.dataset, "dataset file from simulate");
  calibrate->add_option("--n", o.n, "paths per DGP when simulating");
  calibrate->add_option("--dgps", o.dgps, "DGP names when simulating")->delimiter(',');

  std::string tape_dgp = "informed";
  std::size_t tape_index = 0;
  auto* tape = app.add_subcommand("export-tape", "write one simulated path as a trade file");
  tape->add_option("--dgp", tape_dgp, "DGP name");
  tape->add_option("--index", tape_index, "path index");
  tape->add_option("--shock-time", o.shock_time, "shock time, UTC epoch ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const RunManifest m = resolve(o);
    if (simulate->parsed()) return cmd_simulate(m, out);
    if (experiment->parsed()) return cmd_experiment(experiment_id, m, out);
    if (compute->parsed()) return cmd_compute(m, out, err);
    if (monitor->parsed()) return cmd_monitor(m, out, err);
    if (calibrate->parsed()) return cmd_calibrate(m, out);
    if (tape->parsed()) return cmd_export_tape(m, tape_dgp, tape_index, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace sci
