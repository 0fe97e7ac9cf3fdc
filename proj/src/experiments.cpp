#include "sci/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sci/errors.hpp"
#include "sci/rng.hpp"

namespace sci {

using nlohmann::ordered_json;

void ExperimentConfig::validate() const {
  if (n_per_dgp && *n_per_dgp < 10) throw ConfigError("n_per_dgp: need at least 10 paths per DGP");
  if (window_bins < 1 || window_bins > kDefaultBins)
    throw ConfigError("window_bins: must lie in [1, " + std::to_string(kDefaultBins) + "]");
  if (bin_minutes < 1) throw ConfigError("bin_minutes: must be positive");
  if (bootstrap < 100) throw ConfigError("bootstrap: need at least 100 resamples");
  if (tau_star && !(*tau_star >= 0.0 && *tau_star <= 1.0))
    throw ConfigError("tau_star: must lie in [0, 1]");
  if (k_folds < 2) throw ConfigError("k_folds: need at least 2 folds");
  if (rolling_window_bins < 1 || rolling_window_bins > kDefaultBins)
    throw ConfigError("rolling_window_bins: must lie in [1, " + std::to_string(kDefaultBins) + "]");
  if (histogram_bins < 1) throw ConfigError("histogram_bins: must be positive");
  for (int m : window_minutes) {
    if (m <= 0 || m % bin_minutes != 0 || m / bin_minutes > kDefaultBins)
      throw ConfigError("window_minutes: " + std::to_string(m) +
                        " is not a whole number of bins within the simulated horizon");
  }
  for (double a : alpha_grid)
    if (!(a > 0.0)) throw ConfigError("alpha_grid: concentrations must be positive");
  for (double phi : phi_grid)
    if (!(std::abs(phi) < 1.0)) throw ConfigError("phi_grid: AR coefficients must lie in (-1, 1)");
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, const std::string& tag) {
  return splitmix64(seed ^ fnv1a64(tag));
}

Moments moments(const std::vector<double>& x) {
  Moments m;
  if (x.empty()) return m;
  double sum = 0.0;
  for (double v : x) sum += v;
  m.mean = sum / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  }
  return m;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const Moments ma = moments(a), mb = moments(b);
  if (ma.sd == 0.0 || mb.sd == 0.0 || a.size() < 2) return std::nan("");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma.mean) * (b[i] - mb.mean);
  return s / (static_cast<double>(a.size() - 1) * ma.sd * mb.sd);
}

std::vector<std::string> path_groups(const Dataset& ds) {
  std::vector<std::string> g;
  g.reserve(ds.paths.size());
  for (const auto& p : ds.paths) g.push_back(p.dgp_name);
  return g;
}

DgpSummary summarize(const std::string& name, int label, const std::vector<SciComponents>& comps,
                     const std::vector<std::string>& groups) {
  std::vector<double> pr, ts, hhi, s;
  DgpSummary out;
  out.name = name;
  out.label = label;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (groups[i] != name) continue;
    pr.push_back(comps[i].pr);
    ts.push_back(comps[i].ts);
    hhi.push_back(comps[i].hhi);
    s.push_back(comps[i].sci);
    if (comps[i].no_trade) ++out.no_trade;
  }
  out.n = pr.size();
  out.pr = moments(pr);
  out.ts = moments(ts);
  out.hhi = moments(hhi);
  out.sci = moments(s);
  out.corr_pr_ts = correlation(pr, ts);
  out.corr_pr_hhi = correlation(pr, hhi);
  out.corr_ts_hhi = correlation(ts, hhi);
  return out;
}

double mean_sci_where(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels,
                      int label) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (labels[static_cast<Eigen::Index>(i)] != label) continue;
    sum += comps[i].sci;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

SweepRow sweep_point(double value, const std::vector<DgpSpec>& specs, const ExperimentConfig& cfg,
                     const std::string& tag) {
  const Dataset ds = generate_dataset(specs, cfg.n_or(2000), cfg.seed, cfg.threads);
  const auto comps = score_components(ds, cfg.window_bins, cfg.threads);
  const auto labels = labels_of(ds);
  SweepRow row;
  row.value = value;
  row.roc = evaluate(score_sci(comps, labels), cfg.bootstrap, stream_seed(cfg.seed, tag),
                     cfg.threads);
  row.mean_sci_positive = mean_sci_where(comps, labels, 1);
  row.mean_sci_negative = mean_sci_where(comps, labels, 0);
  return row;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ordered_json roc_json(const RocResult& r) {
  return {{"auc", r.auc},           {"ci_low", r.ci_low}, {"ci_high", r.ci_high},
          {"tau_star", r.tau_star}, {"tpr", r.tpr},       {"fpr", r.fpr}};
}

ordered_json moments_json(const Moments& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

ordered_json summary_json(const DgpSummary& d) {
  return {{"name", d.name},
          {"label", d.label},
          {"n", d.n},
          {"no_trade", d.no_trade},
          {"pr", moments_json(d.pr)},
          {"ts", moments_json(d.ts)},
          {"hhi", moments_json(d.hhi)},
          {"sci", moments_json(d.sci)},
          {"correlations",
           {{"pr_ts", d.corr_pr_ts}, {"pr_hhi", d.corr_pr_hhi}, {"ts_hhi", d.corr_ts_hhi}}}};
}

ordered_json sweep_json(const std::vector<SweepRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j = {{"value", r.value}};
    j["roc"] = roc_json(r.roc);
    j["mean_sci_positive"] = r.mean_sci_positive;
    j["mean_sci_negative"] = r.mean_sci_negative;
    out.push_back(std::move(j));
  }
  return out;
}

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << param << ",auc,ci_low,ci_high,tau_star,tpr,fpr,mean_sci_positive,mean_sci_negative\n";
  for (const auto& r : rows)
    os << fmt(r.value) << ',' << fmt(r.roc.auc) << ',' << fmt(r.roc.ci_low) << ','
       << fmt(r.roc.ci_high) << ',' << fmt(r.roc.tau_star) << ',' << fmt(r.roc.tpr) << ','
       << fmt(r.roc.fpr) << ',' << fmt(r.mean_sci_positive) << ',' << fmt(r.mean_sci_negative)
       << '\n';
  return os.str();
}

std::vector<SimulatedPath> representative_paths(const ExperimentConfig& cfg) {
  std::vector<SimulatedPath> out;
  for (const auto& name : baseline_names()) {
    Stream rng = path_stream(cfg.seed, name, 0);
    out.push_back(sample_path(builtin_spec(name), rng));
  }
  return out;
}

}  // namespace

std::string regime_verdict(double sci_value, double ts, double tau) {
  if (sci_value > tau) return "informed";
  return ts > 0.5 ? "disagreement" : "liquidity";
}

const ClassifierRow& Exp3Result::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw DomainError("no classifier named " + name);
}

Exp1Result run_exp1(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset ds = generate_dataset(baseline_names(), cfg.n_or(2000), cfg.seed, cfg.threads);
  Exp1Result r;
  r.components = score_components(ds, cfg.window_bins, cfg.threads);
  r.labels = labels_of(ds);
  r.dgp_of_path = path_groups(ds);
  for (const auto& name : baseline_names())
    r.dgps.push_back(summarize(name, builtin_spec(name).label, r.components, r.dgp_of_path));
  const ScoredSet set = score_sci(r.components, r.labels);
  r.roc = evaluate(set, cfg.bootstrap, stream_seed(cfg.seed, "exp1"), cfg.threads);
  r.curve = roc_curve(set);
  return r;
}

double calibrate_tau(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset ds = generate_dataset(baseline_names(), 2000, cfg.seed, cfg.threads);
  const auto comps = score_components(ds, cfg.window_bins, cfg.threads);
  return youden_threshold(score_sci(comps, labels_of(ds))).tau;
}

Exp2Result run_exp2(const ExperimentConfig& cfg) {
  cfg.validate();
  Exp2Result r;
  r.tau_calibrated = !cfg.tau_star.has_value();
  r.tau_star = cfg.tau_star ? *cfg.tau_star : calibrate_tau(cfg);
  const Dataset ds = generate_dataset(adversarial_names(), cfg.n_or(2000), cfg.seed, cfg.threads);
  r.components = score_components(ds, cfg.window_bins, cfg.threads);
  r.dgp_of_path = path_groups(ds);
  for (const auto& name : adversarial_names()) {
    Exp2Row row;
    row.name = name;
    row.label = builtin_spec(name).label;
    std::vector<double> s;
    for (std::size_t i = 0; i < r.components.size(); ++i)
      if (r.dgp_of_path[i] == name) s.push_back(r.components[i].sci);
    const Eigen::Map<const Eigen::VectorXd> v(s.data(), static_cast<Eigen::Index>(s.size()));
    row.mean_sci = moments(s).mean;
    row.p_above = fraction_above(v, r.tau_star);
    row.predicted_informed = row.p_above > 0.5;
    row.correct = row.predicted_informed == (row.label == 1);
    if (!row.correct) row.failure = row.label == 1 ? "Type II" : "Type I";
    r.rows.push_back(row);
  }
  const ScoredSet set = score_sci(r.components, labels_of(ds));
  r.ood = evaluate(set, cfg.bootstrap, stream_seed(cfg.seed, "exp2"), cfg.threads);
  r.curve = roc_curve(set);
  return r;
}

Exp3Result run_exp3(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset ds = generate_dataset(builtin_names(), cfg.n_or(1500), cfg.seed, cfg.threads);
  const auto comps = score_components(ds, cfg.window_bins, cfg.threads);
  const auto labels = labels_of(ds);

  Exp3Result r;
  const auto cv = fit_logistic_cv(feature_matrix(comps), labels, cfg.k_folds,
                                  stream_seed(cfg.seed, "exp3/folds"));
  r.full_fit = cv.full_fit;
  r.fold_auc = cv.fold_auc;
  r.mean_fold_auc = cv.mean_fold_auc;

  std::vector<ScoredSet> sets;
  sets.push_back(cv.out_of_fold);
  sets.back().name = "logistic";
  sets.push_back(score_sci(comps, labels));
  sets.push_back(score_additive(comps, labels));
  sets.push_back(score_component(comps, labels, Component::Pr));
  sets.push_back(score_component(comps, labels, Component::OneMinusTs));
  sets.push_back(score_component(comps, labels, Component::OneMinusHhi));
  for (const auto& set : sets) {
    ClassifierRow row;
    row.name = set.name;
    row.auc = roc_auc(set);
    std::tie(row.ci_low, row.ci_high) =
        bootstrap_ci(set, cfg.bootstrap, stream_seed(cfg.seed, "exp3/" + set.name), cfg.threads);
    row.curve = roc_curve(set);
    r.rows.push_back(std::move(row));
  }
  return r;
}

Exp4WindowResult run_exp4_window(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset ds = generate_dataset(baseline_names(), cfg.n_or(2000), cfg.seed, cfg.threads);
  const auto labels = labels_of(ds);
  Exp4WindowResult r;
  for (int minutes : cfg.window_minutes) {
    WindowRow row;
    row.minutes = minutes;
    row.bins = minutes / cfg.bin_minutes;
    const ScoredSet set = score_sci(score_components(ds, row.bins, cfg.threads), labels);
    const auto op = youden_threshold(set);
    row.tau_star = op.tau;
    row.tpr = op.tpr;
    row.fpr = op.fpr;
    row.auc = roc_auc(set);
    r.rows.push_back(row);
  }
  return r;
}

Exp4SweepResult run_exp4_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  Exp4SweepResult r;
  const auto phi_specs =
      sweep_specs(builtin_spec("liquidity"), SweepParam::ArCoefficient, cfg.phi_grid);
  for (std::size_t i = 0; i < phi_specs.size(); ++i) {
    const std::vector<DgpSpec> specs{builtin_spec("informed"), phi_specs[i],
                                     builtin_spec("disagreement")};
    r.phi.push_back(sweep_point(cfg.phi_grid[i], specs, cfg, "sweep/" + phi_specs[i].name));
  }
  const auto alpha_specs =
      sweep_specs(builtin_spec("informed"), SweepParam::DirichletAlpha, cfg.alpha_grid);
  for (std::size_t i = 0; i < alpha_specs.size(); ++i) {
    const std::vector<DgpSpec> specs{alpha_specs[i], builtin_spec("liquidity"),
                                     builtin_spec("disagreement")};
    r.alpha.push_back(sweep_point(cfg.alpha_grid[i], specs, cfg, "sweep/" + alpha_specs[i].name));
  }
  return r;
}

IllustrativeResult run_illustrative(const ExperimentConfig& cfg) {
  cfg.validate();
  IllustrativeResult r;
  r.tau_star = cfg.tau_star ? *cfg.tau_star : calibrate_tau(cfg);
  const Dataset ds = generate_dataset(baseline_names(), cfg.n_or(2000), cfg.seed, cfg.threads);
  const auto comps = score_components(ds, cfg.window_bins, cfg.threads);
  const auto groups = path_groups(ds);
  struct Event {
    const char* event;
    const char* dgp;
  };
  for (const Event e : {Event{"debate", "liquidity"}, Event{"assassination_attempt", "informed"},
                        Event{"candidate_withdrawal", "disagreement"}}) {
    const DgpSummary s = summarize(e.dgp, builtin_spec(e.dgp).label, comps, groups);
    IllustrativeRow row;
    row.event = e.event;
    row.dgp = e.dgp;
    row.pr = s.pr.mean;
    row.ts = s.ts.mean;
    row.hhi = s.hhi.mean;
    row.sci = s.sci.mean;
    row.above = row.sci > r.tau_star;
    row.regime = regime_verdict(row.sci, row.ts, r.tau_star);
    row.expected_regime = e.dgp;
    r.rows.push_back(row);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Reports

std::string roc_csv(const std::vector<RocPoint>& curve) {
  std::ostringstream os;
  os << "threshold,tpr,fpr\n";
  for (const auto& p : curve) os << fmt(p.threshold) << ',' << fmt(p.tpr) << ',' << fmt(p.fpr) << '\n';
  return os.str();
}

std::string histogram_csv(const std::vector<SciComponents>& comps,
                          const std::vector<std::string>& groups, int bins) {
  std::vector<std::string> order;
  for (const auto& g : groups)
    if (std::find(order.begin(), order.end(), g) == order.end()) order.push_back(g);
  std::ostringstream os;
  os << "group,component,bin_low,bin_high,count\n";
  const char* names[] = {"pr", "ts", "hhi", "sci"};
  for (const auto& g : order) {
    for (int c = 0; c < 4; ++c) {
      std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
      for (std::size_t i = 0; i < comps.size(); ++i) {
        if (groups[i] != g) continue;
        const double v = c == 0 ? comps[i].pr : c == 1 ? comps[i].ts : c == 2 ? comps[i].hhi : comps[i].sci;
        auto b = static_cast<int>(std::floor(v * bins));
        b = std::clamp(b, 0, bins - 1);  // v = 1 belongs to the last bin
        ++counts[static_cast<std::size_t>(b)];
      }
      for (int b = 0; b < bins; ++b)
        os << g << ',' << names[c] << ',' << fmt(static_cast<double>(b) / bins) << ','
           << fmt(static_cast<double>(b + 1) / bins) << ',' << counts[static_cast<std::size_t>(b)]
           << '\n';
    }
  }
  return os.str();
}

std::string rolling_trace_csv(const std::vector<SimulatedPath>& paths, int window_bins,
                              int bin_minutes) {
  std::ostringstream os;
  os << "dgp,bin,minute,pr,ts,hhi,sci\n";
  for (const auto& p : paths) {
    const Eigen::VectorXd l = p.logits();
    const auto trace = rolling_sci(l, p.buy, p.sell, p.trader_flows(), window_bins);
    for (std::size_t t = 0; t < trace.size(); ++t) {
      if (!trace[t]) continue;
      const auto& c = *trace[t];
      os << p.dgp_name << ',' << t << ',' << t * static_cast<std::size_t>(bin_minutes) << ','
         << fmt(c.pr) << ',' << fmt(c.ts) << ',' << fmt(c.hhi) << ',' << fmt(c.sci) << '\n';
    }
  }
  return os.str();
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"exp1",        "exp2",        "exp3",
                                            "exp4_sweep",  "exp4_window", "illustrative"};
  return ids;
}

namespace {

ordered_json header(const std::string& id, const ExperimentConfig& cfg, const std::string& hash,
                    std::size_t n) {
  return {{"schema", "sci-report/1"}, {"experiment", id},      {"manifest_hash", hash},
          {"seed", cfg.seed},         {"n_per_dgp", n},        {"window_bins", cfg.window_bins},
          {"bin_minutes", cfg.bin_minutes}, {"bootstrap", cfg.bootstrap}};
}

}  // namespace

ExperimentOutput run_experiment(const std::string& id, const ExperimentConfig& cfg,
                                const std::string& manifest_hash) {
  ExperimentOutput out;
  if (id == "exp1") {
    const auto r = run_exp1(cfg);
    out.report = header(id, cfg, manifest_hash, cfg.n_or(2000));
    ordered_json dgps = ordered_json::array();
    for (const auto& d : r.dgps) dgps.push_back(summary_json(d));
    out.report["dgps"] = dgps;
    out.report["roc"] = roc_json(r.roc);
    out.series.push_back({"roc.csv", roc_csv(r.curve)});
    out.series.push_back({"histograms.csv", histogram_csv(r.components, r.dgp_of_path, cfg.histogram_bins)});
    out.series.push_back({"rolling_sci.csv", rolling_trace_csv(representative_paths(cfg),
                                                               cfg.rolling_window_bins, cfg.bin_minutes)});
  } else if (id == "exp2") {
    const auto r = run_exp2(cfg);
    out.report = header(id, cfg, manifest_hash, cfg.n_or(2000));
    out.report["tau_star"] = r.tau_star;
    out.report["tau_star_source"] = r.tau_calibrated ? "calibrated" : "manifest";
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"name", row.name},
                      {"label", row.label},
                      {"mean_sci", row.mean_sci},
                      {"p_above_tau", row.p_above},
                      {"predicted", row.predicted_informed ? "informed" : "not informed"},
                      {"correct", row.correct},
                      {"failure", row.failure}});
    out.report["dgps"] = rows;
    out.report["combined_ood"] = roc_json(r.ood);
    out.series.push_back({"roc.csv", roc_csv(r.curve)});
    out.series.push_back({"histograms.csv", histogram_csv(r.components, r.dgp_of_path, cfg.histogram_bins)});
  } else if (id == "exp3") {
    const auto r = run_exp3(cfg);
    out.report = header(id, cfg, manifest_hash, cfg.n_or(1500));
    ordered_json rows = ordered_json::array();
    std::ostringstream roc;
    roc << "classifier,threshold,tpr,fpr\n";
    for (const auto& row : r.rows) {
      rows.push_back({{"name", row.name}, {"auc", row.auc}, {"ci_low", row.ci_low}, {"ci_high", row.ci_high}});
      for (const auto& p : row.curve)
        roc << row.name << ',' << fmt(p.threshold) << ',' << fmt(p.tpr) << ',' << fmt(p.fpr) << '\n';
    }
    out.report["classifiers"] = rows;
    out.report["logistic"] = {
        {"coefficients",
         {{"pr", r.full_fit.coefficients[0]},
          {"one_minus_ts", r.full_fit.coefficients[1]},
          {"one_minus_hhi", r.full_fit.coefficients[2]}}},
        {"intercept", r.full_fit.intercept},
        {"iterations", r.full_fit.iterations},
        {"ridge_applied", r.full_fit.ridge_applied},
        {"k_folds", cfg.k_folds},
        {"fold_auc", r.fold_auc},
        {"mean_fold_auc", r.mean_fold_auc}};
    out.series.push_back({"roc.csv", roc.str()});
  } else if (id == "exp4_window") {
    const auto r = run_exp4_window(cfg);
    out.report = header(id, cfg, manifest_hash, cfg.n_or(2000));
    ordered_json rows = ordered_json::array();
    std::ostringstream csv;
    csv << "minutes,bins,tau_star,tpr,fpr,auc\n";
    for (const auto& row : r.rows) {
      rows.push_back({{"minutes", row.minutes}, {"bins", row.bins}, {"tau_star", row.tau_star},
                      {"tpr", row.tpr}, {"fpr", row.fpr}, {"auc", row.auc}});
      csv << row.minutes << ',' << row.bins << ',' << fmt(row.tau_star) << ',' << fmt(row.tpr)
          << ',' << fmt(row.fpr) << ',' << fmt(row.auc) << '\n';
    }
    out.report["windows"] = rows;
    out.series.push_back({"windows.csv", csv.str()});
  } else if (id == "exp4_sweep") {
    const auto r = run_exp4_sweep(cfg);
    out.report = header(id, cfg, manifest_hash, cfg.n_or(2000));
    out.report["phi"] = {{"dgp", "liquidity"}, {"rows", sweep_json(r.phi)}};
    out.report["alpha"] = {{"dgp", "informed"}, {"rows", sweep_json(r.alpha)}};
    out.series.push_back({"sweep_phi.csv", sweep_csv("phi", r.phi)});
    out.series.push_back({"sweep_alpha.csv", sweep_csv("alpha", r.alpha)});
  } else if (id == "illustrative") {
    const auto r = run_illustrative(cfg);
    out.report = header(id, cfg, manifest_hash, cfg.n_or(2000));
    out.report["tau_star"] = r.tau_star;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"event", row.event}, {"dgp", row.dgp}, {"pr", row.pr}, {"ts", row.ts},
                      {"hhi", row.hhi}, {"sci", row.sci}, {"above_tau", row.above},
                      {"regime", row.regime}});
    out.report["events"] = rows;
  } else {
    throw ConfigError("unknown experiment id '" + id + "'");
  }
  return out;
}

}  // namespace sci
