#pragma once

// Monte Carlo experiment runners. Each returns a typed result; `run_experiment`
// wraps them into a JSON report plus CSV plot series.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sci/classifier.hpp"
#include "sci/core_metrics.hpp"
#include "sci/dgp.hpp"

namespace sci {

struct ExperimentConfig {
  std::optional<std::size_t> n_per_dgp;  // unset: 2000, or 1500 for exp3
  std::uint64_t seed{kDefaultSeed};
  int window_bins{48};
  int bin_minutes{5};
  int bootstrap{1000};
  std::optional<double> tau_star;  // unset: calibrated by an exp1 run
  std::vector<double> phi_grid{-0.9, -0.75, -0.6, -0.45, -0.3, -0.15, 0.0};
  std::vector<double> alpha_grid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<int> window_minutes{60, 120, 180, 240};
  int k_folds{5};
  int rolling_window_bins{12};
  int histogram_bins{50};
  unsigned threads{0};

  std::size_t n_or(std::size_t fallback) const { return n_per_dgp.value_or(fallback); }
  void validate() const;
};

struct Moments {
  double mean{0.0};
  double sd{0.0};
};

struct DgpSummary {
  std::string name;
  int label{0};
  std::size_t n{0};
  Moments pr, ts, hhi, sci;
  double corr_pr_ts{0.0}, corr_pr_hhi{0.0}, corr_ts_hhi{0.0};
  std::size_t no_trade{0};
};

struct Exp1Result {
  std::vector<DgpSummary> dgps;
  RocResult roc;
  std::vector<RocPoint> curve;
  std::vector<SciComponents> components;
  Eigen::VectorXi labels;
  std::vector<std::string> dgp_of_path;
};

struct Exp2Row {
  std::string name;
  int label{0};
  double mean_sci{0.0};
  double p_above{0.0};
  bool predicted_informed{false};
  bool correct{false};
  std::string failure;  // "Type I", "Type II" or empty
};

struct Exp2Result {
  double tau_star{0.0};
  bool tau_calibrated{false};
  std::vector<Exp2Row> rows;
  RocResult ood;
  std::vector<RocPoint> curve;
  std::vector<SciComponents> components;
  std::vector<std::string> dgp_of_path;
};

struct ClassifierRow {
  std::string name;
  double auc{0.0};
  double ci_low{0.0};
  double ci_high{0.0};
  std::vector<RocPoint> curve;
};

struct Exp3Result {
  std::vector<ClassifierRow> rows;  // logistic, sci, additive, pr, 1-ts, 1-hhi
  LogisticModel full_fit;
  std::vector<double> fold_auc;
  double mean_fold_auc{0.0};

  const ClassifierRow& row(const std::string& name) const;
};

struct WindowRow {
  int minutes{0};
  int bins{0};
  double tau_star{0.0};
  double tpr{0.0};
  double fpr{0.0};
  double auc{0.0};
};

struct Exp4WindowResult {
  std::vector<WindowRow> rows;
};

struct SweepRow {
  double value{0.0};
  RocResult roc;
  double mean_sci_positive{0.0};
  double mean_sci_negative{0.0};
};

struct Exp4SweepResult {
  std::vector<SweepRow> phi;    // liquidity AR coefficient
  std::vector<SweepRow> alpha;  // informed Dirichlet concentration
};

struct IllustrativeRow {
  std::string event;
  std::string dgp;
  double pr{0.0}, ts{0.0}, hhi{0.0}, sci{0.0};
  bool above{false};
  std::string regime;
  std::string expected_regime;
};

struct IllustrativeResult {
  double tau_star{0.0};
  std::vector<IllustrativeRow> rows;
};

/// Regime verdict for one decomposition: above tau is informed updating;
/// otherwise TS above one half is disagreement, else liquidity pressure.
std::string regime_verdict(double sci_value, double ts, double tau);

Exp1Result run_exp1(const ExperimentConfig& cfg);
Exp2Result run_exp2(const ExperimentConfig& cfg);
Exp3Result run_exp3(const ExperimentConfig& cfg);
Exp4WindowResult run_exp4_window(const ExperimentConfig& cfg);
Exp4SweepResult run_exp4_sweep(const ExperimentConfig& cfg);
IllustrativeResult run_illustrative(const ExperimentConfig& cfg);

/// Youden threshold of the exp1 set, without the bootstrap.
double calibrate_tau(const ExperimentConfig& cfg);

struct SeriesFile {
  std::string name;  // file name, e.g. "roc.csv"
  std::string csv;
};

struct ExperimentOutput {
  nlohmann::ordered_json report;
  std::vector<SeriesFile> series;
};

const std::vector<std::string>& experiment_ids();

/// Throws ConfigError on an unknown id. The manifest hash is embedded in the
/// report header.
ExperimentOutput run_experiment(const std::string& id, const ExperimentConfig& cfg,
                                const std::string& manifest_hash);

// Plot series helpers, exposed for the CLI.
std::string roc_csv(const std::vector<RocPoint>& curve);
std::string histogram_csv(const std::vector<SciComponents>& comps,
                          const std::vector<std::string>& groups, int bins);
std::string rolling_trace_csv(const std::vector<SimulatedPath>& paths, int window_bins,
                              int bin_minutes);

}  // namespace sci
