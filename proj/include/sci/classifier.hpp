#pragma once

// ROC analysis, bootstrap intervals, Youden calibration and the logistic
// benchmark.

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sci/core_metrics.hpp"
#include "sci/dgp.hpp"

namespace sci {

struct ScoredSet {
  std::string name;
  Eigen::VectorXd scores;
  Eigen::VectorXi labels;

  ScoredSet() = default;
  ScoredSet(std::string n, Eigen::VectorXd s, Eigen::VectorXi y);

  Eigen::Index size() const noexcept { return scores.size(); }
  Eigen::Index positives() const noexcept { return labels.sum(); }
  Eigen::Index negatives() const noexcept { return labels.size() - labels.sum(); }
};

struct RocPoint {
  double threshold;  // classify positive when score > threshold
  double tpr;
  double fpr;
};

struct OperatingPoint {
  double tau;
  double tpr;
  double fpr;
};

struct RocResult {
  double auc{0.5};
  double ci_low{0.5};
  double ci_high{0.5};
  double tau_star{0.0};
  double tpr{0.0};
  double fpr{0.0};
};

/// Mann-Whitney AUC with midranks (ties count one half). Throws DomainError
/// when only one class is present.
double roc_auc(const ScoredSet& set);

/// ROC from the threshold sweep over unique scores, from (0,0) to (1,1).
std::vector<RocPoint> roc_curve(const ScoredSet& set);

/// Maximizes TPR - FPR over the cuts between adjacent unique scores.
/// tau is the midpoint of the chosen gap; ties go to the larger tau.
OperatingPoint youden_threshold(const ScoredSet& set);

/// Percentile 2.5/97.5 AUC bounds over B label-stratified path resamples.
/// Each resample has its own seeded stream.
std::pair<double, double> bootstrap_ci(const ScoredSet& set, int resamples, std::uint64_t seed,
                                       unsigned threads = 0);

/// AUC, bootstrap CI and the Youden operating point together.
RocResult evaluate(const ScoredSet& set, int resamples, std::uint64_t seed, unsigned threads = 0);

/// Empirical fraction of scores strictly above tau.
double fraction_above(const Eigen::VectorXd& scores, double tau);

// ---------------------------------------------------------------------------
// Scoring

/// Components for every path, on bins [0, window_bins).
std::vector<SciComponents> score_components(const Dataset& ds, int window_bins,
                                            unsigned threads = 0);

enum class Component { Pr, OneMinusTs, OneMinusHhi };

Eigen::VectorXi labels_of(const Dataset& ds);

ScoredSet score_sci(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels);
ScoredSet score_weighted(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels,
                         const Weights<double>& w);
/// [PR + (1 - TS) + (1 - HHI)] / 3.
ScoredSet score_additive(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels);
ScoredSet score_component(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels,
                          Component which);

/// (PR, 1 - TS, 1 - HHI) rows; no-trade paths are all zeros.
Eigen::MatrixXd feature_matrix(const std::vector<SciComponents>& comps);

// ---------------------------------------------------------------------------
// Logistic benchmark

struct LogisticOptions {
  int max_iterations{100};
  double gradient_tolerance{1e-8};
  double ridge_fallback{1e-6};
};

struct LogisticModel {
  Eigen::VectorXd coefficients;
  double intercept{0.0};
  int iterations{0};
  bool ridge_applied{false};  // separation detected, ridge penalty used
  double gradient_norm{0.0};

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& features) const;
};

/// Maximum-likelihood fit by iteratively reweighted least squares.
/// Throws ConvergenceError when the gradient norm stays above tolerance.
LogisticModel fit_logistic(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                           const LogisticOptions& options = {});

/// Stratified fold index per row: each fold holds every k-th row of each
/// class after a seeded shuffle.
Eigen::VectorXi stratified_folds(const Eigen::VectorXi& labels, int k, std::uint64_t seed);

struct LogisticCvResult {
  LogisticModel full_fit;
  ScoredSet out_of_fold;         // pooled probabilities
  std::vector<double> fold_auc;  // per-fold AUCs
  double mean_fold_auc{0.0};
};

LogisticCvResult fit_logistic_cv(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                                 int k_folds, std::uint64_t seed,
                                 const LogisticOptions& options = {});

}  // namespace sci
