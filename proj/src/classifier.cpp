#include "sci/classifier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sci/errors.hpp"
#include "sci/parallel.hpp"
#include "sci/rng.hpp"

namespace sci {

ScoredSet::ScoredSet(std::string n, Eigen::VectorXd s, Eigen::VectorXi y)
    : name(std::move(n)), scores(std::move(s)), labels(std::move(y)) {
  if (scores.size() != labels.size()) throw DomainError("scored set: length mismatch");
  if (((labels.array() != 0) && (labels.array() != 1)).any())
    throw DomainError("scored set: labels must be 0 or 1");
}

namespace {

void require_both_classes(const ScoredSet& set) {
  if (set.positives() == 0 || set.negatives() == 0)
    throw DomainError("ROC analysis needs both classes (set '" + set.name + "')");
}

std::vector<Eigen::Index> order_by_score(const Eigen::VectorXd& scores) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });
  return idx;
}

double auc_from(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  const auto idx = order_by_score(scores);
  const std::size_t n = idx.size();
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[idx[k]] == 1) rank_sum += midrank;
    i = j + 1;
  }
  const double n1 = labels.sum();
  const double n0 = static_cast<double>(n) - n1;
  return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

struct Cut {
  double tau;
  Eigen::Index tp;
  Eigen::Index fp;
};

// Cuts in decreasing tau: tau = max score first, then the midpoint of each
// gap between adjacent unique scores, then just below the minimum.
std::vector<Cut> sweep_cuts(const ScoredSet& set) {
  const auto idx = order_by_score(set.scores);
  std::vector<Cut> cuts;
  Eigen::Index tp = 0, fp = 0;
  std::size_t j = idx.size();
  cuts.push_back({set.scores[idx.back()], 0, 0});
  while (j > 0) {
    const double value = set.scores[idx[j - 1]];
    while (j > 0 && set.scores[idx[j - 1]] == value) {
      if (set.labels[idx[j - 1]] == 1) ++tp;
      else ++fp;
      --j;
    }
    const double tau = j > 0 ? 0.5 * (value + set.scores[idx[j - 1]])
                             : std::nextafter(value, -std::numeric_limits<double>::infinity());
    cuts.push_back({tau, tp, fp});
  }
  return cuts;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double roc_auc(const ScoredSet& set) {
  require_both_classes(set);
  return auc_from(set.scores, set.labels);
}

std::vector<RocPoint> roc_curve(const ScoredSet& set) {
  require_both_classes(set);
  const double p = static_cast<double>(set.positives());
  const double n = static_cast<double>(set.negatives());
  std::vector<RocPoint> out;
  for (const auto& c : sweep_cuts(set))
    out.push_back({c.tau, static_cast<double>(c.tp) / p, static_cast<double>(c.fp) / n});
  return out;
}

OperatingPoint youden_threshold(const ScoredSet& set) {
  require_both_classes(set);
  const Eigen::Index p = set.positives();
  const Eigen::Index n = set.negatives();
  const auto cuts = sweep_cuts(set);
  // J * P * N in integers, so ties are exact.
  const Cut* best = &cuts.front();
  auto j_scaled = [&](const Cut& c) { return c.tp * n - c.fp * p; };
  for (const auto& c : cuts)
    if (j_scaled(c) > j_scaled(*best)) best = &c;
  return {best->tau, static_cast<double>(best->tp) / static_cast<double>(p),
          static_cast<double>(best->fp) / static_cast<double>(n)};
}

std::pair<double, double> bootstrap_ci(const ScoredSet& set, int resamples, std::uint64_t seed,
                                       unsigned threads) {
  require_both_classes(set);
  if (resamples < 100) throw ConfigError("bootstrap needs at least 100 resamples");
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < set.size(); ++i) (set.labels[i] == 1 ? pos : neg).push_back(i);
  const Eigen::Index n = set.size();
  std::vector<double> aucs(static_cast<std::size_t>(resamples));
  parallel_for(aucs.size(), threads, [&](std::size_t b) {
    Stream rng = Stream::derive(seed, 0xb007, b);
    Eigen::VectorXd s(n);
    Eigen::VectorXi y(n);
    Eigen::Index k = 0;
    for (const auto* group : {&pos, &neg}) {
      const auto m = static_cast<std::int64_t>(group->size());
      for (std::int64_t r = 0; r < m; ++r) {
        const auto pick = (*group)[static_cast<std::size_t>(rng.uniform_int(0, m - 1))];
        s[k] = set.scores[pick];
        y[k] = set.labels[pick];
        ++k;
      }
    }
    aucs[b] = auc_from(s, y);
  });
  std::sort(aucs.begin(), aucs.end());
  return {quantile_sorted(aucs, 0.025), quantile_sorted(aucs, 0.975)};
}

RocResult evaluate(const ScoredSet& set, int resamples, std::uint64_t seed, unsigned threads) {
  RocResult r;
  r.auc = roc_auc(set);
  std::tie(r.ci_low, r.ci_high) = bootstrap_ci(set, resamples, seed, threads);
  const auto op = youden_threshold(set);
  r.tau_star = op.tau;
  r.tpr = op.tpr;
  r.fpr = op.fpr;
  return r;
}

double fraction_above(const Eigen::VectorXd& scores, double tau) {
  if (scores.size() == 0) return 0.0;
  return static_cast<double>((scores.array() > tau).count()) / static_cast<double>(scores.size());
}

std::vector<SciComponents> score_components(const Dataset& ds, int window_bins, unsigned threads) {
  std::vector<SciComponents> out(ds.paths.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const auto& p = ds.paths[i];
    const Eigen::VectorXd l = p.logits();
    out[i] = compute_sci_for_shock(l, p.buy, p.sell, p.trader_flows(), 0, window_bins);
  });
  return out;
}

Eigen::VectorXi labels_of(const Dataset& ds) {
  Eigen::VectorXi y(static_cast<Eigen::Index>(ds.paths.size()));
  for (std::size_t i = 0; i < ds.paths.size(); ++i) y[static_cast<Eigen::Index>(i)] = ds.paths[i].label;
  return y;
}

namespace {

template <typename Fn>
ScoredSet score_with(std::string name, const std::vector<SciComponents>& comps,
                     const Eigen::VectorXi& labels, Fn&& fn) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i)
    s[static_cast<Eigen::Index>(i)] = comps[i].no_trade ? 0.0 : fn(comps[i]);
  return ScoredSet(std::move(name), std::move(s), labels);
}

}  // namespace

ScoredSet score_sci(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels) {
  return score_with("sci", comps, labels, [](const SciComponents& c) { return c.sci; });
}

ScoredSet score_weighted(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels,
                         const Weights<double>& w) {
  return score_with("weighted_sci", comps, labels,
                    [&](const SciComponents& c) { return weighted_sci(c, w); });
}

ScoredSet score_additive(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels) {
  return score_with("additive", comps, labels, [](const SciComponents& c) {
    return (c.pr + (1.0 - c.ts) + (1.0 - c.hhi)) / 3.0;
  });
}

ScoredSet score_component(const std::vector<SciComponents>& comps, const Eigen::VectorXi& labels,
                          Component which) {
  switch (which) {
    case Component::Pr:
      return score_with("pr", comps, labels, [](const SciComponents& c) { return c.pr; });
    case Component::OneMinusTs:
      return score_with("one_minus_ts", comps, labels,
                        [](const SciComponents& c) { return 1.0 - c.ts; });
    case Component::OneMinusHhi:
      return score_with("one_minus_hhi", comps, labels,
                        [](const SciComponents& c) { return 1.0 - c.hhi; });
  }
  throw DomainError("unknown component");
}

Eigen::MatrixXd feature_matrix(const std::vector<SciComponents>& comps) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(comps.size()), 3);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    if (c.no_trade) continue;
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = c.pr;
    x(r, 1) = 1.0 - c.ts;
    x(r, 2) = 1.0 - c.hhi;
  }
  return x;
}

Eigen::VectorXd LogisticModel::predict_proba(const Eigen::MatrixXd& features) const {
  const Eigen::VectorXd eta = (features * coefficients).array() + intercept;
  return (1.0 / (1.0 + (-eta.array()).exp())).matrix();
}

namespace {

struct IrlsOutcome {
  Eigen::VectorXd beta;
  int iterations;
  double gradient_norm;
  bool converged;
};

double log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                      double ridge) {
  const Eigen::ArrayXd eta = (x * beta).array();
  // log(1 + exp(eta)) without overflow.
  const Eigen::ArrayXd softplus = eta.max(0.0) + (-eta.abs()).exp().log1p();
  return (y.array() * eta - softplus).sum() - 0.5 * ridge * beta.tail(beta.size() - 1).squaredNorm();
}

IrlsOutcome irls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge,
                 const LogisticOptions& opt) {
  const Eigen::Index p = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, ridge);
  penalty[0] = 0.0;  // intercept is never penalized

  double ll = log_likelihood(x, y, beta, ridge);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Eigen::VectorXd prob = (1.0 / (1.0 + (-(x * beta).array()).exp())).matrix();
    const Eigen::VectorXd grad = x.transpose() * (y - prob) - penalty.cwiseProduct(beta);
    const double gnorm = grad.norm();
    if (gnorm < opt.gradient_tolerance) return {beta, it - 1, gnorm, true};
    const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    Eigen::MatrixXd hessian = x.transpose() * w.asDiagonal() * x;
    hessian.diagonal() += penalty;
    const Eigen::VectorXd step = hessian.ldlt().solve(grad);
    if (!step.allFinite()) return {beta, it, gnorm, false};
    // Step halving keeps each iteration an ascent step.
    double scale = 1.0;
    Eigen::VectorXd next = beta + step;
    double next_ll = log_likelihood(x, y, next, ridge);
    while (next_ll < ll - 1e-12 * std::abs(ll) && scale > 1e-6) {
      scale *= 0.5;
      next = beta + scale * step;
      next_ll = log_likelihood(x, y, next, ridge);
    }
    beta = next;
    ll = next_ll;
    if (beta.cwiseAbs().maxCoeff() > 1e3) return {beta, it, gnorm, false};
  }
  const Eigen::VectorXd prob = (1.0 / (1.0 + (-(x * beta).array()).exp())).matrix();
  const double gnorm = (x.transpose() * (y - prob) - penalty.cwiseProduct(beta)).norm();
  return {beta, opt.max_iterations, gnorm, gnorm < opt.gradient_tolerance};
}

// A finite fit that classifies every row strictly correctly can only come from
// separable data, where the gradient vanishes numerically before the MLE exists.
bool separates(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if ((labels[i] == 1 ? eta[i] : -eta[i]) <= 0.0) return false;
  return true;
}

}  // namespace

LogisticModel fit_logistic(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                           const LogisticOptions& options) {
  if (features.rows() != labels.size()) throw DomainError("logistic: row/label mismatch");
  if (labels.sum() == 0 || labels.sum() == labels.size())
    throw DomainError("logistic: both classes required");
  Eigen::MatrixXd x(features.rows(), features.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(features.cols()) = features;
  const Eigen::VectorXd y = labels.cast<double>();

  IrlsOutcome fit = irls(x, y, 0.0, options);
  bool ridge = false;
  if (!fit.converged || separates(x, labels, fit.beta)) {
    // Quasi-separation drives coefficients to infinity; the ridge keeps them finite.
    fit = irls(x, y, options.ridge_fallback, options);
    ridge = true;
    if (!fit.converged)
      throw ConvergenceError("logistic regression did not converge: gradient norm " +
                             std::to_string(fit.gradient_norm) + " after " +
                             std::to_string(fit.iterations) + " iterations");
  }
  LogisticModel m;
  m.intercept = fit.beta[0];
  m.coefficients = fit.beta.tail(features.cols());
  m.iterations = fit.iterations;
  m.ridge_applied = ridge;
  m.gradient_norm = fit.gradient_norm;
  return m;
}

Eigen::VectorXi stratified_folds(const Eigen::VectorXi& labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  Eigen::VectorXi fold(labels.size());
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    Stream rng = Stream::derive(seed, 0xf01d, static_cast<std::uint64_t>(cls));
    for (std::size_t i = idx.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(idx[i - 1], idx[j]);
    }
    for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

LogisticCvResult fit_logistic_cv(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                                 int k_folds, std::uint64_t seed, const LogisticOptions& options) {
  const Eigen::VectorXi fold = stratified_folds(labels, k_folds, seed);
  Eigen::VectorXd oof(labels.size());
  LogisticCvResult out;
  for (int f = 0; f < k_folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < labels.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    const Eigen::VectorXi test_labels = labels(test);
    if (test_labels.sum() == 0 || test_labels.sum() == test_labels.size())
      throw DomainError("cross-validation fold " + std::to_string(f) + " lacks a class");
    const LogisticModel m = fit_logistic(features(train, Eigen::all), labels(train), options);
    const Eigen::VectorXd p = m.predict_proba(features(test, Eigen::all));
    oof(test) = p;
    out.fold_auc.push_back(roc_auc(ScoredSet("fold", p, test_labels)));
  }
  out.mean_fold_auc = std::accumulate(out.fold_auc.begin(), out.fold_auc.end(), 0.0) /
                      static_cast<double>(out.fold_auc.size());
  out.out_of_fold = ScoredSet("logistic_cv", oof, labels);
  out.full_fit = fit_logistic(features, labels, options);
  return out;
}

}  // namespace sci
