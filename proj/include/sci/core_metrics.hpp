#pragma once

// Index mathematics: logit transforms, the three components, the baseline,
// weighted and rolling index, and the alarm rule.
//
// Functions are templated on the Eigen expression type so they accept
// vectors, segments and maps of any floating scalar. Everything here is pure.

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sci/errors.hpp"
#include "sci/flows.hpp"

namespace sci {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Gross logit movement below this value triggers the no-trade guard.
inline constexpr double kNoTradeEpsilon = 1e-9;

/// Alarms lasting longer than this are flagged as sustained.
inline constexpr std::chrono::minutes kSustainedAlarm{60};

template <typename Scalar = double>
class Probability {
 public:
  explicit Probability(Scalar value) : value_(value) {
    if (!(value > Scalar(0) && value < Scalar(1)))
      throw DomainError("probability must lie in the open interval (0,1)");
  }
  Scalar value() const noexcept { return value_; }

 private:
  Scalar value_;
};

template <typename Scalar>
struct VolumePair {
  Scalar buy{0};
  Scalar sell{0};

  VolumePair() = default;
  VolumePair(Scalar b, Scalar s) : buy(b), sell(s) {
    if (!(b >= Scalar(0)) || !(s >= Scalar(0)))
      throw DomainError("volumes must be nonnegative");
  }
};

/// (PR, TS, HHI_flow) and their product. A no-trade window carries all
/// zeros with `no_trade` set; the component bounds hold otherwise.
template <typename Scalar>
struct Components {
  Scalar pr{0};
  Scalar ts{0};
  Scalar hhi{0};
  Scalar sci{0};
  bool no_trade{false};
};

using SciComponents = Components<double>;

/// Cobb-Douglas exponents on PR, (1 - TS) and (1 - HHI).
template <typename Scalar = double>
class Weights {
 public:
  Weights(Scalar a1, Scalar a2, Scalar a3) : a_{a1, a2, a3} {
    if (!(a1 > 0 && a2 > 0 && a3 > 0)) throw DomainError("weights must be strictly positive");
  }

  /// Weights that must sum to 3 within 1e-9.
  static Weights normalized(Scalar a1, Scalar a2, Scalar a3) {
    Weights w(a1, a2, a3);
    using std::abs;
    if (abs(a1 + a2 + a3 - Scalar(3)) > Scalar(1e-9))
      throw DomainError("normalized weights must sum to 3");
    return w;
  }

  static Weights balanced() { return {1, 1, 1}; }
  static Weights persistence_weighted() { return {1.5, 1, 0.5}; }
  static Weights breadth_weighted() { return {0.5, 1, 1.5}; }

  Scalar alpha1() const noexcept { return a_[0]; }
  Scalar alpha2() const noexcept { return a_[1]; }
  Scalar alpha3() const noexcept { return a_[2]; }
  Scalar sum() const noexcept { return a_[0] + a_[1] + a_[2]; }

 private:
  Scalar a_[3];
};

struct AlarmSummary {
  std::optional<Eigen::Index> onset;
  std::chrono::minutes duration{0};
  std::optional<std::chrono::minutes> decay_time;
  std::optional<Eigen::Index> peak;
  bool sustained{false};
};

// ---------------------------------------------------------------------------
// Transforms

template <typename Scalar>
Scalar logit(Probability<Scalar> p) {
  using std::log;
  return log(p.value() / (Scalar(1) - p.value()));
}

/// Element-wise logit; every entry must lie in (0,1).
template <typename Derived>
Vector<typename Derived::Scalar> logit(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = logit(Probability<Scalar>(p[i]));
  return out;
}

/// 1 / (1 + exp(-l)). No clipping: extreme inputs saturate in floating point.
template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar inverse_logit(Scalar l) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-l));
}

template <typename Derived>
Vector<typename Derived::Scalar> inverse_logit(const Eigen::MatrixBase<Derived>& l) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) / (Scalar(1) + (-l.derived().array()).exp())).matrix();
}

/// First differences l[t+1] - l[t].
template <typename Derived>
Vector<typename Derived::Scalar> logit_returns(const Eigen::MatrixBase<Derived>& path) {
  const Eigen::Index n = path.size();
  if (n < 2) throw InsufficientDataError("logit returns need at least two observations");
  return path.tail(n - 1) - path.head(n - 1);
}

namespace detail {

template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar mean = x.mean();
  return (x.array() - mean).square().sum() / Scalar(x.size() - 1);
}

}  // namespace detail

/// Var(k-period returns) / (k Var(1-period returns)) on non-overlapping
/// k-period returns. Kept as a reference diagnostic: it needs at least two
/// k-period returns, i.e. 2k + 1 observations.
template <typename Derived>
typename Derived::Scalar variance_ratio(const Eigen::MatrixBase<Derived>& path, Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  if (k < 1) throw DomainError("variance ratio: k must be at least 1");
  const Eigen::Index n = path.size();
  if (n < 2 * k + 1)
    throw InsufficientDataError("variance ratio: need at least " + std::to_string(2 * k + 1) +
                                " observations, got " + std::to_string(n));
  const Vector<Scalar> one = logit_returns(path);
  const Eigen::Index m = (n - 1) / k;
  Vector<Scalar> multi(m);
  for (Eigen::Index j = 0; j < m; ++j) multi[j] = path[(j + 1) * k] - path[j * k];
  const Scalar var1 = detail::sample_variance(one);
  const Scalar vark = detail::sample_variance(multi);
  if (!(var1 > Scalar(0)))
    throw InsufficientDataError("variance ratio: one-period returns have zero variance");
  return vark / (Scalar(k) * var1);
}

template <typename Scalar>
struct PersistenceTerms {
  Scalar net{0};    // |l[t] - l[t-w]|
  Scalar gross{0};  // sum of |l[tau] - l[tau-1]| over tau in (t-w, t]
};

template <typename Derived>
PersistenceTerms<typename Derived::Scalar> persistence_terms(
    const Eigen::MatrixBase<Derived>& path, Eigen::Index t, Eigen::Index w) {
  using std::abs;
  if (w < 1) throw WindowError("persistence ratio: window must span at least one increment");
  if (t - w < 0 || t >= path.size())
    throw WindowError("persistence ratio: window [t-w, t] outside the path");
  const auto seg = path.segment(t - w, w + 1);
  PersistenceTerms<typename Derived::Scalar> terms;
  terms.net = abs(path[t] - path[t - w]);
  terms.gross = (seg.tail(w) - seg.head(w)).cwiseAbs().sum();
  return terms;
}

/// Net over gross logit movement on (t-w, t]. Returns nullopt for a
/// no-trade window (gross movement below kNoTradeEpsilon).
template <typename Derived>
std::optional<typename Derived::Scalar> persistence_ratio(const Eigen::MatrixBase<Derived>& path,
                                                          Eigen::Index t, Eigen::Index w) {
  using Scalar = typename Derived::Scalar;
  const auto terms = persistence_terms(path, t, w);
  if (terms.gross < Scalar(kNoTradeEpsilon)) return std::nullopt;
  const auto seg = path.segment(t - w, w + 1);
  const auto inc = (seg.tail(w) - seg.head(w)).eval();
  // Telescoping makes the ratio exactly 1 for a monotone window; evaluate it
  // that way rather than through a rounded division.
  if ((inc.array() >= Scalar(0)).all() || (inc.array() <= Scalar(0)).all()) return Scalar(1);
  return std::min(terms.net / terms.gross, Scalar(1));
}

template <typename Scalar>
Scalar two_sidedness(const VolumePair<Scalar>& v) {
  using std::abs;
  const Scalar total = v.buy + v.sell;
  if (!(total > Scalar(0))) throw ZeroVolumeError("two-sidedness: zero total volume");
  return Scalar(1) - abs(v.buy - v.sell) / total;
}

/// Herfindahl index of absolute flow shares. Zero-flow traders carry no
/// weight and are ignored.
template <typename Derived>
typename Derived::Scalar hhi_flow(const Eigen::MatrixBase<Derived>& flows) {
  using Scalar = typename Derived::Scalar;
  const auto magnitude = flows.cwiseAbs().eval();
  const Scalar total = magnitude.sum();
  if (!(total > Scalar(0))) throw ZeroFlowError("flow HHI: no trader with nonzero flow");
  return (magnitude / total).squaredNorm();
}

inline double hhi_flow(const TraderFlows& flows) { return hhi_flow(flows.values()); }

namespace detail {

template <typename Scalar>
void check_components(Scalar pr, Scalar ts, Scalar hhi) {
  if (!(pr >= Scalar(0) && pr <= Scalar(1))) throw DomainError("PR must lie in [0,1]");
  if (!(ts >= Scalar(0) && ts <= Scalar(1))) throw DomainError("TS must lie in [0,1]");
  if (!(hhi > Scalar(0) && hhi <= Scalar(1))) throw DomainError("HHI must lie in (0,1]");
}

}  // namespace detail

/// PR (1 - TS) (1 - HHI), multiplied in that order.
template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar sci(Scalar pr, Scalar ts, Scalar hhi) {
  detail::check_components(pr, ts, hhi);
  return pr * (Scalar(1) - ts) * (Scalar(1) - hhi);
}

template <typename Scalar>
Components<Scalar> make_components(Scalar pr, Scalar ts, Scalar hhi) {
  return {pr, ts, hhi, sci(pr, ts, hhi), false};
}

template <typename Scalar>
Scalar weighted_sci(Scalar pr, Scalar ts, Scalar hhi, const Weights<Scalar>& w) {
  using std::pow;
  detail::check_components(pr, ts, hhi);
  return pow(pr, w.alpha1()) * pow(Scalar(1) - ts, w.alpha2()) *
         pow(Scalar(1) - hhi, w.alpha3());
}

template <typename Scalar>
Scalar weighted_sci(const Components<Scalar>& c, const Weights<Scalar>& w) {
  if (c.no_trade) return Scalar(0);
  return weighted_sci(c.pr, c.ts, c.hhi, w);
}

/// Index for one shock window, following the shock-event algorithm:
/// no-trade guard, PR over [shock, shock + window], TS on summed volumes,
/// optional wallet clustering, HHI, product.
///
/// `logits` holds window + 1 or more observations; volume bin b covers the
/// move from logits[b] to logits[b + 1], so `buy` and `sell` have one entry
/// fewer than `logits`.
template <typename DL, typename DB, typename DS>
Components<typename DL::Scalar> compute_sci_for_shock(const Eigen::MatrixBase<DL>& logits,
                                                      const Eigen::MatrixBase<DB>& buy,
                                                      const Eigen::MatrixBase<DS>& sell,
                                                      const TraderFlows& flows, Eigen::Index shock,
                                                      Eigen::Index window,
                                                      const ClusterMap* clusters = nullptr) {
  using Scalar = typename DL::Scalar;
  if (buy.size() != logits.size() - 1 || sell.size() != logits.size() - 1)
    throw DomainError("volume series must have one entry per price increment");
  if (window < 1) throw WindowError("window must span at least one bin");
  if (shock < 0 || shock + window >= logits.size())
    throw WindowError("shock window extends beyond the data");

  Components<Scalar> out;
  out.no_trade = true;

  const auto terms = persistence_terms(logits, shock + window, window);
  if (terms.gross < Scalar(kNoTradeEpsilon)) return out;
  const Scalar pr = *persistence_ratio(logits, shock + window, window);

  const Scalar b = buy.segment(shock, window).sum();
  const Scalar s = sell.segment(shock, window).sum();
  if (!(b + s > Scalar(0))) return out;
  const Scalar ts = two_sidedness(VolumePair<Scalar>(b, s));

  const TraderFlows clustered = clusters ? clusters->aggregate(flows) : flows;
  if (!clustered.has_nonzero()) return out;
  const Scalar hhi = static_cast<Scalar>(hhi_flow(clustered));

  return make_components(pr, ts, hhi);
}

/// Rolling index on trailing windows (t - w, t]. Entry t is empty for
/// t < w. Window flows are the sum of the per-bin flows it covers.
template <typename DL, typename DB, typename DS>
std::vector<std::optional<Components<typename DL::Scalar>>> rolling_sci(
    const Eigen::MatrixBase<DL>& logits, const Eigen::MatrixBase<DB>& buy,
    const Eigen::MatrixBase<DS>& sell, std::span<const TraderFlows> flows_by_bin, Eigen::Index w,
    const ClusterMap* clusters = nullptr) {
  if (w < 1) throw WindowError("rolling window must span at least two observations");
  if (static_cast<Eigen::Index>(flows_by_bin.size()) != buy.size())
    throw DomainError("rolling SCI: need one flow set per volume bin");
  std::vector<std::optional<Components<typename DL::Scalar>>> out(
      static_cast<std::size_t>(logits.size()));
  for (Eigen::Index t = w; t < logits.size(); ++t) {
    const TraderFlows window_flows = sum_flows(flows_by_bin.subspan(
        static_cast<std::size_t>(t - w), static_cast<std::size_t>(w)));
    out[static_cast<std::size_t>(t)] =
        compute_sci_for_shock(logits, buy, sell, window_flows, t - w, w, clusters);
  }
  return out;
}

/// Rolling index when only path-level flows are known (simulated paths):
/// every window shares the same flow set.
template <typename DL, typename DB, typename DS>
std::vector<std::optional<Components<typename DL::Scalar>>> rolling_sci(
    const Eigen::MatrixBase<DL>& logits, const Eigen::MatrixBase<DB>& buy,
    const Eigen::MatrixBase<DS>& sell, const TraderFlows& flows, Eigen::Index w,
    const ClusterMap* clusters = nullptr) {
  if (w < 1) throw WindowError("rolling window must span at least two observations");
  std::vector<std::optional<Components<typename DL::Scalar>>> out(
      static_cast<std::size_t>(logits.size()));
  for (Eigen::Index t = w; t < logits.size(); ++t)
    out[static_cast<std::size_t>(t)] =
        compute_sci_for_shock(logits, buy, sell, flows, t - w, w, clusters);
  return out;
}

template <typename Scalar>
std::vector<std::optional<double>> sci_values(
    const std::vector<std::optional<Components<Scalar>>>& rolling) {
  std::vector<std::optional<double>> out(rolling.size());
  for (std::size_t i = 0; i < rolling.size(); ++i)
    if (rolling[i]) out[i] = static_cast<double>(rolling[i]->sci);
  return out;
}

/// Onset, duration and decay of the alarm SCI(t) > tau. Undefined entries
/// count as below threshold.
///
/// Decay time runs from the bin holding the series maximum to the first
/// later bin at or below tau; it is empty when there is no such bin.
AlarmSummary alarm_summary(std::span<const std::optional<double>> series, double tau,
                           std::chrono::minutes bin = std::chrono::minutes{5});

template <typename Derived>
AlarmSummary alarm_summary(const Eigen::MatrixBase<Derived>& series, double tau,
                           std::chrono::minutes bin = std::chrono::minutes{5}) {
  std::vector<std::optional<double>> values(static_cast<std::size_t>(series.size()));
  for (Eigen::Index i = 0; i < series.size(); ++i)
    values[static_cast<std::size_t>(i)] = static_cast<double>(series[i]);
  return alarm_summary(std::span<const std::optional<double>>(values), tau, bin);
}

}  // namespace sci
