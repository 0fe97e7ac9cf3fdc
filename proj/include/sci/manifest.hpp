#pragma once

// Run manifest: every knob a command reads, loaded from a JSON file and
// overridable from the command line.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sci/clustering.hpp"
#include "sci/core_metrics.hpp"
#include "sci/experiments.hpp"
#include "sci/ingest.hpp"

namespace sci {

struct RunManifest {
  std::uint64_t seed{kDefaultSeed};
  std::optional<std::size_t> n_per_dgp;
  std::vector<std::string> dgps{"informed", "liquidity", "disagreement"};
  int window_minutes{240};
  int bin_minutes{5};
  std::vector<double> weights{1.0, 1.0, 1.0};
  double tau{0.27};
  std::optional<double> tau_star;
  int bootstrap{1000};
  int trade_bootstrap{0};  // 0 disables the trade-level interval
  std::vector<double> phi_grid{-0.9, -0.75, -0.6, -0.45, -0.3, -0.15, 0.0};
  std::vector<double> alpha_grid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<int> window_grid_minutes{60, 120, 180, 240};
  int k_folds{5};
  int rolling_window_minutes{60};
  int histogram_bins{50};
  std::string trades;
  std::string wallet_graph;
  std::string dataset;
  std::optional<std::int64_t> shock_time;
  std::string custodial_mode{"exclude"};
  double custodial_weight{kDefaultCustodialWeight};
  double share_threshold{0.5};
  int min_joint_bins{20};
  unsigned threads{0};
  std::string out;

  /// Unknown keys and ill-typed values are ConfigErrors naming the key.
  static RunManifest from_json(const nlohmann::json& j);
  static RunManifest load(const std::string& path);

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  /// Canonical form: every field, sorted keys. `threads` and `out` are left
  /// out because they do not change results.
  nlohmann::ordered_json canonical() const;

  /// 16 hex digits of FNV-1a over the canonical dump.
  std::string hash() const;

  Weights<double> weight_triple() const;
  CustodialMode custodial() const;
  ShockSpec shock() const;
  ExperimentConfig experiment_config() const;
  ClusterOptions cluster_options() const;
};

}  // namespace sci
