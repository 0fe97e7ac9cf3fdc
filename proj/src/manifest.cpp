#include "sci/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "sci/dgp.hpp"
#include "sci/errors.hpp"
#include "sci/rng.hpp"

namespace sci {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Setter = std::function<void(RunManifest&, const json&)>;

template <typename T>
Setter field(T RunManifest::*member) {
  return [member](RunManifest& m, const json& v) { m.*member = v.get<T>(); };
}

template <typename T>
Setter optional_field(std::optional<T> RunManifest::*member) {
  return [member](RunManifest& m, const json& v) {
    if (v.is_null()) m.*member = std::nullopt;
    else m.*member = v.get<T>();
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"seed", field(&RunManifest::seed)},
      {"n_per_dgp", optional_field(&RunManifest::n_per_dgp)},
      {"dgps", field(&RunManifest::dgps)},
      {"window_minutes", field(&RunManifest::window_minutes)},
      {"bin_minutes", field(&RunManifest::bin_minutes)},
      {"weights", field(&RunManifest::weights)},
      {"tau", field(&RunManifest::tau)},
      {"tau_star", optional_field(&RunManifest::tau_star)},
      {"bootstrap", field(&RunManifest::bootstrap)},
      {"trade_bootstrap", field(&RunManifest::trade_bootstrap)},
      {"phi_grid", field(&RunManifest::phi_grid)},
      {"alpha_grid", field(&RunManifest::alpha_grid)},
      {"window_grid_minutes", field(&RunManifest::window_grid_minutes)},
      {"k_folds", field(&RunManifest::k_folds)},
      {"rolling_window_minutes", field(&RunManifest::rolling_window_minutes)},
      {"histogram_bins", field(&RunManifest::histogram_bins)},
      {"trades", field(&RunManifest::trades)},
      {"wallet_graph", field(&RunManifest::wallet_graph)},
      {"dataset", field(&RunManifest::dataset)},
      {"shock_time", optional_field(&RunManifest::shock_time)},
      {"custodial_mode", field(&RunManifest::custodial_mode)},
      {"custodial_weight", field(&RunManifest::custodial_weight)},
      {"share_threshold", field(&RunManifest::share_threshold)},
      {"min_joint_bins", field(&RunManifest::min_joint_bins)},
      {"threads", field(&RunManifest::threads)},
      {"out", field(&RunManifest::out)},
  };
  return table;
}

}  // namespace

RunManifest RunManifest::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("manifest: top level must be an object");
  RunManifest m;
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("manifest: unknown key '" + key + "'");
    try {
      it->second(m, value);
    } catch (const json::exception& e) {
      throw ConfigError("manifest: bad value for '" + key + "': " + e.what());
    }
  }
  m.validate();
  return m;
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("manifest: cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("manifest: " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void RunManifest::validate() const {
  for (const auto& d : dgps) {
    if (!builtin_specs().count(d)) throw ConfigError("dgps: unknown DGP '" + d + "'");
  }
  if (dgps.empty()) throw ConfigError("dgps: list is empty");
  if (weights.size() != 3) throw ConfigError("weights: need three exponents");
  try {
    (void)weight_triple();
  } catch (const Error& e) {
    throw ConfigError(std::string("weights: ") + e.what());
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau: must lie in [0, 1]");
  if (trade_bootstrap != 0 && trade_bootstrap < 100)
    throw ConfigError("trade_bootstrap: 0 or at least 100 resamples");
  if (custodial_mode != "exclude" && custodial_mode != "downweight")
    throw ConfigError("custodial_mode: expected 'exclude' or 'downweight'");
  if (!(custodial_weight > 0.0 && custodial_weight < 1.0))
    throw ConfigError("custodial_weight: must lie in (0, 1)");
  if (!(share_threshold >= 0.0 && share_threshold < 1.0))
    throw ConfigError("share_threshold: must lie in [0, 1)");
  if (min_joint_bins < 1) throw ConfigError("min_joint_bins: must be positive");
  if (rolling_window_minutes <= 0 || bin_minutes <= 0 || rolling_window_minutes % bin_minutes != 0)
    throw ConfigError("rolling_window_minutes: must be a positive multiple of bin_minutes");
  if (bootstrap < 100) throw ConfigError("bootstrap: need at least 100 resamples");
  if (k_folds < 2) throw ConfigError("k_folds: need at least 2 folds");
  if (histogram_bins < 1) throw ConfigError("histogram_bins: must be positive");
  if (n_per_dgp && *n_per_dgp < 1) throw ConfigError("n_per_dgp: must be positive");
  shock().validate();
}

ordered_json RunManifest::canonical() const {
  json j;  // std::map keys: sorted
  j["seed"] = seed;
  j["n_per_dgp"] = n_per_dgp ? json(*n_per_dgp) : json(nullptr);
  j["dgps"] = dgps;
  j["window_minutes"] = window_minutes;
  j["bin_minutes"] = bin_minutes;
  j["weights"] = weights;
  j["tau"] = tau;
  j["tau_star"] = tau_star ? json(*tau_star) : json(nullptr);
  j["bootstrap"] = bootstrap;
  j["trade_bootstrap"] = trade_bootstrap;
  j["phi_grid"] = phi_grid;
  j["alpha_grid"] = alpha_grid;
  j["window_grid_minutes"] = window_grid_minutes;
  j["k_folds"] = k_folds;
  j["rolling_window_minutes"] = rolling_window_minutes;
  j["histogram_bins"] = histogram_bins;
  j["trades"] = trades;
  j["wallet_graph"] = wallet_graph;
  j["dataset"] = dataset;
  j["shock_time"] = shock_time ? json(*shock_time) : json(nullptr);
  j["custodial_mode"] = custodial_mode;
  j["custodial_weight"] = custodial_weight;
  j["share_threshold"] = share_threshold;
  j["min_joint_bins"] = min_joint_bins;
  return ordered_json::parse(j.dump());
}

std::string RunManifest::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical().dump())));
  return buf;
}

Weights<double> RunManifest::weight_triple() const {
  return Weights<double>::normalized(weights.at(0), weights.at(1), weights.at(2));
}

CustodialMode RunManifest::custodial() const {
  return custodial_mode == "downweight" ? CustodialMode::Downweight : CustodialMode::Exclude;
}

ShockSpec RunManifest::shock() const {
  return ShockSpec{shock_time.value_or(0), window_minutes, bin_minutes};
}

ExperimentConfig RunManifest::experiment_config() const {
  ExperimentConfig c;
  c.n_per_dgp = n_per_dgp;
  c.seed = seed;
  c.bin_minutes = bin_minutes;
  c.window_bins = window_minutes / bin_minutes;
  c.bootstrap = bootstrap;
  c.tau_star = tau_star;
  c.phi_grid = phi_grid;
  c.alpha_grid = alpha_grid;
  c.window_minutes = window_grid_minutes;
  c.k_folds = k_folds;
  c.rolling_window_bins = rolling_window_minutes / bin_minutes;
  c.histogram_bins = histogram_bins;
  c.threads = threads;
  return c;
}

ClusterOptions RunManifest::cluster_options() const {
  ClusterOptions o;
  o.temporal.share_threshold = share_threshold;
  o.temporal.min_joint_bins = min_joint_bins;
  return o;
}

}  // namespace sci
