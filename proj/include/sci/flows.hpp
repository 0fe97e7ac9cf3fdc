#pragma once

#include <Eigen/Core>

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sci {

/// Signed net post-shock flow per trader.
///
/// Ids are optional: a flow vector built from bare values gets implicit ids
/// "w0", "w1", ... so simulated paths do not carry thousands of strings.
class TraderFlows {
 public:
  TraderFlows() = default;
  explicit TraderFlows(Eigen::VectorXd values);
  TraderFlows(std::vector<std::string> ids, Eigen::VectorXd values);

  static TraderFlows from_map(const std::map<std::string, double>& flows);

  Eigen::Index size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.size() == 0; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::string id(Eigen::Index i) const;
  bool has_explicit_ids() const noexcept { return !ids_.empty(); }

  bool has_nonzero() const noexcept;
  std::map<std::string, double> to_map() const;

 private:
  std::vector<std::string> ids_;
  Eigen::VectorXd values_;
};

/// Adds flows trader-by-trader (matched on id).
TraderFlows sum_flows(std::span<const TraderFlows> parts);

/// Which step of the clustering protocol produced a merge.
enum class MergeStep { CommonFunder, Temporal, Community };

const char* to_string(MergeStep step) noexcept;

/// Wallet -> cluster assignment. Cluster ids are the lexicographically
/// smallest member id, so the map does not depend on input order.
/// Wallets absent from the map are singleton clusters.
class ClusterMap {
 public:
  ClusterMap() = default;
  explicit ClusterMap(std::map<std::string, std::string> cluster_of,
                      std::map<std::pair<std::string, std::string>, std::set<MergeStep>>
                          provenance = {});

  std::string cluster_of(const std::string& wallet) const;
  const std::map<std::string, std::string>& assignments() const noexcept { return cluster_of_; }
  const std::map<std::pair<std::string, std::string>, std::set<MergeStep>>& provenance()
      const noexcept {
    return provenance_;
  }
  std::size_t cluster_count() const;
  bool is_identity() const;

  /// Collapses member flows into one entry per cluster.
  ///
  /// A cluster's magnitude is the sum of member magnitudes and its sign is the
  /// sign of the signed sum. Aggregating magnitudes keeps the Herfindahl
  /// index superadditive under merging.
  TraderFlows aggregate(const TraderFlows& flows) const;

 private:
  std::map<std::string, std::string> cluster_of_;
  std::map<std::pair<std::string, std::string>, std::set<MergeStep>> provenance_;
};

}  // namespace sci
