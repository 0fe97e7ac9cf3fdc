#pragma once

// Multi-wallet clustering applied to trader flows before the Herfindahl step:
// common funder, temporal co-movement, custodial filtering and community
// detection on the funding graph.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sci/flows.hpp"

namespace sci {

class Stream;

struct FundingEdge {
  std::string funder;
  std::string funded;
  double amount{0.0};
  bool first_deposit{false};
};

struct WalletGraph {
  std::set<std::string> wallets;
  std::vector<FundingEdge> edges;
  std::map<std::string, std::vector<int>> activity;  // +1 / -1 / 0 per pre-shock bin
  std::set<std::string> custodial;

  /// Throws DataError if an edge or activity row names an unknown wallet,
  /// activity rows differ in length or hold values outside {-1, 0, 1}.
  void validate() const;
};

/// Disjoint sets over string ids with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(const std::set<std::string>& ids);

  std::size_t find(std::size_t i);
  bool unite(std::size_t a, std::size_t b);
  bool unite(const std::string& a, const std::string& b);
  std::size_t index(const std::string& id) const;

  /// Canonical assignment: every id mapped to the smallest id in its set.
  std::map<std::string, std::string> canonical();

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Pairs a step wants joined. Pairs are stored with the smaller id first.
struct MergeSet {
  MergeStep step;
  std::vector<std::pair<std::string, std::string>> pairs;
};

MergeSet cluster_common_funder(const WalletGraph& graph);

struct TemporalOptions {
  double share_threshold{0.5};
  int min_joint_bins{20};
};

/// Fraction of jointly active bins in which both wallets traded the same
/// direction, and the number of jointly active bins.
std::pair<double, int> co_movement(const std::vector<int>& a, const std::vector<int>& b);

MergeSet cluster_temporal(const WalletGraph& graph, const TemporalOptions& options = {});

enum class CustodialMode { Exclude, Downweight };

inline constexpr double kDefaultCustodialWeight = 0.1;

/// Removes custodial wallets or scales their flow by lambda in (0, 1).
TraderFlows filter_custodial(const TraderFlows& flows, const std::set<std::string>& custodial,
                             CustodialMode mode, double lambda = kDefaultCustodialWeight);

// ---------------------------------------------------------------------------
// Louvain

/// Undirected weighted graph on nodes 0..n-1. Self loops are allowed; a self
/// loop of weight w contributes 2w to its node's degree.
struct WeightedGraph {
  int n{0};
  std::vector<std::vector<std::pair<int, double>>> adj;  // excludes self loops
  std::vector<double> self_loop;

  explicit WeightedGraph(int nodes = 0);
  void add_edge(int u, int v, double w);
  double degree(int u) const;
  double total_weight() const;  // m: every edge counted once
};

/// Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j). Zero for an
/// edgeless graph.
double modularity(const WeightedGraph& g, const std::vector<int>& community);

struct LouvainResult {
  std::vector<int> community;      // per node, renumbered 0..k-1 by first node
  double modularity{0.0};
  std::vector<double> move_trace;  // modularity after every accepted move
  int levels{0};
};

inline constexpr double kModularityTolerance = 1e-9;

/// Greedy local moving, then aggregation, repeated until no move gains more
/// than the tolerance. Nodes are visited in index order, so results are
/// deterministic.
LouvainResult louvain(const WeightedGraph& g, double tolerance = kModularityTolerance);

/// Louvain on the undirected funding graph among non-custodial wallets,
/// edge weight = total amount transferred in either direction.
MergeSet community_detect(const WalletGraph& graph);

struct ClusterOptions {
  TemporalOptions temporal;
  bool common_funder{true};
  bool temporal_step{true};
  bool community_step{true};
};

/// Applies common funder, temporal and community merges through one
/// union-find. Custodial wallets stay singletons; their flows are handled by
/// filter_custodial.
ClusterMap build_cluster_map(const WalletGraph& graph, const ClusterOptions& options = {});

struct HhiRobustness {
  double hhi_raw{0.0};
  double hhi_clustered{0.0};
  double gap{0.0};
};

HhiRobustness hhi_robustness_report(const TraderFlows& flows, const ClusterMap& map);

// Line-delimited JSON wallet graph: a header, then wallet, edge, activity and
// custodial records.
WalletGraph read_wallet_graph(std::istream& in);
void write_wallet_graph(std::ostream& out, const WalletGraph& graph);

/// Test scaffolding: a graph over the flow's wallets in which a random
/// `fraction` of them share one injected first-deposit funder.
WalletGraph synthetic_common_funder_graph(const TraderFlows& flows, double fraction, Stream& rng,
                                          const std::string& funder = "funder");

}  // namespace sci
