#include "sci/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "sci/core_metrics.hpp"
#include "sci/errors.hpp"
#include "sci/rng.hpp"

namespace sci {

void WalletGraph::validate() const {
  for (const auto& e : edges) {
    if (!wallets.count(e.funder)) throw DataError("funding edge names unknown wallet " + e.funder);
    if (!wallets.count(e.funded)) throw DataError("funding edge names unknown wallet " + e.funded);
    if (!(e.amount >= 0.0) || !std::isfinite(e.amount))
      throw DataError("funding edge " + e.funder + " -> " + e.funded + " has a bad amount");
  }
  std::size_t len = 0;
  bool first = true;
  for (const auto& [id, row] : activity) {
    if (!wallets.count(id)) throw DataError("activity row names unknown wallet " + id);
    if (first) len = row.size();
    first = false;
    if (row.size() != len) throw DataError("activity rows must share one bin index");
    for (int v : row)
      if (v < -1 || v > 1) throw DataError("activity for " + id + " holds a value outside {-1,0,1}");
  }
}

// ---------------------------------------------------------------------------

UnionFind::UnionFind(const std::set<std::string>& ids) : ids_(ids.begin(), ids.end()) {
  parent_.resize(ids_.size());
  size_.assign(ids_.size(), 1);
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = i;
}

std::size_t UnionFind::find(std::size_t i) {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

bool UnionFind::unite(const std::string& a, const std::string& b) { return unite(index(a), index(b)); }

std::size_t UnionFind::index(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw DomainError("union-find: unknown id " + id);
  return it->second;
}

std::map<std::string, std::string> UnionFind::canonical() {
  // ids_ is sorted, so the first member met for each root is its smallest.
  std::map<std::size_t, std::string> smallest;
  for (std::size_t i = 0; i < ids_.size(); ++i) smallest.emplace(find(i), ids_[i]);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < ids_.size(); ++i) out[ids_[i]] = smallest.at(find(i));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

MergeSet cluster_common_funder(const WalletGraph& graph) {
  MergeSet out{MergeStep::CommonFunder, {}};
  std::map<std::string, std::set<std::string>> funded_by;
  for (const auto& e : graph.edges) {
    if (!e.first_deposit || graph.custodial.count(e.funder)) continue;
    funded_by[e.funder].insert(e.funded);
  }
  for (const auto& [funder, funded] : funded_by) {
    if (funded.size() < 2) continue;
    const std::string& head = *funded.begin();
    for (auto it = std::next(funded.begin()); it != funded.end(); ++it)
      out.pairs.push_back(ordered(head, *it));
  }
  return out;
}

std::pair<double, int> co_movement(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw DomainError("co-movement: activity rows differ in length");
  int joint = 0, same = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] == 0 || b[t] == 0) continue;
    ++joint;
    if (a[t] == b[t]) ++same;
  }
  return {joint ? static_cast<double>(same) / joint : 0.0, joint};
}

MergeSet cluster_temporal(const WalletGraph& graph, const TemporalOptions& options) {
  MergeSet out{MergeStep::Temporal, {}};
  std::vector<const std::pair<const std::string, std::vector<int>>*> rows;
  for (const auto& row : graph.activity)
    if (!graph.custodial.count(row.first)) rows.push_back(&row);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const auto [share, joint] = co_movement(rows[i]->second, rows[j]->second);
      if (joint >= options.min_joint_bins && share > options.share_threshold)
        out.pairs.push_back(ordered(rows[i]->first, rows[j]->first));
    }
  }
  return out;
}

TraderFlows filter_custodial(const TraderFlows& flows, const std::set<std::string>& custodial,
                             CustodialMode mode, double lambda) {
  if (mode == CustodialMode::Downweight && !(lambda > 0.0 && lambda < 1.0))
    throw DomainError("custodial downweight must lie in (0, 1)");
  if (custodial.empty()) return flows;
  std::vector<std::string> ids;
  std::vector<double> values;
  for (Eigen::Index i = 0; i < flows.size(); ++i) {
    std::string id = flows.id(i);
    double v = flows.values()[i];
    if (custodial.count(id)) {
      if (mode == CustodialMode::Exclude) continue;
      v *= lambda;
    }
    ids.push_back(std::move(id));
    values.push_back(v);
  }
  return TraderFlows(std::move(ids),
                     Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

// ---------------------------------------------------------------------------

WeightedGraph::WeightedGraph(int nodes)
    : n(nodes), adj(static_cast<std::size_t>(nodes)), self_loop(static_cast<std::size_t>(nodes), 0.0) {}

void WeightedGraph::add_edge(int u, int v, double w) {
  if (u < 0 || v < 0 || u >= n || v >= n) throw DomainError("graph edge out of range");
  if (!(w >= 0.0)) throw DomainError("graph edge weight must be nonnegative");
  if (u == v) {
    self_loop[static_cast<std::size_t>(u)] += w;
    return;
  }
  auto bump = [w](std::vector<std::pair<int, double>>& list, int to) {
    for (auto& [node, weight] : list)
      if (node == to) {
        weight += w;
        return;
      }
    list.emplace_back(to, w);
  };
  bump(adj[static_cast<std::size_t>(u)], v);
  bump(adj[static_cast<std::size_t>(v)], u);
}

double WeightedGraph::degree(int u) const {
  double k = 2.0 * self_loop[static_cast<std::size_t>(u)];
  for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) k += w;
  return k;
}

double WeightedGraph::total_weight() const {
  double twice = 0.0;
  for (int u = 0; u < n; ++u) twice += degree(u);
  return twice / 2.0;
}

double modularity(const WeightedGraph& g, const std::vector<int>& community) {
  if (static_cast<int>(community.size()) != g.n) throw DomainError("modularity: partition size mismatch");
  const double m = g.total_weight();
  if (m <= 0.0) return 0.0;
  std::map<int, double> in, tot;
  for (int u = 0; u < g.n; ++u) {
    const int c = community[static_cast<std::size_t>(u)];
    tot[c] += g.degree(u);
    in[c] += 2.0 * g.self_loop[static_cast<std::size_t>(u)];
    for (const auto& [v, w] : g.adj[static_cast<std::size_t>(u)])
      if (community[static_cast<std::size_t>(v)] == c) in[c] += w;
  }
  double q = 0.0;
  for (const auto& [c, t] : tot) q += in[c] / (2.0 * m) - (t / (2.0 * m)) * (t / (2.0 * m));
  return q;
}

namespace {

std::vector<int> renumber(const std::vector<int>& comm) {
  std::map<int, int> id;
  std::vector<int> out(comm.size());
  for (std::size_t i = 0; i < comm.size(); ++i) {
    const auto it = id.emplace(comm[i], static_cast<int>(id.size())).first;
    out[i] = it->second;
  }
  return out;
}

// One round of local moving. Returns true if any node moved.
bool local_moving(const WeightedGraph& g, double m, double tolerance, std::vector<int>& comm,
                  double& q, std::vector<double>& trace) {
  std::vector<double> tot(static_cast<std::size_t>(g.n), 0.0);
  std::vector<double> deg(static_cast<std::size_t>(g.n));
  for (int u = 0; u < g.n; ++u) {
    deg[static_cast<std::size_t>(u)] = g.degree(u);
    tot[static_cast<std::size_t>(comm[static_cast<std::size_t>(u)])] += deg[static_cast<std::size_t>(u)];
  }
  std::vector<double> link(static_cast<std::size_t>(g.n), 0.0);
  std::vector<int> touched;
  bool any = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (int u = 0; u < g.n; ++u) {
      const auto su = static_cast<std::size_t>(u);
      const int own = comm[su];
      const double ku = deg[su];
      touched.clear();
      for (const auto& [v, w] : g.adj[su]) {
        const int c = comm[static_cast<std::size_t>(v)];
        if (link[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
        link[static_cast<std::size_t>(c)] += w;
      }
      tot[static_cast<std::size_t>(own)] -= ku;
      auto gain = [&](int c) {
        return link[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * ku / (2.0 * m);
      };
      const double own_gain = gain(own);
      int best = own;
      double best_gain = own_gain;
      std::sort(touched.begin(), touched.end());
      for (int c : touched)
        if (gain(c) > best_gain) {
          best = c;
          best_gain = gain(c);
        }
      const double delta_q = (best_gain - own_gain) / m;
      if (best != own && delta_q > tolerance) {
        comm[su] = best;
        q += delta_q;
        trace.push_back(q);
        moved = any = true;
      } else {
        best = own;
      }
      tot[static_cast<std::size_t>(best)] += ku;
      for (int c : touched) link[static_cast<std::size_t>(c)] = 0.0;
    }
  }
  return any;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& comm, int k) {
  WeightedGraph out(k);
  for (int u = 0; u < g.n; ++u) {
    const int cu = comm[static_cast<std::size_t>(u)];
    out.self_loop[static_cast<std::size_t>(cu)] += g.self_loop[static_cast<std::size_t>(u)];
    for (const auto& [v, w] : g.adj[static_cast<std::size_t>(u)]) {
      if (v < u) continue;  // each undirected edge once
      out.add_edge(cu, comm[static_cast<std::size_t>(v)], w);
    }
  }
  return out;
}

}  // namespace

LouvainResult louvain(const WeightedGraph& g, double tolerance) {
  LouvainResult r;
  r.community.resize(static_cast<std::size_t>(g.n));
  std::iota(r.community.begin(), r.community.end(), 0);
  const double m = g.total_weight();
  if (m <= 0.0) return r;

  WeightedGraph level = g;
  double q = modularity(g, r.community);
  while (true) {
    std::vector<int> comm(static_cast<std::size_t>(level.n));
    std::iota(comm.begin(), comm.end(), 0);
    if (!local_moving(level, m, tolerance, comm, q, r.move_trace)) break;
    comm = renumber(comm);
    const int k = *std::max_element(comm.begin(), comm.end()) + 1;
    for (auto& c : r.community) c = comm[static_cast<std::size_t>(c)];
    ++r.levels;
    if (k == level.n) break;
    level = aggregate(level, comm, k);
  }
  r.community = renumber(r.community);
  r.modularity = modularity(g, r.community);
  return r;
}

MergeSet community_detect(const WalletGraph& graph) {
  MergeSet out{MergeStep::Community, {}};
  std::vector<std::string> nodes;
  std::map<std::string, int> index;
  for (const auto& w : graph.wallets) {
    if (graph.custodial.count(w)) continue;
    index[w] = static_cast<int>(nodes.size());
    nodes.push_back(w);
  }
  WeightedGraph g(static_cast<int>(nodes.size()));
  for (const auto& e : graph.edges) {
    const auto a = index.find(e.funder), b = index.find(e.funded);
    if (a == index.end() || b == index.end() || a->second == b->second) continue;
    g.add_edge(a->second, b->second, e.amount);
  }
  const LouvainResult r = louvain(g);
  std::map<int, std::string> head;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [it, fresh] = head.emplace(r.community[i], nodes[i]);
    if (!fresh) out.pairs.push_back(ordered(it->second, nodes[i]));
  }
  return out;
}

ClusterMap build_cluster_map(const WalletGraph& graph, const ClusterOptions& options) {
  graph.validate();
  UnionFind uf(graph.wallets);
  std::map<std::pair<std::string, std::string>, std::set<MergeStep>> provenance;
  auto apply = [&](const MergeSet& merges) {
    for (const auto& p : merges.pairs) {
      if (graph.custodial.count(p.first) || graph.custodial.count(p.second)) continue;
      uf.unite(p.first, p.second);
      provenance[p].insert(merges.step);
    }
  };
  if (options.common_funder) apply(cluster_common_funder(graph));
  if (options.temporal_step) apply(cluster_temporal(graph, options.temporal));
  if (options.community_step) apply(community_detect(graph));
  return ClusterMap(uf.canonical(), std::move(provenance));
}

HhiRobustness hhi_robustness_report(const TraderFlows& flows, const ClusterMap& map) {
  HhiRobustness r;
  r.hhi_raw = hhi_flow(flows);
  r.hhi_clustered = hhi_flow(map.aggregate(flows));
  r.gap = r.hhi_clustered - r.hhi_raw;
  return r;
}

// ---------------------------------------------------------------------------

namespace {
constexpr const char* kGraphSchema = "sci-wallet-graph/1";
}

WalletGraph read_wallet_graph(std::istream& in) {
  using nlohmann::json;
  WalletGraph g;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "wallet graph line " + std::to_string(lineno) + ": ";
    try {
      const json j = json::parse(line);
      if (!header) {
        if (j.value("schema", "") != kGraphSchema)
          throw DataError(where + "expected header with schema " + kGraphSchema);
        header = true;
        continue;
      }
      const std::string type = j.at("type").get<std::string>();
      if (type == "wallet") {
        g.wallets.insert(j.at("id").get<std::string>());
      } else if (type == "edge") {
        g.edges.push_back({j.at("funder").get<std::string>(), j.at("funded").get<std::string>(),
                           j.at("amount").get<double>(), j.value("first_deposit", false)});
      } else if (type == "activity") {
        g.activity[j.at("wallet").get<std::string>()] = j.at("bins").get<std::vector<int>>();
      } else if (type == "custodial") {
        g.custodial.insert(j.at("id").get<std::string>());
      } else {
        throw DataError(where + "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    }
  }
  if (!header) throw DataError("wallet graph: missing header");
  g.validate();
  return g;
}

void write_wallet_graph(std::ostream& out, const WalletGraph& graph) {
  using nlohmann::ordered_json;
  out << ordered_json{{"schema", kGraphSchema}}.dump() << '\n';
  for (const auto& w : graph.wallets) out << ordered_json{{"type", "wallet"}, {"id", w}}.dump() << '\n';
  for (const auto& e : graph.edges)
    out << ordered_json{{"type", "edge"},
                        {"funder", e.funder},
                        {"funded", e.funded},
                        {"amount", e.amount},
                        {"first_deposit", e.first_deposit}}
               .dump()
        << '\n';
  for (const auto& [w, bins] : graph.activity)
    out << ordered_json{{"type", "activity"}, {"wallet", w}, {"bins", bins}}.dump() << '\n';
  for (const auto& c : graph.custodial)
    out << ordered_json{{"type", "custodial"}, {"id", c}}.dump() << '\n';
}

WalletGraph synthetic_common_funder_graph(const TraderFlows& flows, double fraction, Stream& rng,
                                          const std::string& funder) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("injected fraction must lie in [0, 1]");
  WalletGraph g;
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < flows.size(); ++i) ids.push_back(flows.id(i));
  g.wallets.insert(ids.begin(), ids.end());
  if (g.wallets.count(funder)) throw DomainError("injected funder id collides with a trader");
  g.wallets.insert(funder);
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(ids.size()) - 1));
    std::swap(ids[i], ids[j]);
    g.edges.push_back({funder, ids[i], 1.0, true});
  }
  return g;
}

}  // namespace sci
