#include "sci/flows.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "sci/errors.hpp"

namespace sci {

TraderFlows::TraderFlows(Eigen::VectorXd values) : values_(std::move(values)) {}

TraderFlows::TraderFlows(std::vector<std::string> ids, Eigen::VectorXd values)
    : ids_(std::move(ids)), values_(std::move(values)) {
  if (static_cast<Eigen::Index>(ids_.size()) != values_.size())
    throw DomainError("trader flows: id count does not match value count");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_)
    if (!seen.insert(id).second) throw DomainError("trader flows: duplicate id " + id);
}

TraderFlows TraderFlows::from_map(const std::map<std::string, double>& flows) {
  std::vector<std::string> ids;
  Eigen::VectorXd values(static_cast<Eigen::Index>(flows.size()));
  ids.reserve(flows.size());
  Eigen::Index i = 0;
  for (const auto& [id, v] : flows) {
    ids.push_back(id);
    values[i++] = v;
  }
  return TraderFlows(std::move(ids), std::move(values));
}

std::string TraderFlows::id(Eigen::Index i) const {
  if (i < 0 || i >= values_.size()) throw std::out_of_range("trader flows: index out of range");
  if (ids_.empty()) return "w" + std::to_string(i);
  return ids_[static_cast<std::size_t>(i)];
}

bool TraderFlows::has_nonzero() const noexcept {
  return (values_.array() != 0.0).any();
}

std::map<std::string, double> TraderFlows::to_map() const {
  std::map<std::string, double> out;
  for (Eigen::Index i = 0; i < values_.size(); ++i) out[id(i)] += values_[i];
  return out;
}

TraderFlows sum_flows(std::span<const TraderFlows> parts) {
  std::map<std::string, double> acc;
  for (const auto& part : parts)
    for (Eigen::Index i = 0; i < part.size(); ++i) acc[part.id(i)] += part.values()[i];
  return TraderFlows::from_map(acc);
}

const char* to_string(MergeStep step) noexcept {
  switch (step) {
    case MergeStep::CommonFunder:
      return "common_funder";
    case MergeStep::Temporal:
      return "temporal";
    case MergeStep::Community:
      return "community";
  }
  return "unknown";
}

ClusterMap::ClusterMap(
    std::map<std::string, std::string> cluster_of,
    std::map<std::pair<std::string, std::string>, std::set<MergeStep>> provenance)
    : cluster_of_(std::move(cluster_of)), provenance_(std::move(provenance)) {}

std::string ClusterMap::cluster_of(const std::string& wallet) const {
  auto it = cluster_of_.find(wallet);
  return it == cluster_of_.end() ? wallet : it->second;
}

std::size_t ClusterMap::cluster_count() const {
  std::set<std::string> ids;
  for (const auto& [w, c] : cluster_of_) ids.insert(c);
  return ids.size();
}

bool ClusterMap::is_identity() const {
  for (const auto& [w, c] : cluster_of_)
    if (w != c) return false;
  return true;
}

TraderFlows ClusterMap::aggregate(const TraderFlows& flows) const {
  struct Acc {
    double magnitude = 0.0;
    double net = 0.0;
  };
  std::map<std::string, Acc> clusters;
  for (Eigen::Index i = 0; i < flows.size(); ++i) {
    const double v = flows.values()[i];
    auto& acc = clusters[cluster_of(flows.id(i))];
    acc.magnitude += std::abs(v);
    acc.net += v;
  }
  std::map<std::string, double> out;
  for (const auto& [id, acc] : clusters) out[id] = acc.net < 0.0 ? -acc.magnitude : acc.magnitude;
  return TraderFlows::from_map(out);
}

}  // namespace sci
