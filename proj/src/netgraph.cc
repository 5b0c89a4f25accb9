// Copyright 2026 The gridcosim Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gridcosim/netgraph.h"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "gridcosim/errors.h"

namespace gridcosim {

std::string_view NodeKindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kRtu:
      return "rtu";
    case NodeKind::kModem:
      return "modem";
    case NodeKind::kRouter:
      return "router";
    case NodeKind::kMtu:
      return "mtu";
  }
  return "?";
}

std::string_view LinkKindName(LinkKind kind) {
  return kind == LinkKind::kLan ? "lan" : "wan";
}

CommGraph::CommGraph(std::vector<CommNode> nodes, std::vector<CommLink> links,
                     std::vector<Substation> substations)
    : nodes_(std::move(nodes)),
      links_(std::move(links)),
      substations_(std::move(substations)) {
  std::set<int> substation_ids;
  std::set<int> grouped_buses;
  for (const Substation& s : substations_) {
    if (!substation_ids.insert(s.id).second) {
      throw GraphError("duplicate substation id " + std::to_string(s.id));
    }
    for (int bus : s.buses) {
      if (!grouped_buses.insert(bus).second) {
        throw GraphError("bus " + std::to_string(bus) +
                         " assigned to more than one substation");
      }
    }
  }

  for (int v = 0; v < num_nodes(); ++v) {
    const CommNode& node = nodes_[v];
    if (node.id.empty()) throw GraphError("node with empty id");
    if (!node_lookup_.emplace(node.id, v).second) {
      throw GraphError("duplicate node id '" + node.id + "'");
    }
    if (node.kind == NodeKind::kMtu) {
      if (mtu_ >= 0) throw GraphError("more than one mtu node");
      mtu_ = v;
    }
    if (node.kind == NodeKind::kRtu && !substations_.empty() &&
        !substation_ids.count(node.substation)) {
      throw GraphError("rtu '" + node.id + "' references unknown substation " +
                       std::to_string(node.substation));
    }
  }
  if (mtu_ < 0) throw GraphError("no mtu node");

  adjacency_.assign(nodes_.size(), {});
  std::set<std::pair<int, int>> seen_pairs;
  for (int e = 0; e < num_links(); ++e) {
    const CommLink& link = links_[e];
    if (link.id.empty()) throw GraphError("link with empty id");
    if (!link_lookup_.emplace(link.id, e).second) {
      throw GraphError("duplicate link id '" + link.id + "'");
    }
    if (link.a < 0 || link.a >= num_nodes() || link.b < 0 ||
        link.b >= num_nodes()) {
      throw GraphError("link '" + link.id + "' has an unknown endpoint");
    }
    if (link.a == link.b) {
      throw GraphError("link '" + link.id + "' is a self loop");
    }
    if (!seen_pairs.insert(std::minmax(link.a, link.b)).second) {
      throw GraphError("link '" + link.id + "' duplicates an existing link");
    }
    if (!(link.channel.latency >= 0.0)) {
      throw GraphError("link '" + link.id + "' has negative latency");
    }
    if (!(link.channel.loss_probability >= 0.0 &&
          link.channel.loss_probability <= 1.0)) {
      throw GraphError("link '" + link.id +
                       "' loss probability outside [0, 1]");
    }
    adjacency_[link.a].emplace_back(link.b, e);
    adjacency_[link.b].emplace_back(link.a, e);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

  std::vector<int> hops = HopsToMtu();
  for (int v = 0; v < num_nodes(); ++v) {
    if (nodes_[v].kind == NodeKind::kRtu && hops[v] < 0) {
      throw GraphError("rtu '" + nodes_[v].id + "' cannot reach the mtu");
    }
  }
}

int CommGraph::node_index(std::string_view id) const {
  auto it = node_lookup_.find(std::string(id));
  if (it == node_lookup_.end()) {
    throw GraphError("unknown node '" + std::string(id) + "'");
  }
  return it->second;
}

int CommGraph::link_index(std::string_view id) const {
  auto it = link_lookup_.find(std::string(id));
  if (it == link_lookup_.end()) {
    throw GraphError("unknown link '" + std::string(id) + "'");
  }
  return it->second;
}

int CommGraph::link_between(int a, int b) const {
  for (const auto& [w, e] : adjacency_[a]) {
    if (w == b) return e;
  }
  return -1;
}

int CommGraph::substation_of_bus(int bus_id) const {
  for (const Substation& s : substations_) {
    if (std::find(s.buses.begin(), s.buses.end(), bus_id) != s.buses.end()) {
      return s.id;
    }
  }
  throw GraphError("bus " + std::to_string(bus_id) + " has no substation");
}

int CommGraph::rtu_of_substation(int substation_id) const {
  for (int v = 0; v < num_nodes(); ++v) {
    if (nodes_[v].kind == NodeKind::kRtu &&
        nodes_[v].substation == substation_id) {
      return v;
    }
  }
  throw GraphError("substation " + std::to_string(substation_id) +
                   " has no rtu");
}

std::vector<int> CommGraph::HopsToMtu(
    const std::vector<bool>& banned_nodes,
    const std::vector<bool>& banned_links) const {
  std::vector<int> hops(nodes_.size(), -1);
  auto node_ok = [&](int v) {
    return banned_nodes.empty() || !banned_nodes[v];
  };
  if (!node_ok(mtu_)) return hops;
  std::deque<int> frontier{mtu_};
  hops[mtu_] = 0;
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop_front();
    for (const auto& [w, e] : adjacency_[v]) {
      if (hops[w] >= 0 || !node_ok(w)) continue;
      if (!banned_links.empty() && banned_links[e]) continue;
      hops[w] = hops[v] + 1;
      frontier.push_back(w);
    }
  }
  return hops;
}

RoutingMatrix::RoutingMatrix(int num_measurements, int num_nodes,
                             int num_links, std::vector<RoutingVector> rows)
    : num_measurements_(num_measurements),
      num_nodes_(num_nodes),
      num_links_(num_links),
      rows_(std::move(rows)),
      paths_(num_measurements) {
  for (int r = 0; r < static_cast<int>(rows_.size()); ++r) {
    const RoutingVector& row = rows_[r];
    if (row.measurement < 0 || row.measurement >= num_measurements_) {
      throw GraphError("routing row for unknown measurement " +
                       std::to_string(row.measurement));
    }
    if (static_cast<int>(row.node_part.size()) != num_nodes_ ||
        static_cast<int>(row.link_part.size()) != num_links_) {
      throw GraphError("routing row has wrong dimensions");
    }
    paths_[row.measurement].push_back(r);
  }
  for (int i = 0; i < num_measurements_; ++i) {
    auto& p = paths_[i];
    if (p.empty()) {
      throw GraphError("measurement " + std::to_string(i) + " has no route");
    }
    std::stable_sort(p.begin(), p.end(), [&](int l, int r) {
      return rows_[l].path_id < rows_[r].path_id;
    });
    for (size_t a = 0; a < p.size(); ++a) {
      for (size_t b = a + 1; b < p.size(); ++b) {
        if (rows_[p[a]].node_sequence == rows_[p[b]].node_sequence) {
          throw GraphError("measurement " + std::to_string(i) +
                           " has duplicate paths");
        }
      }
    }
  }
}

RoutingScheme ParseRoutingScheme(std::string_view name) {
  if (name == "single" || name == "single-path" || name == "single_path") {
    return RoutingScheme::kSinglePath;
  }
  if (name == "k-shortest" || name == "k_shortest" ||
      name == "k-shortest-multipath" || name == "multipath") {
    return RoutingScheme::kKShortest;
  }
  throw ConfigError("unknown routing scheme '" + std::string(name) + "'");
}

RoutingVector MakeRoutingVector(const CommGraph& graph,
                                std::span<const int> node_path,
                                int measurement, int path_id) {
  if (node_path.empty()) throw GraphError("empty path");
  if (node_path.back() != graph.mtu()) {
    throw GraphError("path does not end at the mtu");
  }
  RoutingVector rv;
  rv.measurement = measurement;
  rv.path_id = path_id;
  rv.node_part.assign(graph.num_nodes(), false);
  rv.link_part.assign(graph.num_links(), false);
  for (size_t h = 0; h < node_path.size(); ++h) {
    int v = node_path[h];
    if (v < 0 || v >= graph.num_nodes()) throw GraphError("bad node in path");
    if (rv.node_part[v]) throw GraphError("path revisits a node");
    rv.node_part[v] = true;
    rv.node_sequence.push_back(v);
    if (h + 1 < node_path.size()) {
      int e = graph.link_between(v, node_path[h + 1]);
      if (e < 0) throw GraphError("path uses a missing link");
      rv.link_part[e] = true;
      rv.link_sequence.push_back(e);
    }
  }
  return rv;
}

std::vector<int> ShortestPathToMtu(const CommGraph& graph, int source,
                                   const std::vector<bool>& banned_nodes,
                                   const std::vector<bool>& banned_links) {
  std::vector<int> hops = graph.HopsToMtu(banned_nodes, banned_links);
  if (hops[source] < 0) return {};
  std::vector<int> path{source};
  int v = source;
  while (v != graph.mtu()) {
    int next = -1;
    for (const auto& [w, e] : graph.neighbors(v)) {
      if (!banned_links.empty() && banned_links[e]) continue;
      if (hops[w] == hops[v] - 1) {
        next = w;  // neighbors are sorted, so the first hit is the smallest
        break;
      }
    }
    path.push_back(next);
    v = next;
  }
  return path;
}

namespace {

bool PathLess(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

// Yen's algorithm over hop counts.
std::vector<std::vector<int>> KShortestPathsToMtu(const CommGraph& graph,
                                                  int source, int k) {
  if (k < 1) throw ContractError("k must be at least 1");
  std::vector<std::vector<int>> accepted;
  std::vector<int> first = ShortestPathToMtu(graph, source);
  if (first.empty()) return accepted;
  accepted.push_back(first);
  std::set<std::vector<int>, decltype(&PathLess)> candidates(&PathLess);

  while (static_cast<int>(accepted.size()) < k) {
    const std::vector<int>& last = accepted.back();
    for (size_t i = 0; i + 1 < last.size(); ++i) {
      std::vector<int> root(last.begin(), last.begin() + i + 1);
      std::vector<bool> banned_nodes(graph.num_nodes(), false);
      std::vector<bool> banned_links(graph.num_links(), false);
      for (const auto& p : accepted) {
        if (p.size() > i + 1 && std::equal(root.begin(), root.end(), p.begin())) {
          banned_links[graph.link_between(p[i], p[i + 1])] = true;
        }
      }
      for (size_t r = 0; r < i; ++r) banned_nodes[root[r]] = true;
      std::vector<int> spur =
          ShortestPathToMtu(graph, root.back(), banned_nodes, banned_links);
      if (spur.empty()) continue;
      std::vector<int> total = root;
      total.insert(total.end(), spur.begin() + 1, spur.end());
      if (std::find(accepted.begin(), accepted.end(), total) ==
          accepted.end()) {
        candidates.insert(std::move(total));
      }
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return accepted;
}

RoutingMatrix ComputeRoutes(const CommGraph& graph,
                            std::span<const int> sources,
                            RoutingScheme scheme, int k) {
  if (k < 1) throw ContractError("k must be at least 1");
  if (scheme == RoutingScheme::kSinglePath) k = 1;
  std::map<int, std::vector<std::vector<int>>> cache;
  std::vector<RoutingVector> rows;
  for (int i = 0; i < static_cast<int>(sources.size()); ++i) {
    int src = sources[i];
    if (src < 0 || src >= graph.num_nodes()) {
      throw GraphError("measurement " + std::to_string(i) +
                       " has an invalid source node");
    }
    auto it = cache.find(src);
    if (it == cache.end()) {
      it = cache.emplace(src, KShortestPathsToMtu(graph, src, k)).first;
    }
    if (it->second.empty()) {
      throw GraphError("node '" + graph.nodes()[src].id +
                       "' cannot reach the mtu");
    }
    for (int p = 0; p < static_cast<int>(it->second.size()); ++p) {
      rows.push_back(MakeRoutingVector(graph, it->second[p], i, p));
    }
  }
  return RoutingMatrix(static_cast<int>(sources.size()), graph.num_nodes(),
                       graph.num_links(), std::move(rows));
}

std::vector<int> MeasurementSources(const GridCase& grid_case,
                                    const CommGraph& graph) {
  std::vector<int> sources;
  sources.reserve(grid_case.num_measurements());
  for (int i = 0; i < grid_case.num_measurements(); ++i) {
    int bus_id = grid_case.buses()[grid_case.measurement_site(i)].id;
    sources.push_back(
        graph.rtu_of_substation(graph.substation_of_bus(bus_id)));
  }
  return sources;
}

std::vector<int> GeneratorSites(const GridCase& grid_case,
                                const CommGraph& graph) {
  std::vector<int> sites;
  for (const Generator& g : grid_case.generators()) {
    sites.push_back(graph.rtu_of_substation(graph.substation_of_bus(g.bus)));
  }
  return sites;
}

std::set<int> MeasurementsThroughNode(const RoutingMatrix& routing, int node) {
  std::set<int> out;
  for (const RoutingVector& row : routing.rows()) {
    if (row.node_part[node]) out.insert(row.measurement);
  }
  return out;
}

std::set<int> MeasurementsThroughLink(const RoutingMatrix& routing, int link) {
  std::set<int> out;
  for (const RoutingVector& row : routing.rows()) {
    if (row.link_part[link]) out.insert(row.measurement);
  }
  return out;
}

std::set<int> MeasurementsOnAllPathsThroughNode(const RoutingMatrix& routing,
                                                int node) {
  std::set<int> out;
  for (int i = 0; i < routing.num_measurements(); ++i) {
    bool all = true;
    for (int r : routing.paths_of(i)) {
      all = all && routing.rows()[r].node_part[node];
    }
    if (all) out.insert(i);
  }
  return out;
}

std::vector<Substation> GroupSubstations(
    const GridCase& grid_case, std::span<const int> joining_branches) {
  int nb = grid_case.num_buses();
  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (int branch_id : joining_branches) {
    const Branch& br =
        grid_case.branches()[grid_case.branch_index(branch_id)];
    int a = find(grid_case.bus_index(br.from_bus));
    int b = find(grid_case.bus_index(br.to_bus));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < nb; ++i) {
    groups[find(i)].push_back(grid_case.buses()[i].id);
  }
  std::vector<Substation> out;
  for (auto& [root, buses] : groups) {
    std::sort(buses.begin(), buses.end());
    out.push_back({buses.front(), buses});
  }
  std::sort(out.begin(), out.end(),
            [](const Substation& l, const Substation& r) { return l.id < r.id; });
  return out;
}

CommGraph BuildDefaultTopology(const GridCase& grid_case,
                               std::vector<Substation> substations,
                               ChannelParams lan, ChannelParams wan) {
  std::map<int, int> sub_of_bus;
  for (const Substation& s : substations) {
    for (int bus : s.buses) sub_of_bus[bus] = s.id;
  }
  for (const Bus& bus : grid_case.buses()) {
    if (!sub_of_bus.count(bus.id)) {
      throw GraphError("bus " + std::to_string(bus.id) + " has no substation");
    }
  }

  std::vector<CommNode> nodes;
  std::vector<CommLink> links;
  std::map<int, int> router_of;
  for (const Substation& s : substations) {
    std::string tag = "s" + std::to_string(s.id);
    int rtu = static_cast<int>(nodes.size());
    nodes.push_back({"rtu_" + tag, NodeKind::kRtu, s.id});
    nodes.push_back({"modem_" + tag, NodeKind::kModem, s.id});
    nodes.push_back({"router_" + tag, NodeKind::kRouter, s.id});
    router_of[s.id] = rtu + 2;
    links.push_back({"lan_rtu_" + tag, rtu, rtu + 1, LinkKind::kLan, lan});
    links.push_back({"lan_modem_" + tag, rtu + 1, rtu + 2, LinkKind::kLan, lan});
  }
  int control_sub = sub_of_bus.at(grid_case.reference_bus());
  int mtu = static_cast<int>(nodes.size());
  nodes.push_back({"mtu", NodeKind::kMtu, control_sub});
  links.push_back({"lan_mtu", router_of.at(control_sub), mtu, LinkKind::kLan,
                   lan});

  std::set<std::pair<int, int>> joined;
  for (const Branch& br : grid_case.branches()) {
    auto [sa, sb] = std::minmax(sub_of_bus.at(br.from_bus),
                                sub_of_bus.at(br.to_bus));
    if (sa == sb || !joined.insert({sa, sb}).second) continue;
    links.push_back({"wan_s" + std::to_string(sa) + "_s" + std::to_string(sb),
                     router_of.at(sa), router_of.at(sb), LinkKind::kWan, wan});
  }
  return CommGraph(std::move(nodes), std::move(links), std::move(substations));
}

}  // namespace gridcosim
