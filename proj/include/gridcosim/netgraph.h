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

#ifndef GRIDCOSIM_NETGRAPH_H_
#define GRIDCOSIM_NETGRAPH_H_

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridcosim/grid.h"

namespace gridcosim {

enum class NodeKind { kRtu, kModem, kRouter, kMtu };
enum class LinkKind { kLan, kWan };

std::string_view NodeKindName(NodeKind kind);
std::string_view LinkKindName(LinkKind kind);

struct ChannelParams {
  double latency = 0.0;           // seconds per traversal
  double loss_probability = 0.0;  // per traversal
};

struct CommNode {
  std::string id;
  NodeKind kind = NodeKind::kRouter;
  int substation = 0;
};

struct CommLink {
  std::string id;
  int a = 0;  // node indices
  int b = 0;
  LinkKind kind = LinkKind::kLan;
  ChannelParams channel;
};

struct Substation {
  int id = 0;
  std::vector<int> buses;
};

// Undirected simple SCADA graph. Node order is significant: routing ties are
// broken by node index.
class CommGraph {
 public:
  // Throws GraphError when an invariant fails.
  CommGraph(std::vector<CommNode> nodes, std::vector<CommLink> links,
            std::vector<Substation> substations);

  const std::vector<CommNode>& nodes() const { return nodes_; }
  const std::vector<CommLink>& links() const { return links_; }
  const std::vector<Substation>& substations() const { return substations_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  int mtu() const { return mtu_; }

  int node_index(std::string_view id) const;
  int link_index(std::string_view id) const;

  // (neighbor node, link) pairs ordered by neighbor index.
  const std::vector<std::pair<int, int>>& neighbors(int node) const {
    return adjacency_[node];
  }
  // Link joining two nodes, or -1.
  int link_between(int a, int b) const;

  // Substation id holding `bus_id`; throws GraphError if none.
  int substation_of_bus(int bus_id) const;
  // First rtu node of the substation; throws GraphError if none.
  int rtu_of_substation(int substation_id) const;

  // Hop distance from every node to the MTU (-1 when unreachable).
  std::vector<int> HopsToMtu(const std::vector<bool>& banned_nodes = {},
                             const std::vector<bool>& banned_links = {}) const;

 private:
  std::vector<CommNode> nodes_;
  std::vector<CommLink> links_;
  std::vector<Substation> substations_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  std::unordered_map<std::string, int> node_lookup_;
  std::unordered_map<std::string, int> link_lookup_;
  int mtu_ = -1;
};

// Binary incidence of one delivery path over nodes and links, plus the
// ordered hop sequence used by the packet simulator.
struct RoutingVector {
  int measurement = 0;
  int path_id = 0;
  std::vector<int> node_sequence;  // source ... mtu
  std::vector<int> link_sequence;  // link_sequence[h] joins hops h and h + 1
  std::vector<bool> node_part;
  std::vector<bool> link_part;
};

class RoutingMatrix {
 public:
  RoutingMatrix(int num_measurements, int num_nodes, int num_links,
                std::vector<RoutingVector> rows);

  int num_measurements() const { return num_measurements_; }
  int num_nodes() const { return num_nodes_; }
  int num_links() const { return num_links_; }
  const std::vector<RoutingVector>& rows() const { return rows_; }
  // Indices into rows() for measurement i, in path-id order.
  const std::vector<int>& paths_of(int i) const { return paths_[i]; }

 private:
  int num_measurements_;
  int num_nodes_;
  int num_links_;
  std::vector<RoutingVector> rows_;
  std::vector<std::vector<int>> paths_;
};

enum class RoutingScheme { kSinglePath, kKShortest };

RoutingScheme ParseRoutingScheme(std::string_view name);

// Builds the routing vector for an explicit node path.
RoutingVector MakeRoutingVector(const CommGraph& graph,
                                std::span<const int> node_path,
                                int measurement, int path_id);

// Minimum-hop path from `source` to the MTU; among equal-length paths the
// lexicographically smallest node-index sequence wins.
std::vector<int> ShortestPathToMtu(const CommGraph& graph, int source,
                                   const std::vector<bool>& banned_nodes = {},
                                   const std::vector<bool>& banned_links = {});

// Up to k loop-free paths in (hops, node sequence) order.
std::vector<std::vector<int>> KShortestPathsToMtu(const CommGraph& graph,
                                                  int source, int k);

// `sources[i]` is the node measurement i leaves from.
RoutingMatrix ComputeRoutes(const CommGraph& graph, std::span<const int> sources,
                            RoutingScheme scheme, int k = 1);

// rtu node for every measurement of the case, via the substation map.
std::vector<int> MeasurementSources(const GridCase& grid_case,
                                    const CommGraph& graph);

// rtu node serving each generator's bus.
std::vector<int> GeneratorSites(const GridCase& grid_case,
                                const CommGraph& graph);

// Measurements any of whose paths traverse the element.
std::set<int> MeasurementsThroughNode(const RoutingMatrix& routing, int node);
std::set<int> MeasurementsThroughLink(const RoutingMatrix& routing, int link);

// Measurements every one of whose paths traverses the node.
std::set<int> MeasurementsOnAllPathsThroughNode(const RoutingMatrix& routing,
                                                int node);

// One rtu + modem + router per substation, WAN router links mirroring the
// inter-substation branches, MTU on the LAN of the reference-bus substation.
CommGraph BuildDefaultTopology(const GridCase& grid_case,
                               std::vector<Substation> substations,
                               ChannelParams lan, ChannelParams wan);

// Groups buses joined by the listed branch ids (transformer branches);
// every other bus forms its own substation. Ids follow the lowest bus.
std::vector<Substation> GroupSubstations(const GridCase& grid_case,
                                         std::span<const int> joining_branches);

// JSON network documents.
CommGraph LoadCommGraph(const std::filesystem::path& path,
                        const GridCase* grid_case = nullptr);
CommGraph ParseCommGraph(std::string_view json_text,
                         const GridCase* grid_case = nullptr,
                         const std::string& source_name = "<memory>");
std::string CommGraphToJson(const CommGraph& graph, ChannelParams lan,
                            ChannelParams wan);

void WriteRoutingCsv(const CommGraph& graph, const RoutingMatrix& routing,
                     const std::filesystem::path& path);

}  // namespace gridcosim

#endif  // GRIDCOSIM_NETGRAPH_H_
