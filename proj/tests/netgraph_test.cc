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
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gridcosim/errors.h"
#include "test_util.h"

namespace gridcosim {
namespace {

using testing::AllSimplePaths;
using testing::DataFile;
using testing::Toy4;

std::vector<bool> Bits(std::initializer_list<int> v) {
  std::vector<bool> out;
  for (int b : v) out.push_back(b != 0);
  return out;
}

// rtu R with two disjoint two-hop routes to the MTU and a longer third.
CommGraph Diamond() {
  std::vector<CommNode> nodes{{"R", NodeKind::kRtu, 1},
                              {"A", NodeKind::kRouter, 0},
                              {"B", NodeKind::kRouter, 0},
                              {"C", NodeKind::kRouter, 0},
                              {"M", NodeKind::kMtu, 0}};
  std::vector<CommLink> links{{"ra", 0, 1, LinkKind::kWan, {0.01, 0}},
                              {"rb", 0, 2, LinkKind::kWan, {0.01, 0}},
                              {"am", 1, 4, LinkKind::kWan, {0.01, 0}},
                              {"bm", 2, 4, LinkKind::kWan, {0.01, 0}},
                              {"bc", 2, 3, LinkKind::kWan, {0.01, 0}},
                              {"cm", 3, 4, LinkKind::kWan, {0.01, 0}}};
  return CommGraph(nodes, links, {{1, {1}}});
}

TEST(CommGraph, ToyPathVectors) {
  CommGraph g = Toy4();
  std::vector<int> path = ShortestPathToMtu(g, g.node_index("N1"));
  ASSERT_EQ(path, (std::vector<int>{0, 1, 3}));
  RoutingVector rv = MakeRoutingVector(g, path, 0, 0);
  EXPECT_EQ(rv.node_part, Bits({1, 1, 0, 1}));
  EXPECT_EQ(rv.link_part, Bits({1, 0, 1}));
  EXPECT_EQ(rv.link_sequence, (std::vector<int>{0, 2}));
}

TEST(CommGraph, RtuAtTheMtuHasTrivialPath) {
  std::vector<CommNode> nodes{{"M", NodeKind::kMtu, 0},
                              {"R", NodeKind::kRtu, 1}};
  std::vector<CommLink> links{{"l", 0, 1, LinkKind::kLan, {0.001, 0}}};
  CommGraph g(nodes, links, {{1, {1}}});
  std::vector<int> self = ShortestPathToMtu(g, g.mtu());
  ASSERT_EQ(self, std::vector<int>{0});
  RoutingVector rv = MakeRoutingVector(g, self, 0, 0);
  EXPECT_EQ(rv.node_part, Bits({1, 0}));
  EXPECT_EQ(rv.link_part, Bits({0}));
  EXPECT_TRUE(rv.link_sequence.empty());
}

TEST(CommGraph, ValidationErrors) {
  std::vector<CommNode> nodes{{"a", NodeKind::kRtu, 1},
                              {"m", NodeKind::kMtu, 0}};
  std::vector<CommLink> ok{{"l", 0, 1, LinkKind::kLan, {0.001, 0}}};
  EXPECT_NO_THROW(CommGraph(nodes, ok, {{1, {1}}}));
  EXPECT_THROW(CommGraph(nodes, {}, {{1, {1}}}), GraphError);
  std::vector<CommLink> self{{"l", 0, 0, LinkKind::kLan, {0.001, 0}}};
  EXPECT_THROW(CommGraph(nodes, self, {{1, {1}}}), GraphError);
  std::vector<CommLink> dup{{"l", 0, 1, LinkKind::kLan, {0.001, 0}},
                            {"k", 1, 0, LinkKind::kLan, {0.001, 0}}};
  EXPECT_THROW(CommGraph(nodes, dup, {{1, {1}}}), GraphError);
  std::vector<CommLink> neg{{"l", 0, 1, LinkKind::kLan, {-1, 0}}};
  EXPECT_THROW(CommGraph(nodes, neg, {{1, {1}}}), GraphError);
  std::vector<CommLink> lossy{{"l", 0, 1, LinkKind::kLan, {0.0, 1.5}}};
  EXPECT_THROW(CommGraph(nodes, lossy, {{1, {1}}}), GraphError);
  std::vector<CommNode> two_mtu{{"a", NodeKind::kMtu, 0},
                                {"m", NodeKind::kMtu, 0}};
  EXPECT_THROW(CommGraph(two_mtu, ok, {}), GraphError);
  std::vector<CommNode> dup_id{{"a", NodeKind::kRtu, 1},
                               {"a", NodeKind::kMtu, 0}};
  EXPECT_THROW(CommGraph(dup_id, ok, {{1, {1}}}), GraphError);
  EXPECT_THROW(CommGraph(nodes, ok, {{1, {1}}, {2, {1}}}), GraphError);
  EXPECT_THROW(Toy4().node_index("nope"), GraphError);
}

TEST(CommGraph, KShortestGivesDisjointPathsAndMatchesOracle) {
  CommGraph g = Diamond();
  std::vector<std::vector<int>> two = KShortestPathsToMtu(g, 0, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], (std::vector<int>{0, 1, 4}));
  EXPECT_EQ(two[1], (std::vector<int>{0, 2, 4}));

  std::vector<std::vector<int>> all = AllSimplePaths(g, 0);
  std::vector<std::vector<int>> many = KShortestPathsToMtu(g, 0, 10);
  ASSERT_EQ(many.size(), all.size());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  EXPECT_EQ(many, all);
}

TEST(CommGraph, KShortestOnDefaultTopologyMatchesOracleLengths) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  CommGraph g = LoadCommGraph(DataFile("ieee14_network.json"), &c);
  for (int src : {g.node_index("rtu_s13"), g.node_index("rtu_s3")}) {
    std::vector<std::vector<int>> all = AllSimplePaths(g, src);
    std::vector<size_t> lengths;
    for (const auto& p : all) lengths.push_back(p.size());
    std::sort(lengths.begin(), lengths.end());
    std::vector<std::vector<int>> k3 = KShortestPathsToMtu(g, src, 3);
    ASSERT_EQ(k3.size(), 3u);
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(k3[i].size(), lengths[i]);
      EXPECT_NE(std::find(all.begin(), all.end(), k3[i]), all.end());
    }
  }
}

TEST(CommGraph, MeasurementsThroughElements) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  CommGraph g = LoadCommGraph(DataFile("ieee14_network.json"), &c);
  RoutingMatrix r = ComputeRoutes(g, MeasurementSources(c, g),
                                  RoutingScheme::kSinglePath);
  EXPECT_EQ(MeasurementsThroughNode(r, g.mtu()).size(),
            static_cast<size_t>(c.num_measurements()));

  // A WAN link that no shortest path uses.
  int unused = -1;
  for (int l = 0; l < g.num_links(); ++l) {
    if (MeasurementsThroughLink(r, l).empty()) unused = l;
  }
  ASSERT_GE(unused, 0);
  EXPECT_TRUE(MeasurementsThroughLink(r, unused).empty());

  std::set<int> backbone = MeasurementsThroughNode(r, g.node_index("router_s1"));
  std::set<int> leaf = MeasurementsThroughNode(r, g.node_index("router_s13"));
  EXPECT_FALSE(leaf.empty());
  EXPECT_TRUE(std::includes(backbone.begin(), backbone.end(), leaf.begin(),
                            leaf.end()));
  EXPECT_EQ(MeasurementsOnAllPathsThroughNode(r, g.node_index("router_s1")),
            backbone);
}

TEST(CommGraph, RoutesAreSimplePathsEndingAtTheMtu) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  CommGraph g = LoadCommGraph(DataFile("ieee14_network.json"), &c);
  for (int k : {1, 2, 3}) {
    RoutingMatrix r = ComputeRoutes(g, MeasurementSources(c, g),
                                    k == 1 ? RoutingScheme::kSinglePath
                                           : RoutingScheme::kKShortest,
                                    k);
    std::vector<int> sources = MeasurementSources(c, g);
    for (int i = 0; i < c.num_measurements(); ++i) {
      int available = static_cast<int>(AllSimplePaths(g, sources[i]).size());
      EXPECT_EQ(static_cast<int>(r.paths_of(i).size()), std::min(k, available));
    }
    for (const RoutingVector& rv : r.rows()) {
      EXPECT_EQ(rv.node_sequence.back(), g.mtu());
      std::set<int> seen(rv.node_sequence.begin(), rv.node_sequence.end());
      EXPECT_EQ(seen.size(), rv.node_sequence.size());
      ASSERT_EQ(rv.link_sequence.size() + 1, rv.node_sequence.size());
      for (size_t h = 0; h < rv.link_sequence.size(); ++h) {
        EXPECT_EQ(rv.link_sequence[h],
                  g.link_between(rv.node_sequence[h], rv.node_sequence[h + 1]));
      }
      int nodes_on = std::count(rv.node_part.begin(), rv.node_part.end(), true);
      EXPECT_EQ(nodes_on, static_cast<int>(rv.node_sequence.size()));
    }
  }
}

TEST(CommGraph, RoutingIsDeterministic) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  CommGraph g = LoadCommGraph(DataFile("ieee14_network.json"), &c);
  std::vector<int> src = MeasurementSources(c, g);
  RoutingMatrix a = ComputeRoutes(g, src, RoutingScheme::kKShortest, 2);
  RoutingMatrix b = ComputeRoutes(g, src, RoutingScheme::kKShortest, 2);
  ASSERT_EQ(a.rows().size(), b.rows().size());
  for (size_t i = 0; i < a.rows().size(); ++i) {
    EXPECT_EQ(a.rows()[i].node_sequence, b.rows()[i].node_sequence);
  }
}

TEST(CommGraph, ShortestPathTieBreakIsLexicographic) {
  CommGraph g = Diamond();
  std::vector<bool> banned(g.num_nodes(), false);
  banned[1] = true;
  EXPECT_EQ(ShortestPathToMtu(g, 0), (std::vector<int>{0, 1, 4}));
  EXPECT_EQ(ShortestPathToMtu(g, 0, banned), (std::vector<int>{0, 2, 4}));
  banned[2] = true;
  EXPECT_TRUE(ShortestPathToMtu(g, 0, banned).empty());
}

TEST(CommGraph, BundledNetworkMatchesDefaultTopology) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  CommGraph file = LoadCommGraph(DataFile("ieee14_network.json"), &c);
  std::vector<int> joining{8, 9, 10, 14};
  CommGraph built = BuildDefaultTopology(c, GroupSubstations(c, joining),
                                         {0.002, 0.0}, {0.010, 0.0});
  EXPECT_EQ(CommGraphToJson(file, {0.002, 0.0}, {0.010, 0.0}),
            CommGraphToJson(built, {0.002, 0.0}, {0.010, 0.0}));
  EXPECT_EQ(file.num_nodes(), 31);
}

TEST(CommGraph, JsonRoundTrip) {
  CommGraph g = Toy4();
  std::string text = CommGraphToJson(g, {0.002, 0.0}, {0.010, 0.0});
  CommGraph back = ParseCommGraph(text);
  EXPECT_EQ(CommGraphToJson(back, {0.002, 0.0}, {0.010, 0.0}), text);
  EXPECT_THROW(ParseCommGraph("{\"nodes\": 3}"), GraphError);
}

TEST(CommGraph, RoutingCsvHeader) {
  CommGraph g = Toy4();
  std::vector<int> src{0, 2};
  RoutingMatrix r = ComputeRoutes(g, src, RoutingScheme::kSinglePath);
  auto path = std::filesystem::temp_directory_path() / "gridcosim_routes.csv";
  WriteRoutingCsv(g, r, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header,
            "measurement,path,hops,route,node:N1,node:N2,node:N3,node:N4,"
            "link:L1,link:L2,link:L3");
  EXPECT_EQ(row, "0,0,2,N1>N2>N4,1,1,0,1,1,0,1");
  std::filesystem::remove(path);
}

TEST(Routing, SchemeNames) {
  EXPECT_EQ(ParseRoutingScheme("single"), RoutingScheme::kSinglePath);
  EXPECT_EQ(ParseRoutingScheme("k-shortest"), RoutingScheme::kKShortest);
  EXPECT_THROW(ParseRoutingScheme("flood"), ConfigError);
}

}  // namespace
}  // namespace gridcosim
