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

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gridcosim/errors.h"
#include "gridcosim/netgraph.h"
#include "json.hpp"

namespace gridcosim {
namespace {

using nlohmann::json;

class NetworkReader {
 public:
  explicit NetworkReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void Fail(const std::string& where, const std::string& what) {
    throw GraphError(source_ + ": " + where + ": " + what);
  }

  const json& Require(const json& obj, const char* key,
                      const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      Fail(where, std::string("missing key '") + key + "'");
    }
    return obj.at(key);
  }

  std::string String(const json& obj, const char* key,
                     const std::string& where) {
    const json& v = Require(obj, key, where);
    if (!v.is_string()) Fail(where + "/" + key, "expected a string");
    return v.get<std::string>();
  }

  ChannelParams Channel(const json& obj, ChannelParams base,
                        const std::string& where) {
    if (obj.contains("latency")) {
      if (!obj["latency"].is_number()) Fail(where + "/latency", "expected a number");
      base.latency = obj["latency"].get<double>();
    }
    if (obj.contains("loss")) {
      if (!obj["loss"].is_number()) Fail(where + "/loss", "expected a number");
      base.loss_probability = obj["loss"].get<double>();
    }
    return base;
  }

  CommGraph Read(const json& doc, const GridCase* grid_case) {
    if (!doc.is_object()) Fail("/", "network document must be an object");
    ChannelParams lan{0.002, 0.0};
    ChannelParams wan{0.010, 0.0};
    if (doc.contains("defaults")) {
      const json& d = doc["defaults"];
      if (d.contains("lan")) lan = Channel(d["lan"], lan, "/defaults/lan");
      if (d.contains("wan")) wan = Channel(d["wan"], wan, "/defaults/wan");
    }

    std::vector<Substation> substations;
    if (doc.contains("substations")) {
      const json& js = doc["substations"];
      if (!js.is_array()) Fail("/substations", "expected an array");
      for (size_t s = 0; s < js.size(); ++s) {
        std::string where = "/substations/" + std::to_string(s);
        const json& id = Require(js[s], "id", where);
        const json& buses = Require(js[s], "buses", where);
        if (!id.is_number_integer()) Fail(where + "/id", "expected an integer");
        if (!buses.is_array()) Fail(where + "/buses", "expected an array");
        Substation sub{id.get<int>(), {}};
        for (const json& b : buses) {
          if (!b.is_number_integer()) Fail(where + "/buses", "expected integers");
          sub.buses.push_back(b.get<int>());
        }
        substations.push_back(std::move(sub));
      }
    }

    std::vector<CommNode> nodes;
    std::map<std::string, int> node_lookup;
    const json& jnodes = Require(doc, "nodes", "");
    if (!jnodes.is_array()) Fail("/nodes", "expected an array");
    for (size_t v = 0; v < jnodes.size(); ++v) {
      std::string where = "/nodes/" + std::to_string(v);
      CommNode node;
      node.id = String(jnodes[v], "id", where);
      std::string kind = String(jnodes[v], "kind", where);
      if (kind == "rtu") {
        node.kind = NodeKind::kRtu;
      } else if (kind == "modem") {
        node.kind = NodeKind::kModem;
      } else if (kind == "router") {
        node.kind = NodeKind::kRouter;
      } else if (kind == "mtu") {
        node.kind = NodeKind::kMtu;
      } else {
        Fail(where + "/kind", "unknown node kind '" + kind + "'");
      }
      if (jnodes[v].contains("substation")) {
        if (!jnodes[v]["substation"].is_number_integer()) {
          Fail(where + "/substation", "expected an integer");
        }
        node.substation = jnodes[v]["substation"].get<int>();
      }
      node_lookup.emplace(node.id, static_cast<int>(v));
      nodes.push_back(std::move(node));
    }

    std::vector<CommLink> links;
    const json& jlinks = Require(doc, "links", "");
    if (!jlinks.is_array()) Fail("/links", "expected an array");
    for (size_t e = 0; e < jlinks.size(); ++e) {
      std::string where = "/links/" + std::to_string(e);
      const json& jl = jlinks[e];
      CommLink link;
      link.id = jl.contains("id") ? String(jl, "id", where)
                                  : "link" + std::to_string(e);
      for (auto [key, slot] : {std::pair{"a", &link.a}, std::pair{"b", &link.b}}) {
        std::string name = String(jl, key, where);
        auto it = node_lookup.find(name);
        if (it == node_lookup.end()) {
          Fail(where + "/" + key, "unknown node '" + name + "'");
        }
        *slot = it->second;
      }
      std::string kind = jl.value("kind", "lan");
      if (kind == "lan") {
        link.kind = LinkKind::kLan;
      } else if (kind == "wan") {
        link.kind = LinkKind::kWan;
      } else {
        Fail(where + "/kind", "unknown link kind '" + kind + "'");
      }
      link.channel =
          Channel(jl, link.kind == LinkKind::kLan ? lan : wan, where);
      links.push_back(std::move(link));
    }

    CommGraph graph = [&] {
      try {
        return CommGraph(std::move(nodes), std::move(links),
                         std::move(substations));
      } catch (const GraphError& e) {
        throw GraphError(source_ + ": " + e.what());
      }
    }();

    if (grid_case != nullptr) {
      try {
        for (const Substation& s : graph.substations()) {
          for (int bus : s.buses) grid_case->bus_index(bus);
        }
        MeasurementSources(*grid_case, graph);
        GeneratorSites(*grid_case, graph);
      } catch (const Error& e) {
        throw GraphError(source_ + ": case cross-reference: " + e.what());
      }
    }
    return graph;
  }

 private:
  std::string source_;
};

}  // namespace

CommGraph ParseCommGraph(std::string_view json_text,
                         const GridCase* grid_case,
                         const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw GraphError(source_name + ": " + e.what());
  }
  return NetworkReader(source_name).Read(doc, grid_case);
}

CommGraph LoadCommGraph(const std::filesystem::path& path,
                        const GridCase* grid_case) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCommGraph(buffer.str(), grid_case, path.string());
}

std::string CommGraphToJson(const CommGraph& graph, ChannelParams lan,
                            ChannelParams wan) {
  json doc;
  doc["defaults"] = {
      {"lan", {{"latency", lan.latency}, {"loss", lan.loss_probability}}},
      {"wan", {{"latency", wan.latency}, {"loss", wan.loss_probability}}}};
  doc["substations"] = json::array();
  for (const Substation& s : graph.substations()) {
    doc["substations"].push_back({{"id", s.id}, {"buses", s.buses}});
  }
  doc["nodes"] = json::array();
  for (const CommNode& node : graph.nodes()) {
    doc["nodes"].push_back({{"id", node.id},
                            {"kind", std::string(NodeKindName(node.kind))},
                            {"substation", node.substation}});
  }
  doc["links"] = json::array();
  for (const CommLink& link : graph.links()) {
    json jl = {{"id", link.id},
               {"a", graph.nodes()[link.a].id},
               {"b", graph.nodes()[link.b].id},
               {"kind", std::string(LinkKindName(link.kind))}};
    const ChannelParams& def = link.kind == LinkKind::kLan ? lan : wan;
    if (link.channel.latency != def.latency) jl["latency"] = link.channel.latency;
    if (link.channel.loss_probability != def.loss_probability) {
      jl["loss"] = link.channel.loss_probability;
    }
    doc["links"].push_back(jl);
  }
  return doc.dump(2);
}

void WriteRoutingCsv(const CommGraph& graph, const RoutingMatrix& routing,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "measurement,path,hops,route";
  for (const CommNode& node : graph.nodes()) out << ",node:" << node.id;
  for (const CommLink& link : graph.links()) out << ",link:" << link.id;
  out << "\n";
  for (const RoutingVector& row : routing.rows()) {
    out << row.measurement << "," << row.path_id << ","
        << row.link_sequence.size() << ",";
    for (size_t h = 0; h < row.node_sequence.size(); ++h) {
      out << (h ? ">" : "") << graph.nodes()[row.node_sequence[h]].id;
    }
    for (bool b : row.node_part) out << "," << (b ? 1 : 0);
    for (bool b : row.link_part) out << "," << (b ? 1 : 0);
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gridcosim
