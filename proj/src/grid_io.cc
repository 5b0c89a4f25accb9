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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "gridcosim/errors.h"
#include "gridcosim/grid.h"
#include "json.hpp"

namespace gridcosim {
namespace {

using nlohmann::json;

class CaseReader {
 public:
  explicit CaseReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void Fail(const std::string& where, const std::string& what) {
    throw ModelError(source_ + ": " + where + ": " + what);
  }

  const json& Require(const json& obj, const char* key,
                      const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      Fail(where, std::string("missing key '") + key + "'");
    }
    return obj.at(key);
  }

  double Number(const json& obj, const char* key, const std::string& where) {
    const json& v = Require(obj, key, where);
    if (!v.is_number()) Fail(where + "/" + key, "expected a number");
    return v.get<double>();
  }

  int Integer(const json& obj, const char* key, const std::string& where) {
    const json& v = Require(obj, key, where);
    if (!v.is_number_integer()) Fail(where + "/" + key, "expected an integer");
    return v.get<int>();
  }

  GridCase Read(const json& doc) {
    if (!doc.is_object()) Fail("/", "case document must be an object");
    double base_mva = doc.value("base_mva", 100.0);

    std::vector<Bus> buses;
    const json& jbuses = Require(doc, "buses", "");
    if (!jbuses.is_array()) Fail("/buses", "expected an array");
    for (size_t i = 0; i < jbuses.size(); ++i) {
      std::string where = "/buses/" + std::to_string(i);
      buses.push_back({Integer(jbuses[i], "id", where),
                       jbuses[i].contains("load")
                           ? Number(jbuses[i], "load", where)
                           : 0.0});
    }

    std::vector<Branch> branches;
    const json& jbranches = Require(doc, "branches", "");
    if (!jbranches.is_array()) Fail("/branches", "expected an array");
    for (size_t k = 0; k < jbranches.size(); ++k) {
      std::string where = "/branches/" + std::to_string(k);
      const json& jb = jbranches[k];
      Branch br;
      br.id = jb.contains("id") ? Integer(jb, "id", where)
                                : static_cast<int>(k) + 1;
      br.from_bus = Integer(jb, "from", where);
      br.to_bus = Integer(jb, "to", where);
      br.reactance = Number(jb, "x", where);
      if (jb.contains("limit") && !jb.at("limit").is_null()) {
        br.limit = Number(jb, "limit", where);
      }
      branches.push_back(br);
    }

    std::vector<Generator> generators;
    const json& jgens = Require(doc, "generators", "");
    if (!jgens.is_array()) Fail("/generators", "expected an array");
    for (size_t g = 0; g < jgens.size(); ++g) {
      std::string where = "/generators/" + std::to_string(g);
      const json& jg = jgens[g];
      generators.push_back({Integer(jg, "bus", where),
                            jg.contains("p_min") ? Number(jg, "p_min", where)
                                                 : 0.0,
                            Number(jg, "p_max", where),
                            Number(jg, "cost", where)});
    }

    int reference = doc.contains("reference_bus")
                        ? Integer(doc, "reference_bus", "")
                        : (buses.empty() ? 0 : buses.front().id);

    std::vector<MeasurementDef> plan;
    const json& jmeas = Require(doc, "measurements", "");
    if (jmeas.is_object()) {
      std::string kind = jmeas.value("plan", "full");
      if (kind != "full") Fail("/measurements/plan", "only 'full' is known");
      plan = FullMeasurementPlan(buses, branches,
                                 Number(jmeas, "sigma", "/measurements"));
    } else if (jmeas.is_array()) {
      for (size_t i = 0; i < jmeas.size(); ++i) {
        std::string where = "/measurements/" + std::to_string(i);
        const json& jm = jmeas[i];
        const json& jkind = Require(jm, "kind", where);
        if (!jkind.is_string()) Fail(where + "/kind", "expected a string");
        MeasurementDef def;
        try {
          def.kind = ParseMeasurementKind(jkind.get<std::string>());
        } catch (const ModelError& e) {
          Fail(where + "/kind", e.what());
        }
        def.target = Integer(jm, "target", where);
        def.sigma = Number(jm, "sigma", where);
        plan.push_back(def);
      }
    } else {
      Fail("/measurements", "expected an object or an array");
    }

    try {
      return GridCase(std::move(buses), std::move(branches),
                      std::move(generators), reference, std::move(plan),
                      base_mva);
    } catch (const ModelError& e) {
      throw ModelError(source_ + ": " + e.what());
    }
  }

 private:
  std::string source_;
};

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

GridCase ParseGridCase(std::string_view json_text,
                       const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelError(source_name + ": " + e.what());
  }
  return CaseReader(source_name).Read(doc);
}

GridCase LoadGridCase(const std::filesystem::path& path) {
  return ParseGridCase(ReadFile(path), path.string());
}

std::string GridCaseToJson(const GridCase& grid_case) {
  json doc;
  doc["base_mva"] = grid_case.base_mva();
  doc["reference_bus"] = grid_case.reference_bus();
  doc["buses"] = json::array();
  for (const Bus& bus : grid_case.buses()) {
    doc["buses"].push_back({{"id", bus.id}, {"load", bus.load}});
  }
  doc["branches"] = json::array();
  for (const Branch& br : grid_case.branches()) {
    json jb = {{"id", br.id}, {"from", br.from_bus}, {"to", br.to_bus},
               {"x", br.reactance}};
    if (std::isfinite(br.limit)) jb["limit"] = br.limit;
    doc["branches"].push_back(jb);
  }
  doc["generators"] = json::array();
  for (const Generator& g : grid_case.generators()) {
    doc["generators"].push_back({{"bus", g.bus},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"cost", g.cost}});
  }
  doc["measurements"] = json::array();
  for (const MeasurementDef& def : grid_case.measurements()) {
    doc["measurements"].push_back(
        {{"kind", std::string(MeasurementKindName(def.kind))},
         {"target", def.target},
         {"sigma", def.sigma}});
  }
  return doc.dump(2);
}

void WriteHMatrixCsv(const GridCase& grid_case,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  Eigen::MatrixXd h = BuildHMatrix(grid_case);
  out << "measurement,label";
  for (int i = 0; i < grid_case.num_buses(); ++i) {
    if (grid_case.state_column(i) >= 0) {
      out << ",theta" << grid_case.buses()[i].id;
    }
  }
  out << "\n" << std::setprecision(17);
  for (int r = 0; r < h.rows(); ++r) {
    out << r << "," << MeasurementLabel(grid_case, r);
    for (int c = 0; c < h.cols(); ++c) out << "," << h(r, c);
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gridcosim
