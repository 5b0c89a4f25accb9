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
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gridcosim/engine.h"
#include "gridcosim/errors.h"
#include "json.hpp"

namespace gridcosim {
namespace {

using nlohmann::json;

class ScenarioReader {
 public:
  ScenarioReader(std::string source, std::filesystem::path base_dir)
      : source_(std::move(source)), base_dir_(std::move(base_dir)) {}

  [[noreturn]] void Fail(const std::string& where, const std::string& what) {
    throw ConfigError(source_ + ": " + where + ": " + what);
  }

  double Number(const json& obj, const char* key, const std::string& where,
                double fallback) {
    if (!obj.contains(key) || obj[key].is_null()) return fallback;
    if (!obj[key].is_number()) Fail(where + "/" + key, "expected a number");
    return obj[key].get<double>();
  }

  std::uint64_t Seed(const json& obj, const char* key, const std::string& where,
                     std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned()) {
      Fail(where + "/" + key, "expected a nonnegative integer");
    }
    return obj[key].get<std::uint64_t>();
  }

  std::filesystem::path Path(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string()) {
      Fail(std::string("/") + key, "expected a file path string");
    }
    std::filesystem::path p = obj[key].get<std::string>();
    return p.is_absolute() ? p : base_dir_ / p;
  }

  std::vector<std::string> Strings(const json& obj, const char* key,
                                   const std::string& where) {
    std::vector<std::string> out;
    if (!obj.contains(key)) return out;
    if (!obj[key].is_array()) Fail(where + "/" + key, "expected an array");
    for (const json& v : obj[key]) {
      if (!v.is_string()) Fail(where + "/" + key, "expected strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  AttackConfig Attack(const json& ja) {
    const std::string where = "/attack";
    AttackConfig a;
    if (!ja.is_object()) Fail(where, "expected an object");
    std::string type = ja.value("type", "none");
    if (type == "none") {
      a.form = AttackForm::kNone;
      return a;
    } else if (type == "explicit") {
      a.form = AttackForm::kExplicit;
    } else if (type == "targeted") {
      a.form = AttackForm::kTargeted;
    } else if (type == "bias") {
      a.form = AttackForm::kBias;
    } else {
      Fail(where + "/type", "unknown attack type '" + type + "'");
    }
    a.nodes = Strings(ja, "nodes", where);
    a.links = Strings(ja, "links", where);
    a.strict = ja.value("strict", true);
    a.start_time = Number(ja, "start_time", where, 0.0);
    if (ja.contains("setpoint_bias")) {
      if (!ja["setpoint_bias"].is_array()) {
        Fail(where + "/setpoint_bias", "expected an array");
      }
      for (const json& v : ja["setpoint_bias"]) {
        if (!v.is_number()) Fail(where + "/setpoint_bias", "expected numbers");
        a.setpoint_bias.push_back(v.get<double>());
      }
    }
    if (a.form == AttackForm::kExplicit) {
      if (!ja.contains("c") || !ja["c"].is_array()) {
        Fail(where + "/c", "expected an array of numbers");
      }
      for (const json& v : ja["c"]) {
        if (!v.is_number()) Fail(where + "/c", "expected numbers");
        a.c.push_back(v.get<double>());
      }
      if (ja.contains("d")) {
        if (!ja["d"].is_array()) Fail(where + "/d", "expected an array");
        for (const json& v : ja["d"]) {
          if (!v.is_number_integer()) Fail(where + "/d", "expected row ids");
          a.removed.push_back(v.get<int>());
        }
      }
    } else {
      const char* key = a.form == AttackForm::kBias ? "measurement" : "target";
      if (!ja.contains(key) || !ja[key].is_number_integer()) {
        Fail(where + "/" + key, "expected a measurement id");
      }
      a.target = ja[key].get<int>();
      a.mu = Number(ja, a.form == AttackForm::kBias ? "bias" : "mu", where,
                    0.0);
    }
    return a;
  }

  ScenarioConfig Read(const json& doc) {
    if (!doc.is_object()) Fail("/", "scenario must be an object");
    ScenarioConfig cfg;
    cfg.name = doc.value("name", "scenario");
    cfg.case_path = Path(doc, "case");
    cfg.network_path = Path(doc, "network");
    cfg.measurement_period =
        Number(doc, "measurement_period", "", cfg.measurement_period);
    cfg.opf_period = Number(doc, "opf_period", "", cfg.opf_period);
    cfg.duration = Number(doc, "duration", "", cfg.duration);
    cfg.significance = Number(doc, "significance", "", cfg.significance);
    cfg.noise = doc.value("noise", true);
    if (doc.contains("seeds")) {
      const json& js = doc["seeds"];
      cfg.noise_seed = Seed(js, "noise", "/seeds", cfg.noise_seed);
      cfg.loss_seed = Seed(js, "loss", "/seeds", cfg.loss_seed);
    }
    if (doc.contains("routing")) {
      const json& jr = doc["routing"];
      try {
        cfg.routing = ParseRoutingScheme(jr.value("scheme", "single"));
      } catch (const ConfigError& e) {
        Fail("/routing/scheme", e.what());
      }
      cfg.routing_k = jr.value("k", 1);
    }
    if (doc.contains("link_loss") && !doc["link_loss"].is_null()) {
      cfg.link_loss = Number(doc, "link_loss", "", 0.0);
    }
    if (doc.contains("attack")) cfg.attack = Attack(doc["attack"]);
    try {
      cfg.Validate();
    } catch (const ConfigError& e) {
      Fail("/", e.what());
    }
    return cfg;
  }

 private:
  std::string source_;
  std::filesystem::path base_dir_;
};

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseNum(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace

ScenarioConfig ParseScenario(std::string_view json_text,
                             const std::filesystem::path& base_dir,
                             const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return ScenarioReader(source_name, base_dir).Read(doc);
}

ScenarioConfig LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseScenario(buffer.str(), path.parent_path(), path.string());
}

int ReferenceRecord(const TraceLayout& layout,
                    const std::vector<TraceRecord>& records) {
  if (records.empty()) return -1;
  if (layout.attack_start < 0.0) return static_cast<int>(records.size()) - 1;
  int ref = 0;
  for (int r = 0; r < static_cast<int>(records.size()); ++r) {
    if (records[r].time < layout.attack_start) ref = r;
  }
  return ref;
}

std::string TraceToCsv(const TraceLayout& layout,
                       const std::vector<TraceRecord>& records) {
  if (records.empty()) throw ContractError("trace has no records");
  std::ostringstream out;
  out << "time,attack_active,se_ran,bdd_statistic,bdd_threshold,bdd_alarm,"
         "injection_sum";
  for (int g = 0; g < layout.num_generators; ++g) out << ",setpoint_g" << g;
  for (int g = 0; g < layout.num_generators; ++g) out << ",gen_g" << g;
  for (int id : layout.branch_ids) out << ",flow_" << id;
  for (int id : layout.branch_ids) out << ",flow_norm_" << id;
  for (int id : layout.state_bus_ids) out << ",theta_" << id;
  for (int id : layout.state_bus_ids) out << ",est_theta_" << id;
  for (int id : layout.bus_ids) out << ",load_est_" << id;
  for (int i = 0; i < layout.num_measurements; ++i) out << ",z_" << i;
  for (int i = 0; i < layout.num_measurements; ++i) out << ",avail_" << i;
  out << "\n";

  const TraceRecord& ref = records[ReferenceRecord(layout, records)];
  for (const TraceRecord& r : records) {
    out << Num(r.time) << "," << r.attack_active << "," << r.se_ran << ","
        << Num(r.bdd_statistic) << "," << Num(r.bdd_threshold) << ","
        << r.bdd_alarm << "," << Num(r.injection_sum);
    for (double v : r.setpoints) out << "," << Num(v);
    for (double v : r.generation) out << "," << Num(v);
    for (int k = 0; k < r.true_flows.size(); ++k) out << "," << Num(r.true_flows[k]);
    for (int k = 0; k < r.true_flows.size(); ++k) {
      double base = ref.true_flows[k];
      out << ","
          << Num(base == 0.0 ? std::nan("") : r.true_flows[k] / base);
    }
    for (int k = 0; k < r.true_angles.size(); ++k) out << "," << Num(r.true_angles[k]);
    for (int k = 0; k < r.estimate.size(); ++k) out << "," << Num(r.estimate[k]);
    for (double v : r.load_estimates) out << "," << Num(v);
    for (int i = 0; i < r.pool_values.size(); ++i) out << "," << Num(r.pool_values[i]);
    for (bool b : r.pool_available) out << "," << (b ? 1 : 0);
    out << "\n";
  }
  return out.str();
}

void ExportTrace(const TraceLayout& layout,
                 const std::vector<TraceRecord>& records,
                 const std::filesystem::path& path) {
  std::string text = TraceToCsv(layout, records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

ParsedTrace ParseTrace(std::string_view csv) {
  ParsedTrace parsed;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trace");
  {
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) parsed.header.push_back(cell);
  }
  auto starts = [](const std::string& s, const char* prefix) {
    return s.rfind(prefix, 0) == 0;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != parsed.header.size()) {
      throw IoError("trace row has " + std::to_string(cells.size()) +
                    " cells, header has " +
                    std::to_string(parsed.header.size()));
    }
    TraceRecord r;
    std::vector<double> flows, norm, angles, est, zs;
    std::vector<double> avail;
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string& name = parsed.header[c];
      double v = ParseNum(cells[c]);
      if (name == "time") {
        r.time = v;
      } else if (name == "attack_active") {
        r.attack_active = v != 0.0;
      } else if (name == "se_ran") {
        r.se_ran = v != 0.0;
      } else if (name == "bdd_statistic") {
        r.bdd_statistic = v;
      } else if (name == "bdd_threshold") {
        r.bdd_threshold = v;
      } else if (name == "bdd_alarm") {
        r.bdd_alarm = v != 0.0;
      } else if (name == "injection_sum") {
        r.injection_sum = v;
      } else if (starts(name, "setpoint_g")) {
        r.setpoints.push_back(v);
      } else if (starts(name, "gen_g")) {
        r.generation.push_back(v);
      } else if (starts(name, "flow_norm_")) {
        norm.push_back(v);
      } else if (starts(name, "flow_")) {
        flows.push_back(v);
      } else if (starts(name, "est_theta_")) {
        est.push_back(v);
      } else if (starts(name, "theta_")) {
        angles.push_back(v);
      } else if (starts(name, "load_est_")) {
        r.load_estimates.push_back(v);
      } else if (starts(name, "z_")) {
        zs.push_back(v);
      } else if (starts(name, "avail_")) {
        avail.push_back(v);
      }
    }
    r.true_flows = Eigen::Map<Eigen::VectorXd>(flows.data(), flows.size());
    r.true_angles = Eigen::Map<Eigen::VectorXd>(angles.data(), angles.size());
    r.estimate = Eigen::Map<Eigen::VectorXd>(est.data(), est.size());
    r.pool_values = Eigen::Map<Eigen::VectorXd>(zs.data(), zs.size());
    for (double v : avail) r.pool_available.push_back(v != 0.0);
    parsed.records.push_back(std::move(r));
    parsed.normalized_flows.push_back(std::move(norm));
  }
  return parsed;
}

ParsedTrace ReadTrace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseTrace(buffer.str());
}

}  // namespace gridcosim
