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

#ifndef GRIDCOSIM_ENGINE_H_
#define GRIDCOSIM_ENGINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gridcosim/attack.h"
#include "gridcosim/dispatch.h"
#include "gridcosim/estimation.h"
#include "gridcosim/grid.h"
#include "gridcosim/netgraph.h"
#include "gridcosim/netsim.h"

namespace gridcosim {

enum class AttackForm { kNone, kExplicit, kTargeted, kBias };

struct AttackConfig {
  AttackForm form = AttackForm::kNone;
  // Compromised comm elements by id. Empty means the values are altered at
  // the source, before the packets leave the RTU.
  std::vector<std::string> nodes;
  std::vector<std::string> links;
  // kExplicit
  std::vector<double> c;
  std::vector<int> removed;  // measurement ids with d = 1
  // kTargeted and kBias
  int target = -1;
  double mu = 0.0;
  // When false, a and d are cut down to what the compromised elements can
  // reach instead of rejecting the configuration.
  bool strict = true;
  double start_time = 0.0;
  // Per generator offsets added to set-point packets crossing a compromised
  // router. Empty disables set-point tampering.
  std::vector<double> setpoint_bias;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::filesystem::path case_path;
  std::filesystem::path network_path;
  double measurement_period = 5.0;
  double opf_period = 30.0;
  double duration = 300.0;
  std::uint64_t noise_seed = 1;
  std::uint64_t loss_seed = 2;
  bool noise = true;
  double significance = kDefaultSignificance;
  RoutingScheme routing = RoutingScheme::kSinglePath;
  int routing_k = 1;
  // Overrides the loss probability of every link when set.
  std::optional<double> link_loss;
  AttackConfig attack;

  // Throws ConfigError on invalid periods, durations or seeds.
  void Validate() const;
};

ScenarioConfig LoadScenario(const std::filesystem::path& path);
// Relative file paths are resolved against `base_dir`.
ScenarioConfig ParseScenario(std::string_view json_text,
                             const std::filesystem::path& base_dir,
                             const std::string& source_name = "<memory>");

struct TraceRecord {
  double time = 0.0;
  bool attack_active = false;
  Eigen::VectorXd true_angles;     // non-reference buses
  Eigen::VectorXd true_flows;      // per branch
  std::vector<double> generation;  // physical output per generator
  std::vector<double> setpoints;   // last commanded per generator
  double injection_sum = 0.0;
  // Pool as seen by the control center at this tick.
  Eigen::VectorXd pool_values;
  std::vector<bool> pool_available;
  bool se_ran = false;
  Eigen::VectorXd estimate;        // latest estimate (zeros before the first)
  double bdd_statistic = 0.0;
  double bdd_threshold = 0.0;
  bool bdd_alarm = false;
  std::vector<double> load_estimates;  // latest, per bus
};

// Column naming for trace files.
struct TraceLayout {
  std::vector<int> bus_ids;         // every bus
  std::vector<int> state_bus_ids;   // non-reference buses, state order
  std::vector<int> branch_ids;
  int num_generators = 0;
  int num_measurements = 0;
  double attack_start = -1.0;       // negative when there is no attack
};

TraceLayout MakeTraceLayout(const GridCase& grid_case,
                            const ScenarioConfig& config);

struct ScenarioOutput {
  TraceLayout layout;
  std::vector<TraceRecord> records;
  std::vector<DispatchResult> dispatches;  // one per successful OPF
  std::vector<std::string> events;         // skipped cycles, held set points
  NetStats net_stats;
  std::optional<AttackSpec> attack;
  std::vector<NetTraceEvent> packet_trace;
  int alarms = 0;
  int se_cycles = 0;
};

// Energy management side of the loop. It sees only the measurement pool
// and its own last commands.
class ControlCenter {
 public:
  ControlCenter(const GridCase& grid_case, double significance);

  struct Cycle {
    std::optional<EstimationResult> estimate;
    std::vector<double> load_estimates;
    std::optional<DispatchResult> dispatch;
    std::string note;  // why the cycle stopped early, if it did
  };

  Cycle Run(const MeasurementVector& pool,
            const std::vector<double>& commanded) const;

 private:
  const GridCase& case_;
  Eigen::MatrixXd h_;
  std::vector<double> sigmas_;
  double significance_;
};

// Runs the closed loop with already loaded inputs.
ScenarioOutput RunScenario(const ScenarioConfig& config,
                           const GridCase& grid_case, const CommGraph& graph,
                           bool record_packets = false);

// Loads the files named by the config first.
ScenarioOutput RunScenario(const ScenarioConfig& config,
                           bool record_packets = false);

// Attack the config describes, resolved against the case and routing.
AttackSpec ResolveAttack(const AttackConfig& attack, const GridCase& grid_case,
                         const CommGraph& graph, const RoutingMatrix& routing);

// CSV with one row per record. Normalized flows divide by the flows of the
// last record before the attack start (the last record when no attack).
void ExportTrace(const TraceLayout& layout,
                 const std::vector<TraceRecord>& records,
                 const std::filesystem::path& path);
std::string TraceToCsv(const TraceLayout& layout,
                       const std::vector<TraceRecord>& records);

struct ParsedTrace {
  std::vector<std::string> header;
  std::vector<TraceRecord> records;
  // Normalized flow columns, per record and branch.
  std::vector<std::vector<double>> normalized_flows;
};

ParsedTrace ReadTrace(const std::filesystem::path& path);
ParsedTrace ParseTrace(std::string_view csv);

// Index of the record that serves as the normalization reference.
int ReferenceRecord(const TraceLayout& layout,
                    const std::vector<TraceRecord>& records);

}  // namespace gridcosim

#endif  // GRIDCOSIM_ENGINE_H_
