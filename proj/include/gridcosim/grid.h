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

#ifndef GRIDCOSIM_GRID_H_
#define GRIDCOSIM_GRID_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace gridcosim {

// Static DC network model. All power quantities are per-unit on the case
// base (100 MVA for the bundled cases); angles are radians.

struct Bus {
  int id = 0;
  double load = 0.0;  // per-unit withdrawal
};

struct Branch {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;
  // Absolute flow limit in per-unit; +inf means unconstrained.
  double limit = std::numeric_limits<double>::infinity();
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double cost = 0.0;  // currency per per-unit of output
};

enum class MeasurementKind { kInjection, kFlowFrom, kFlowTo };

std::string_view MeasurementKindName(MeasurementKind kind);
MeasurementKind ParseMeasurementKind(std::string_view name);

// `target` is a bus id for injections and a branch id for flows.
struct MeasurementDef {
  MeasurementKind kind = MeasurementKind::kInjection;
  int target = 0;
  double sigma = 0.0;
};

// Bus angles for every bus except the reference, in bus order.
struct StateVector {
  Eigen::VectorXd angles;
};

struct MeasurementVector {
  Eigen::VectorXd values;
  std::vector<bool> available;
  double timestamp = 0.0;

  int size() const { return static_cast<int>(values.size()); }
  int num_available() const;
};

// One injection per bus followed by the from-side and to-side flow of every
// branch, all with the same standard deviation.
std::vector<MeasurementDef> FullMeasurementPlan(std::span<const Bus> buses,
                                                std::span<const Branch> branches,
                                                double sigma);

class GridCase {
 public:
  // Validates every structural invariant and throws ModelError on failure.
  GridCase(std::vector<Bus> buses, std::vector<Branch> branches,
           std::vector<Generator> generators, int reference_bus,
           std::vector<MeasurementDef> measurements, double base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<Generator>& generators() const { return generators_; }
  const std::vector<MeasurementDef>& measurements() const {
    return measurements_;
  }
  int reference_bus() const { return reference_bus_; }
  int reference_index() const { return reference_index_; }
  double base_mva() const { return base_mva_; }

  int num_buses() const { return static_cast<int>(buses_.size()); }
  int num_branches() const { return static_cast<int>(branches_.size()); }
  int num_generators() const { return static_cast<int>(generators_.size()); }
  int num_states() const { return num_buses() - 1; }
  int num_measurements() const { return static_cast<int>(measurements_.size()); }

  // Throws ModelError for unknown ids.
  int bus_index(int bus_id) const;
  int branch_index(int branch_id) const;

  // Column of `bus_idx` in H, or -1 for the reference bus.
  int state_column(int bus_idx) const { return state_column_[bus_idx]; }

  // Index of the bus whose substation takes measurement `i`: the injection
  // bus, or the near end of a branch flow.
  int measurement_site(int i) const;

  std::vector<double> sigmas() const;
  Eigen::VectorXd loads() const;
  double total_load() const;

  // Bus index of every generator.
  std::vector<int> generator_bus_indices() const;

  // Returns a copy with the measurement plan replaced.
  GridCase WithMeasurements(std::vector<MeasurementDef> measurements) const;

 private:
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Generator> generators_;
  std::vector<MeasurementDef> measurements_;
  int reference_bus_;
  int reference_index_ = -1;
  double base_mva_;
  std::unordered_map<int, int> bus_lookup_;
  std::unordered_map<int, int> branch_lookup_;
  std::vector<int> state_column_;
};

// m x n measurement model of the DC power flow.
Eigen::MatrixXd BuildHMatrix(const GridCase& grid_case);

// Injection rows for every bus (num_buses x n), independent of the
// measurement plan.
Eigen::MatrixXd BuildInjectionMatrix(const GridCase& grid_case);

// Branch flow rows (num_branches x n), from-bus to to-bus direction.
Eigen::MatrixXd BuildFlowMatrix(const GridCase& grid_case);

// Power transfer distribution factors (num_branches x num_buses) for
// injections balanced at the reference bus.
Eigen::MatrixXd BuildPtdf(const GridCase& grid_case);

struct PowerFlowSolution {
  StateVector state;
  Eigen::VectorXd flows;  // per branch, from -> to
};

// `injections` are per-bus net injections (generation minus load).
PowerFlowSolution DcPowerFlow(const GridCase& grid_case,
                              const Eigen::VectorXd& injections);

// z = Hx + e with e_i ~ N(0, sigma_i^2) from the case measurement plan.
MeasurementVector GenerateMeasurements(const GridCase& grid_case,
                                       const StateVector& state,
                                       std::uint64_t seed,
                                       double timestamp = 0.0);

// Same as above with explicit noise levels; zeros yield exactly Hx.
MeasurementVector GenerateMeasurements(const GridCase& grid_case,
                                       const StateVector& state,
                                       std::span<const double> sigmas,
                                       std::uint64_t seed,
                                       double timestamp = 0.0);

// Rank of the rows of `h` selected by `available` (relative tolerance 1e-8).
int SelectedRank(const Eigen::MatrixXd& h, const std::vector<bool>& available);

bool CheckObservability(const Eigen::MatrixXd& h,
                        const std::vector<bool>& available);

// JSON case files.
GridCase LoadGridCase(const std::filesystem::path& path);
GridCase ParseGridCase(std::string_view json_text,
                       const std::string& source_name = "<memory>");
std::string GridCaseToJson(const GridCase& grid_case);

// Writes H as CSV with one labelled row per measurement.
void WriteHMatrixCsv(const GridCase& grid_case,
                     const std::filesystem::path& path);

std::string MeasurementLabel(const GridCase& grid_case, int i);

}  // namespace gridcosim

#endif  // GRIDCOSIM_GRID_H_
