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

#include "gridcosim/grid.h"

#include <cmath>
#include <queue>
#include <random>
#include <string>
#include <utility>

#include "gridcosim/errors.h"

namespace gridcosim {
namespace {

constexpr double kRankTolerance = 1e-8;

std::string Str(int v) { return std::to_string(v); }

}  // namespace

std::string_view MeasurementKindName(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::kInjection:
      return "injection";
    case MeasurementKind::kFlowFrom:
      return "flow_from";
    case MeasurementKind::kFlowTo:
      return "flow_to";
  }
  return "unknown";
}

MeasurementKind ParseMeasurementKind(std::string_view name) {
  if (name == "injection" || name == "bus-injection") {
    return MeasurementKind::kInjection;
  }
  if (name == "flow_from" || name == "branch-flow-from") {
    return MeasurementKind::kFlowFrom;
  }
  if (name == "flow_to" || name == "branch-flow-to") {
    return MeasurementKind::kFlowTo;
  }
  throw ModelError("unknown measurement kind '" + std::string(name) + "'");
}

int MeasurementVector::num_available() const {
  int count = 0;
  for (bool a : available) count += a ? 1 : 0;
  return count;
}

std::vector<MeasurementDef> FullMeasurementPlan(std::span<const Bus> buses,
                                                std::span<const Branch> branches,
                                                double sigma) {
  std::vector<MeasurementDef> plan;
  plan.reserve(buses.size() + 2 * branches.size());
  for (const Bus& bus : buses) {
    plan.push_back({MeasurementKind::kInjection, bus.id, sigma});
  }
  for (const Branch& branch : branches) {
    plan.push_back({MeasurementKind::kFlowFrom, branch.id, sigma});
    plan.push_back({MeasurementKind::kFlowTo, branch.id, sigma});
  }
  return plan;
}

GridCase::GridCase(std::vector<Bus> buses, std::vector<Branch> branches,
                   std::vector<Generator> generators, int reference_bus,
                   std::vector<MeasurementDef> measurements, double base_mva)
    : buses_(std::move(buses)),
      branches_(std::move(branches)),
      generators_(std::move(generators)),
      measurements_(std::move(measurements)),
      reference_bus_(reference_bus),
      base_mva_(base_mva) {
  if (buses_.size() < 2) throw ModelError("case needs at least two buses");
  if (!(base_mva_ > 0.0)) throw ModelError("base_mva must be positive");
  for (int i = 0; i < num_buses(); ++i) {
    if (!bus_lookup_.emplace(buses_[i].id, i).second) {
      throw ModelError("duplicate bus id " + Str(buses_[i].id));
    }
    if (!std::isfinite(buses_[i].load)) {
      throw ModelError("bus " + Str(buses_[i].id) + ": load is not finite");
    }
  }
  auto ref = bus_lookup_.find(reference_bus_);
  if (ref == bus_lookup_.end()) {
    throw ModelError("reference bus " + Str(reference_bus_) + " does not exist");
  }
  reference_index_ = ref->second;

  for (int k = 0; k < num_branches(); ++k) {
    const Branch& br = branches_[k];
    if (!branch_lookup_.emplace(br.id, k).second) {
      throw ModelError("duplicate branch id " + Str(br.id));
    }
    if (!bus_lookup_.contains(br.from_bus) || !bus_lookup_.contains(br.to_bus)) {
      throw ModelError("branch " + Str(br.id) + " references an unknown bus");
    }
    if (br.from_bus == br.to_bus) {
      throw ModelError("branch " + Str(br.id) + " is a self loop");
    }
    if (!(br.reactance > 0.0) || !std::isfinite(br.reactance)) {
      throw ModelError("branch " + Str(br.id) + ": reactance must be > 0");
    }
    if (!(br.limit > 0.0)) {
      throw ModelError("branch " + Str(br.id) + ": flow limit must be > 0");
    }
  }

  // Connectivity by breadth-first search from the reference bus.
  std::vector<std::vector<int>> adjacency(buses_.size());
  for (const Branch& br : branches_) {
    int f = bus_lookup_.at(br.from_bus);
    int t = bus_lookup_.at(br.to_bus);
    adjacency[f].push_back(t);
    adjacency[t].push_back(f);
  }
  std::vector<bool> seen(buses_.size(), false);
  std::queue<int> frontier;
  frontier.push(reference_index_);
  seen[reference_index_] = true;
  int reached = 1;
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int v : adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  if (reached != num_buses()) {
    throw ModelError("branch graph is disconnected (" + Str(reached) + " of " +
                     Str(num_buses()) + " buses reachable from reference)");
  }

  for (int g = 0; g < num_generators(); ++g) {
    const Generator& gen = generators_[g];
    if (!bus_lookup_.contains(gen.bus)) {
      throw ModelError("generator " + Str(g) + " sits on unknown bus " +
                       Str(gen.bus));
    }
    if (!(gen.p_min <= gen.p_max)) {
      throw ModelError("generator " + Str(g) + ": p_min exceeds p_max");
    }
  }

  for (int i = 0; i < num_measurements(); ++i) {
    const MeasurementDef& def = measurements_[i];
    if (!(def.sigma > 0.0)) {
      throw ModelError("measurement " + Str(i) + ": sigma must be > 0");
    }
    bool ok = def.kind == MeasurementKind::kInjection
                  ? bus_lookup_.contains(def.target)
                  : branch_lookup_.contains(def.target);
    if (!ok) {
      throw ModelError("measurement " + Str(i) + ": unknown target " +
                       Str(def.target));
    }
  }

  state_column_.assign(buses_.size(), -1);
  int col = 0;
  for (int i = 0; i < num_buses(); ++i) {
    if (i != reference_index_) state_column_[i] = col++;
  }
}

int GridCase::bus_index(int bus_id) const {
  auto it = bus_lookup_.find(bus_id);
  if (it == bus_lookup_.end()) throw ModelError("unknown bus " + Str(bus_id));
  return it->second;
}

int GridCase::branch_index(int branch_id) const {
  auto it = branch_lookup_.find(branch_id);
  if (it == branch_lookup_.end()) {
    throw ModelError("unknown branch " + Str(branch_id));
  }
  return it->second;
}

int GridCase::measurement_site(int i) const {
  const MeasurementDef& def = measurements_.at(i);
  switch (def.kind) {
    case MeasurementKind::kInjection:
      return bus_index(def.target);
    case MeasurementKind::kFlowFrom:
      return bus_index(branches_[branch_index(def.target)].from_bus);
    case MeasurementKind::kFlowTo:
      return bus_index(branches_[branch_index(def.target)].to_bus);
  }
  return -1;
}

std::vector<double> GridCase::sigmas() const {
  std::vector<double> out;
  out.reserve(measurements_.size());
  for (const auto& def : measurements_) out.push_back(def.sigma);
  return out;
}

Eigen::VectorXd GridCase::loads() const {
  Eigen::VectorXd out(num_buses());
  for (int i = 0; i < num_buses(); ++i) out[i] = buses_[i].load;
  return out;
}

double GridCase::total_load() const { return loads().sum(); }

std::vector<int> GridCase::generator_bus_indices() const {
  std::vector<int> out;
  out.reserve(generators_.size());
  for (const auto& gen : generators_) out.push_back(bus_index(gen.bus));
  return out;
}

GridCase GridCase::WithMeasurements(
    std::vector<MeasurementDef> measurements) const {
  return GridCase(buses_, branches_, generators_, reference_bus_,
                  std::move(measurements), base_mva_);
}

Eigen::MatrixXd BuildFlowMatrix(const GridCase& grid_case) {
  Eigen::MatrixXd flows =
      Eigen::MatrixXd::Zero(grid_case.num_branches(), grid_case.num_states());
  for (int k = 0; k < grid_case.num_branches(); ++k) {
    const Branch& br = grid_case.branches()[k];
    double b = 1.0 / br.reactance;
    int cf = grid_case.state_column(grid_case.bus_index(br.from_bus));
    int ct = grid_case.state_column(grid_case.bus_index(br.to_bus));
    if (cf >= 0) flows(k, cf) += b;
    if (ct >= 0) flows(k, ct) -= b;
  }
  return flows;
}

Eigen::MatrixXd BuildInjectionMatrix(const GridCase& grid_case) {
  Eigen::MatrixXd flows = BuildFlowMatrix(grid_case);
  Eigen::MatrixXd inj =
      Eigen::MatrixXd::Zero(grid_case.num_buses(), grid_case.num_states());
  for (int k = 0; k < grid_case.num_branches(); ++k) {
    const Branch& br = grid_case.branches()[k];
    inj.row(grid_case.bus_index(br.from_bus)) += flows.row(k);
    inj.row(grid_case.bus_index(br.to_bus)) -= flows.row(k);
  }
  return inj;
}

Eigen::MatrixXd BuildHMatrix(const GridCase& grid_case) {
  Eigen::MatrixXd flows = BuildFlowMatrix(grid_case);
  Eigen::MatrixXd inj = BuildInjectionMatrix(grid_case);
  Eigen::MatrixXd h(grid_case.num_measurements(), grid_case.num_states());
  for (int i = 0; i < grid_case.num_measurements(); ++i) {
    const MeasurementDef& def = grid_case.measurements()[i];
    switch (def.kind) {
      case MeasurementKind::kInjection:
        h.row(i) = inj.row(grid_case.bus_index(def.target));
        break;
      case MeasurementKind::kFlowFrom:
        h.row(i) = flows.row(grid_case.branch_index(def.target));
        break;
      case MeasurementKind::kFlowTo:
        h.row(i) = -flows.row(grid_case.branch_index(def.target));
        break;
    }
  }
  return h;
}

namespace {

// Reduced susceptance matrix (injection rows restricted to non-reference
// buses) with a singularity check.
Eigen::FullPivLU<Eigen::MatrixXd> FactorReducedSusceptance(
    const GridCase& grid_case) {
  Eigen::MatrixXd inj = BuildInjectionMatrix(grid_case);
  Eigen::MatrixXd reduced(grid_case.num_states(), grid_case.num_states());
  for (int i = 0; i < grid_case.num_buses(); ++i) {
    int col = grid_case.state_column(i);
    if (col >= 0) reduced.row(col) = inj.row(i);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
  lu.setThreshold(kRankTolerance);
  if (!lu.isInvertible()) {
    throw ModelError("reduced susceptance matrix is singular");
  }
  return lu;
}

}  // namespace

Eigen::MatrixXd BuildPtdf(const GridCase& grid_case) {
  auto lu = FactorReducedSusceptance(grid_case);
  Eigen::MatrixXd inverse = lu.inverse();
  Eigen::MatrixXd flows = BuildFlowMatrix(grid_case);
  Eigen::MatrixXd reduced_ptdf = flows * inverse;
  Eigen::MatrixXd ptdf =
      Eigen::MatrixXd::Zero(grid_case.num_branches(), grid_case.num_buses());
  for (int i = 0; i < grid_case.num_buses(); ++i) {
    int col = grid_case.state_column(i);
    if (col >= 0) ptdf.col(i) = reduced_ptdf.col(col);
  }
  return ptdf;
}

PowerFlowSolution DcPowerFlow(const GridCase& grid_case,
                              const Eigen::VectorXd& injections) {
  if (injections.size() != grid_case.num_buses()) {
    throw ContractError("injection vector has wrong length");
  }
  double imbalance = injections.sum();
  if (std::abs(imbalance) > 1e-9) {
    throw ContractError("injections do not balance (sum = " +
                        std::to_string(imbalance) + ")");
  }
  auto lu = FactorReducedSusceptance(grid_case);
  Eigen::VectorXd rhs(grid_case.num_states());
  for (int i = 0; i < grid_case.num_buses(); ++i) {
    int col = grid_case.state_column(i);
    if (col >= 0) rhs[col] = injections[i];
  }
  PowerFlowSolution out;
  out.state.angles = lu.solve(rhs);
  out.flows = BuildFlowMatrix(grid_case) * out.state.angles;
  return out;
}

MeasurementVector GenerateMeasurements(const GridCase& grid_case,
                                       const StateVector& state,
                                       std::uint64_t seed, double timestamp) {
  std::vector<double> sigmas = grid_case.sigmas();
  return GenerateMeasurements(grid_case, state, sigmas, seed, timestamp);
}

MeasurementVector GenerateMeasurements(const GridCase& grid_case,
                                       const StateVector& state,
                                       std::span<const double> sigmas,
                                       std::uint64_t seed, double timestamp) {
  if (state.angles.size() != grid_case.num_states()) {
    throw ContractError("state vector length does not match case");
  }
  if (static_cast<int>(sigmas.size()) != grid_case.num_measurements()) {
    throw ContractError("sigma vector length does not match measurement plan");
  }
  MeasurementVector z;
  z.values = BuildHMatrix(grid_case) * state.angles;
  z.available.assign(z.values.size(), true);
  z.timestamp = timestamp;

  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < z.size(); ++i) {
    double draw = normal(engine);
    if (sigmas[i] > 0.0) z.values[i] += sigmas[i] * draw;
  }
  return z;
}

int SelectedRank(const Eigen::MatrixXd& h, const std::vector<bool>& available) {
  if (static_cast<Eigen::Index>(available.size()) != h.rows()) {
    throw ContractError("availability mask length does not match row count");
  }
  int count = 0;
  for (bool a : available) count += a ? 1 : 0;
  if (count == 0 || h.cols() == 0) return 0;
  Eigen::MatrixXd selected(count, h.cols());
  int r = 0;
  for (int i = 0; i < h.rows(); ++i) {
    if (available[i]) selected.row(r++) = h.row(i);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(selected);
  qr.setThreshold(kRankTolerance);
  return static_cast<int>(qr.rank());
}

bool CheckObservability(const Eigen::MatrixXd& h,
                        const std::vector<bool>& available) {
  return SelectedRank(h, available) == h.cols();
}

std::string MeasurementLabel(const GridCase& grid_case, int i) {
  const MeasurementDef& def = grid_case.measurements().at(i);
  if (def.kind == MeasurementKind::kInjection) {
    return "P" + Str(def.target);
  }
  const Branch& br = grid_case.branches()[grid_case.branch_index(def.target)];
  if (def.kind == MeasurementKind::kFlowFrom) {
    return "P" + Str(br.from_bus) + "-" + Str(br.to_bus);
  }
  return "P" + Str(br.to_bus) + "-" + Str(br.from_bus);
}

}  // namespace gridcosim
