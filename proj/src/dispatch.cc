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

#include "gridcosim/dispatch.h"

#include <cmath>
#include <numeric>
#include <string>

#include "gridcosim/errors.h"
#include "gridcosim/linprog.h"

namespace gridcosim {

DispatchResult SolveDcOpf(const GridCase& grid_case,
                          std::span<const double> load_estimates) {
  const int nb = grid_case.num_buses();
  const int ng = grid_case.num_generators();
  if (static_cast<int>(load_estimates.size()) != nb) {
    throw ContractError("load vector length does not match bus count");
  }
  if (ng == 0) throw DispatchError("case has no generators");

  Eigen::VectorXd loads(nb);
  for (int i = 0; i < nb; ++i) loads[i] = load_estimates[i];
  const double total = loads.sum();
  double capacity_min = 0.0;
  double capacity_max = 0.0;
  for (const Generator& g : grid_case.generators()) {
    capacity_min += g.p_min;
    capacity_max += g.p_max;
  }
  if (total > capacity_max + 1e-9 || total < capacity_min - 1e-9) {
    throw DispatchError("total load " + std::to_string(total) +
                        " outside generation range [" +
                        std::to_string(capacity_min) + ", " +
                        std::to_string(capacity_max) + "]");
  }

  const std::vector<int> gen_bus = grid_case.generator_bus_indices();
  const Eigen::MatrixXd ptdf = BuildPtdf(grid_case);
  const Eigen::VectorXd load_flows = ptdf * loads;

  LinearProgram lp;
  std::vector<LinearTerm> balance;
  for (int g = 0; g < ng; ++g) {
    const Generator& gen = grid_case.generators()[g];
    int var = lp.AddVariable(gen.p_min, gen.p_max, gen.cost);
    balance.push_back({var, 1.0});
  }
  lp.AddRow(balance, RowSense::kEqual, total);
  for (int k = 0; k < grid_case.num_branches(); ++k) {
    double limit = grid_case.branches()[k].limit;
    if (!std::isfinite(limit)) continue;
    std::vector<LinearTerm> terms;
    for (int g = 0; g < ng; ++g) {
      double coef = ptdf(k, gen_bus[g]);
      if (coef != 0.0) terms.push_back({g, coef});
    }
    // flow_k = sum_g ptdf(k, bus_g) p_g - ptdf(k, :) loads
    lp.AddRow(terms, RowSense::kLessEqual, limit + load_flows[k]);
    lp.AddRow(terms, RowSense::kGreaterEqual, -limit + load_flows[k]);
  }

  LpSolution solution = SolveLp(lp);
  if (solution.status != LpStatus::kOptimal) {
    throw DispatchError("optimal power flow is infeasible");
  }

  DispatchResult result;
  result.setpoints = solution.values;
  result.objective = solution.objective;
  Eigen::VectorXd injections = -loads;
  for (int g = 0; g < ng; ++g) injections[gen_bus[g]] += result.setpoints[g];
  result.flows = ptdf * injections;

  for (int g = 0; g < ng; ++g) {
    const Generator& gen = grid_case.generators()[g];
    double p = result.setpoints[g];
    if (std::abs(p - gen.p_max) <= 1e-9) {
      result.binding_limits.push_back("gen:" + std::to_string(g) + ":max");
    } else if (std::abs(p - gen.p_min) <= 1e-9) {
      result.binding_limits.push_back("gen:" + std::to_string(g) + ":min");
    }
  }
  for (int k = 0; k < grid_case.num_branches(); ++k) {
    const Branch& br = grid_case.branches()[k];
    if (std::isfinite(br.limit) &&
        std::abs(result.flows[k]) >= br.limit - 1e-9) {
      result.binding_limits.push_back("branch:" + std::to_string(br.id));
    }
  }
  return result;
}

std::vector<double> ExtractLoadEstimates(const GridCase& grid_case,
                                         const EstimationResult& estimate,
                                         std::span<const double> setpoints) {
  if (static_cast<int>(setpoints.size()) != grid_case.num_generators()) {
    throw ContractError("set point vector length does not match generators");
  }
  if (estimate.estimate.angles.size() != grid_case.num_states()) {
    throw ContractError("estimate length does not match case");
  }
  Eigen::VectorXd injections =
      BuildInjectionMatrix(grid_case) * estimate.estimate.angles;
  std::vector<double> loads(grid_case.num_buses());
  for (int i = 0; i < grid_case.num_buses(); ++i) loads[i] = -injections[i];
  const std::vector<int> gen_bus = grid_case.generator_bus_indices();
  for (int g = 0; g < grid_case.num_generators(); ++g) {
    loads[gen_bus[g]] += setpoints[g];
  }
  return loads;
}

}  // namespace gridcosim
