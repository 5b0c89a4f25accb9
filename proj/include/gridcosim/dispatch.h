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

#ifndef GRIDCOSIM_DISPATCH_H_
#define GRIDCOSIM_DISPATCH_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridcosim/estimation.h"
#include "gridcosim/grid.h"

namespace gridcosim {

struct DispatchResult {
  std::vector<double> setpoints;  // per generator, per-unit
  double objective = 0.0;
  // "gen:<index>:min|max" and "branch:<id>" entries at their bounds.
  std::vector<std::string> binding_limits;
  // Branch flows implied by the set points and the given loads.
  Eigen::VectorXd flows;
};

// Linear-cost DC optimal power flow: minimize sum cost_g p_g subject to
// lossless balance, branch limits, and generator bounds. Throws
// DispatchError when the loads exceed capacity or the limits cannot be met.
DispatchResult SolveDcOpf(const GridCase& grid_case,
                          std::span<const double> load_estimates);

// Per-bus withdrawal implied by the estimated angles: generation at the bus
// (from `setpoints`, the last commanded values) minus the injection
// computed through the injection rows of the DC model.
std::vector<double> ExtractLoadEstimates(const GridCase& grid_case,
                                         const EstimationResult& estimate,
                                         std::span<const double> setpoints);

}  // namespace gridcosim

#endif  // GRIDCOSIM_DISPATCH_H_
