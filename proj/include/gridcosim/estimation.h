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

#ifndef GRIDCOSIM_ESTIMATION_H_
#define GRIDCOSIM_ESTIMATION_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridcosim/grid.h"

namespace gridcosim {

inline constexpr double kDefaultSignificance = 0.05;

struct EstimationResult {
  StateVector estimate;
  // z - H * estimate on rows used by the fit; zero elsewhere.
  Eigen::VectorXd residual;
  std::vector<bool> used;
  // Weighted residual sum of squares over used rows.
  double objective = 0.0;
  int num_used = 0;
  int num_states = 0;

  // Largest |r_i| / sqrt(Omega_ii), diagnostics only. -1 when unavailable.
  double largest_normalized_residual = 0.0;
  int largest_normalized_index = -1;

  bool bdd_alarm = false;
  double bdd_statistic = 0.0;
  double bdd_threshold = 0.0;
};

// Weighted least squares over the available rows of z. Unavailable rows are
// removed from the problem. Throws EstimationError when the used rows do not
// have full column rank. BDD fields are filled at `significance`; with no
// redundancy the threshold is +inf.
EstimationResult WlsEstimate(const Eigen::MatrixXd& h,
                             const MeasurementVector& z,
                             std::span<const double> sigmas,
                             double significance = kDefaultSignificance);

// Chi-square test on the weighted residual objective with
// (num_used - num_states) degrees of freedom. Throws DetectionError without
// redundancy, ContractError for significance outside (0, 1).
bool BadDataDetect(const EstimationResult& result, double significance);

// Upper (1 - significance) quantile of chi-square with `dof` degrees.
double ChiSquareThreshold(int dof, double significance);

}  // namespace gridcosim

#endif  // GRIDCOSIM_ESTIMATION_H_
