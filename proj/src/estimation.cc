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

#include "gridcosim/estimation.h"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "gridcosim/errors.h"

namespace gridcosim {

double ChiSquareThreshold(int dof, double significance) {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw ContractError("significance must lie in (0, 1)");
  }
  if (dof <= 0) throw DetectionError("chi-square test needs dof > 0");
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, significance));
}

EstimationResult WlsEstimate(const Eigen::MatrixXd& h,
                             const MeasurementVector& z,
                             std::span<const double> sigmas,
                             double significance) {
  const int m = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  if (z.size() != m || static_cast<int>(z.available.size()) != m ||
      static_cast<int>(sigmas.size()) != m) {
    throw ContractError("measurement, availability and sigma sizes must match H");
  }

  std::vector<int> rows;
  for (int i = 0; i < m; ++i) {
    if (z.available[i]) {
      if (!(sigmas[i] > 0.0)) {
        throw ContractError("sigma of measurement " + std::to_string(i) +
                            " must be > 0");
      }
      rows.push_back(i);
    }
  }
  const int used = static_cast<int>(rows.size());

  // Whitened system: rows scaled by 1/sigma.
  Eigen::MatrixXd hw(used, n);
  Eigen::VectorXd zw(used);
  for (int r = 0; r < used; ++r) {
    int i = rows[r];
    hw.row(r) = h.row(i) / sigmas[i];
    zw[r] = z.values[i] / sigmas[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(hw);
  qr.setThreshold(1e-8);
  int rank = used == 0 ? 0 : static_cast<int>(qr.rank());
  if (rank < n) {
    throw EstimationError("measurement set is unobservable (rank " +
                              std::to_string(rank) + " < " +
                              std::to_string(n) + ")",
                          rank, n);
  }

  EstimationResult result;
  result.estimate.angles = qr.solve(zw);
  result.num_used = used;
  result.num_states = n;
  result.used = z.available;
  result.residual = Eigen::VectorXd::Zero(m);

  Eigen::VectorXd fitted = h * result.estimate.angles;
  double objective = 0.0;
  for (int i : rows) {
    double r = z.values[i] - fitted[i];
    result.residual[i] = r;
    objective += (r / sigmas[i]) * (r / sigmas[i]);
  }
  result.objective = objective;

  // Leverage from the thin Q factor: diag(Q Q^T).
  if (used > n) {
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(used, n);
    for (int r = 0; r < used; ++r) {
      double omega = 1.0 - q.row(r).squaredNorm();
      if (omega <= 1e-10) continue;  // critical measurement
      int i = rows[r];
      double normalized = std::abs(result.residual[i] / sigmas[i]) /
                          std::sqrt(omega);
      if (normalized > result.largest_normalized_residual) {
        result.largest_normalized_residual = normalized;
        result.largest_normalized_index = i;
      }
    }
  }

  result.bdd_statistic = objective;
  if (used > n) {
    result.bdd_threshold = ChiSquareThreshold(used - n, significance);
  } else {
    result.bdd_threshold = std::numeric_limits<double>::infinity();
  }
  result.bdd_alarm = result.bdd_statistic > result.bdd_threshold;
  return result;
}

bool BadDataDetect(const EstimationResult& result, double significance) {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw ContractError("significance must lie in (0, 1)");
  }
  int dof = result.num_used - result.num_states;
  if (dof <= 0) {
    throw DetectionError("no measurement redundancy (" +
                         std::to_string(result.num_used) + " rows for " +
                         std::to_string(result.num_states) + " states)");
  }
  return result.objective > ChiSquareThreshold(dof, significance);
}

}  // namespace gridcosim
