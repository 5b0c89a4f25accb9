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

#ifndef GRIDCOSIM_SECMETRIC_H_
#define GRIDCOSIM_SECMETRIC_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gridcosim/attack.h"
#include "gridcosim/netgraph.h"

namespace gridcosim {

enum class MetricStatus { kOptimal, kInfeasible, kUnknownAboveBound, kNodeLimit };

std::string_view MetricStatusName(MetricStatus status);

struct MetricResult {
  MetricStatus status = MetricStatus::kInfeasible;
  bool feasible = false;
  int value = 0;
  Eigen::VectorXd c;
  Eigen::VectorXd a;
  std::vector<bool> d;
  std::vector<bool> x;  // beta only
  std::vector<bool> y;  // beta only
  // Largest violation of any formulation constraint by the returned point.
  double max_violation = 0.0;
  std::int64_t nodes = 0;
  double seconds = 0.0;
};

struct MetricOptions {
  std::int64_t max_nodes = 2'000'000;
  // 0 selects 1e3 * |mu| * (1 + max|H|).
  double big_m = 0.0;
  // Alpha: optional measurement -> RTU group map; the objective then counts
  // groups touched by a or d instead of measurements.
  std::vector<int> rtu_groups;
  // Beta: whether the MTU itself may be compromised.
  bool allow_mtu = false;
};

// min ||a||_0 + ||d||_0  s.t.  a = (I - diag(d)) H c,  a(j) = mu,
// d binary, rows without d observable.
MetricResult AlphaMetric(const Eigen::MatrixXd& h, int j, double mu,
                         const MetricOptions& options = {});

// min ||x||_0 + ||y||_0  s.t.  a = (I - diag(d)) H c,  a(j) = mu,
// a(i) != 0 only if every path of i crosses a compromised node, some
// compromised node lies on every path of j, d(i) <= r_v x + r_e y on every
// path of i, rows without d observable.
MetricResult BetaMetric(const Eigen::MatrixXd& h, const CommGraph& graph,
                        const RoutingMatrix& routing, int j, double mu,
                        const MetricOptions& options = {});

// Exhaustive cardinality-ordered search up to `max_card`. Feasibility of a
// fixed pattern is decided by rank tests. Returns kUnknownAboveBound when
// nothing is found but larger patterns exist.
MetricResult BruteForceMetric(const Eigen::MatrixXd& h, int j, double mu,
                              int max_card);
MetricResult BruteForceMetric(const Eigen::MatrixXd& h, const CommGraph& graph,
                              const RoutingMatrix& routing, int j, double mu,
                              int max_card, bool allow_mtu = false);

// Attack available to an adversary holding the nodes `x` and links `y`:
// rows not fully under its control stay untouched, and c is the minimum
// norm state shift with (H c)(j) = mu. Throws AttackError if none exists.
AttackSpec ResolveAttackAtVantage(const Eigen::MatrixXd& h,
                                  const RoutingMatrix& routing,
                                  const std::vector<bool>& x,
                                  const std::vector<bool>& y, int j, double mu);

// Measurements whose every path crosses a node in `x` (integrity) and
// measurements whose every path crosses a node in `x` or a link in `y`
// (availability).
std::vector<bool> IntegrityReach(const RoutingMatrix& routing,
                                 const std::vector<bool>& x);
std::vector<bool> AvailabilityReach(const RoutingMatrix& routing,
                                    const std::vector<bool>& x,
                                    const std::vector<bool>& y);

}  // namespace gridcosim

#endif  // GRIDCOSIM_SECMETRIC_H_
