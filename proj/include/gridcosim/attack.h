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

#ifndef GRIDCOSIM_ATTACK_H_
#define GRIDCOSIM_ATTACK_H_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridcosim/grid.h"

namespace gridcosim {

// Combined integrity/availability attack: z_a = (I - diag(d)) z + a with
// a = (I - diag(d)) H c.
struct AttackSpec {
  Eigen::VectorXd c;
  Eigen::VectorXd a;
  std::vector<bool> d;
  std::vector<bool> x;  // compromised comm nodes; may be empty
  std::vector<bool> y;  // compromised comm links; may be empty
  int target = -1;      // -1 when no single target is designated
  double mu = 0.0;
  double start_time = 0.0;

  int num_measurements() const { return static_cast<int>(a.size()); }
  bool IsNull() const;
};

// a = H c.
Eigen::VectorXd BuildStealthFdi(const Eigen::MatrixXd& h,
                                const Eigen::VectorXd& c);

// Throws AttackError if removing the rows in `d` leaves H unobservable, or
// if `target` is given and a(target) is zero.
AttackSpec BuildCombined(const Eigen::MatrixXd& h, const Eigen::VectorXd& c,
                         const std::vector<bool>& d, int target = -1);

// Plain additive bias on one row; not of the form Hc.
AttackSpec MakeBiasAttack(int num_measurements, int num_states, int row,
                          double bias);

// Same attack with a and d cleared outside `keep`. The result generally no
// longer satisfies a = (I - diag(d)) H c.
AttackSpec Restrict(const AttackSpec& spec, const std::set<int>& keep);

MeasurementVector ApplyAttack(const MeasurementVector& z,
                              const AttackSpec& spec);

// Describes the first violated structural invariant, if any.
std::optional<std::string> CheckAttackInvariants(const Eigen::MatrixXd& h,
                                                 const AttackSpec& spec,
                                                 double tolerance = 1e-9);

struct StealthReport {
  double attack_alarm_rate = 0.0;
  double baseline_alarm_rate = 0.0;
  bool stealthy = false;
};

// Monte Carlo comparison of BDD alarm rates with and without the attack
// using the same noise draws. Stealthy when the rates differ by at most
// `rate_tolerance`. Throws AttackError if the attack leaves H unobservable.
StealthReport MeasureStealth(const Eigen::MatrixXd& h,
                             std::span<const double> sigmas,
                             const Eigen::VectorXd& x_true,
                             const AttackSpec& spec, double significance,
                             int trials, std::uint64_t seed,
                             double rate_tolerance = 0.02);

bool IsStealthy(const Eigen::MatrixXd& h, std::span<const double> sigmas,
                const Eigen::VectorXd& x_true, const AttackSpec& spec,
                double significance, int trials, std::uint64_t seed);

}  // namespace gridcosim

#endif  // GRIDCOSIM_ATTACK_H_
