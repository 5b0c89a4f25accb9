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

#include "gridcosim/attack.h"

#include <cmath>
#include <random>
#include <sstream>

#include "gridcosim/errors.h"
#include "gridcosim/estimation.h"

namespace gridcosim {

bool AttackSpec::IsNull() const {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0) return false;
  }
  for (bool b : d) {
    if (b) return false;
  }
  return true;
}

Eigen::VectorXd BuildStealthFdi(const Eigen::MatrixXd& h,
                                const Eigen::VectorXd& c) {
  if (c.size() != h.cols()) throw ContractError("c has the wrong length");
  return h * c;
}

AttackSpec BuildCombined(const Eigen::MatrixXd& h, const Eigen::VectorXd& c,
                         const std::vector<bool>& d, int target) {
  const int m = static_cast<int>(h.rows());
  if (static_cast<int>(d.size()) != m) {
    throw ContractError("d has the wrong length");
  }
  std::vector<bool> kept(m);
  for (int i = 0; i < m; ++i) kept[i] = !d[i];
  if (!CheckObservability(h, kept)) {
    throw AttackError("availability attack leaves the system unobservable");
  }
  AttackSpec spec;
  spec.c = c;
  spec.a = BuildStealthFdi(h, c);
  spec.d = d;
  for (int i = 0; i < m; ++i) {
    if (d[i]) spec.a[i] = 0.0;
  }
  if (target >= 0) {
    if (target >= m) throw ContractError("target out of range");
    if (d[target] || spec.a[target] == 0.0) {
      throw AttackError("attack does not reach its target measurement");
    }
    spec.target = target;
    spec.mu = spec.a[target];
  }
  return spec;
}

AttackSpec MakeBiasAttack(int num_measurements, int num_states, int row,
                          double bias) {
  if (row < 0 || row >= num_measurements) {
    throw ContractError("bias row out of range");
  }
  AttackSpec spec;
  spec.c = Eigen::VectorXd::Zero(num_states);
  spec.a = Eigen::VectorXd::Zero(num_measurements);
  spec.a[row] = bias;
  spec.d.assign(num_measurements, false);
  spec.target = row;
  spec.mu = bias;
  return spec;
}

AttackSpec Restrict(const AttackSpec& spec, const std::set<int>& keep) {
  AttackSpec out = spec;
  for (int i = 0; i < out.num_measurements(); ++i) {
    if (keep.count(i)) continue;
    out.a[i] = 0.0;
    out.d[i] = false;
  }
  if (out.target >= 0 && !keep.count(out.target)) {
    out.target = -1;
    out.mu = 0.0;
  }
  return out;
}

MeasurementVector ApplyAttack(const MeasurementVector& z,
                              const AttackSpec& spec) {
  if (spec.num_measurements() != z.size() ||
      static_cast<int>(spec.d.size()) != z.size()) {
    throw ContractError("attack and measurement sizes differ");
  }
  MeasurementVector out = z;
  for (int i = 0; i < z.size(); ++i) {
    if (spec.d[i]) {
      out.values[i] = 0.0;
      out.available[i] = false;
    } else {
      out.values[i] = z.values[i] + spec.a[i];
    }
  }
  return out;
}

std::optional<std::string> CheckAttackInvariants(const Eigen::MatrixXd& h,
                                                 const AttackSpec& spec,
                                                 double tolerance) {
  const int m = static_cast<int>(h.rows());
  std::ostringstream why;
  if (spec.num_measurements() != m || static_cast<int>(spec.d.size()) != m ||
      spec.c.size() != h.cols()) {
    return "dimension mismatch";
  }
  Eigen::VectorXd hc = h * spec.c;
  double scale = 1.0 + spec.a.cwiseAbs().maxCoeff();
  for (int i = 0; i < m; ++i) {
    double expected = spec.d[i] ? 0.0 : hc[i];
    if (std::abs(spec.a[i] - expected) > tolerance * scale) {
      why << "a(" << i << ") differs from ((I - diag(d)) H c)(" << i << ")";
      return why.str();
    }
    if (spec.d[i] && spec.a[i] != 0.0) {
      why << "a and d overlap at " << i;
      return why.str();
    }
  }
  if (spec.target >= 0) {
    if (spec.mu == 0.0) return "mu must be nonzero";
    if (std::abs(spec.a[spec.target] - spec.mu) > tolerance * scale) {
      return "a(target) differs from mu";
    }
  }
  std::vector<bool> kept(m);
  for (int i = 0; i < m; ++i) kept[i] = !spec.d[i];
  if (!CheckObservability(h, kept)) return "d leaves H unobservable";
  return std::nullopt;
}

StealthReport MeasureStealth(const Eigen::MatrixXd& h,
                             std::span<const double> sigmas,
                             const Eigen::VectorXd& x_true,
                             const AttackSpec& spec, double significance,
                             int trials, std::uint64_t seed,
                             double rate_tolerance) {
  if (trials < 1) throw ContractError("trials must be at least 1");
  const int m = static_cast<int>(h.rows());
  if (static_cast<int>(sigmas.size()) != m) {
    throw ContractError("sigma length differs from H");
  }
  std::vector<bool> kept(m);
  for (int i = 0; i < m; ++i) kept[i] = !spec.d[i];
  if (!CheckObservability(h, kept)) {
    throw AttackError("attack leaves the system unobservable");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd clean = h * x_true;
  int attack_alarms = 0;
  int baseline_alarms = 0;
  MeasurementVector z;
  z.available.assign(m, true);
  for (int t = 0; t < trials; ++t) {
    z.values.resize(m);
    for (int i = 0; i < m; ++i) z.values[i] = clean[i] + sigmas[i] * normal(rng);
    baseline_alarms += WlsEstimate(h, z, sigmas, significance).bdd_alarm;
    attack_alarms +=
        WlsEstimate(h, ApplyAttack(z, spec), sigmas, significance).bdd_alarm;
  }
  StealthReport report;
  report.attack_alarm_rate = static_cast<double>(attack_alarms) / trials;
  report.baseline_alarm_rate = static_cast<double>(baseline_alarms) / trials;
  report.stealthy = std::abs(report.attack_alarm_rate -
                             report.baseline_alarm_rate) <= rate_tolerance;
  return report;
}

bool IsStealthy(const Eigen::MatrixXd& h, std::span<const double> sigmas,
                const Eigen::VectorXd& x_true, const AttackSpec& spec,
                double significance, int trials, std::uint64_t seed) {
  return MeasureStealth(h, sigmas, x_true, spec, significance, trials, seed)
      .stealthy;
}

}  // namespace gridcosim
