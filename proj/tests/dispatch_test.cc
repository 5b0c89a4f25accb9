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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gridcosim/errors.h"
#include "gridcosim/linprog.h"
#include "test_util.h"

namespace gridcosim {
namespace {

using testing::DataFile;
using testing::RandomCase;
using testing::Ring3;

std::vector<double> LoadsOf(const GridCase& c) {
  std::vector<double> out;
  for (const Bus& b : c.buses()) out.push_back(b.load);
  return out;
}

// Branch flows from a Laplacian solve with the reference angle pinned at 0.
Eigen::VectorXd OracleFlows(const GridCase& c, const Eigen::VectorXd& inj) {
  const int nb = c.num_buses();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nb, nb);
  for (const Branch& br : c.branches()) {
    int f = c.bus_index(br.from_bus);
    int t = c.bus_index(br.to_bus);
    double y = 1.0 / br.reactance;
    lap(f, f) += y;
    lap(t, t) += y;
    lap(f, t) -= y;
    lap(t, f) -= y;
  }
  int r = c.reference_index();
  lap.row(r).setZero();
  lap(r, r) = 1.0;
  Eigen::VectorXd rhs = inj;
  rhs[r] = 0.0;
  Eigen::VectorXd theta = lap.fullPivLu().solve(rhs);
  Eigen::VectorXd flows(c.num_branches());
  for (int k = 0; k < c.num_branches(); ++k) {
    const Branch& br = c.branches()[k];
    flows[k] = (theta[c.bus_index(br.from_bus)] - theta[c.bus_index(br.to_bus)]) /
               br.reactance;
  }
  return flows;
}

Eigen::VectorXd Injections(const GridCase& c, const std::vector<double>& loads,
                           const std::vector<double>& p) {
  Eigen::VectorXd inj(c.num_buses());
  for (int i = 0; i < c.num_buses(); ++i) inj[i] = -loads[i];
  std::vector<int> gb = c.generator_bus_indices();
  for (size_t g = 0; g < p.size(); ++g) inj[gb[g]] += p[g];
  return inj;
}

bool WithinLimits(const GridCase& c, const Eigen::VectorXd& flows, double tol) {
  for (int k = 0; k < c.num_branches(); ++k) {
    if (std::abs(flows[k]) > c.branches()[k].limit + tol) return false;
  }
  return true;
}

TEST(Dispatch, MeritOrderWithoutCongestion) {
  GridCase c = Ring3();
  DispatchResult r = SolveDcOpf(c, LoadsOf(c));
  EXPECT_NEAR(r.setpoints[0], 1.5, 1e-9);
  EXPECT_NEAR(r.setpoints[1], 0.0, 1e-9);
  EXPECT_NEAR(r.objective, 15.0, 1e-9);
}

TEST(Dispatch, ZeroLoadGivesZeroOutput) {
  GridCase c = Ring3();
  std::vector<double> zero(3, 0.0);
  DispatchResult r = SolveDcOpf(c, zero);
  EXPECT_NEAR(r.setpoints[0], 0.0, 1e-12);
  EXPECT_NEAR(r.setpoints[1], 0.0, 1e-12);
  EXPECT_NEAR(r.flows.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Dispatch, LineLimitMatchesGridSearch) {
  GridCase c = LoadGridCase(DataFile("tri3_case.json"));
  std::vector<double> loads = LoadsOf(c);
  DispatchResult r = SolveDcOpf(c, loads);

  double best_cost = kInfinity;
  double best_p1 = -1;
  for (int step = 0; step <= 2000; ++step) {
    double p1 = step * 1e-3;
    double p2 = 1.5 - p1;
    if (p2 < 0 || p2 > 2) continue;
    Eigen::VectorXd flows = OracleFlows(c, Injections(c, loads, {p1, p2}));
    if (!WithinLimits(c, flows, 1e-12)) continue;
    double cost = 10 * p1 + 30 * p2;
    if (cost < best_cost) {
      best_cost = cost;
      best_p1 = p1;
    }
  }
  ASSERT_GE(best_p1, 0.0);
  // The LP optimum lies between the last feasible grid point and the next.
  EXPECT_LE(r.objective, best_cost + 1e-9);
  EXPECT_NEAR(r.setpoints[0], best_p1, 1e-3 + 1e-9);
  EXPECT_LT(r.setpoints[0], 1.5 - 1e-3);
  EXPECT_NEAR(r.setpoints[0], 1.2, 1e-9);
  EXPECT_NE(std::find(r.binding_limits.begin(), r.binding_limits.end(),
                      "branch:2"),
            r.binding_limits.end());
  EXPECT_NEAR(std::abs(r.flows[1]), 0.7, 1e-9);
}

TEST(Dispatch, FlowsMatchOracle) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  std::vector<double> loads = LoadsOf(c);
  DispatchResult r = SolveDcOpf(c, loads);
  Eigen::VectorXd oracle = OracleFlows(c, Injections(c, loads, r.setpoints));
  EXPECT_LT((oracle - r.flows).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE(WithinLimits(c, r.flows, 1e-9));
}

TEST(Dispatch, PowerBalanceOnRandomCases) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    GridCase c = RandomCase(rng, 6 + trial % 6);
    std::vector<double> loads = LoadsOf(c);
    DispatchResult r = SolveDcOpf(c, loads);
    double gen = 0.0;
    for (double p : r.setpoints) gen += p;
    double load = 0.0;
    for (double l : loads) load += l;
    EXPECT_NEAR(gen, load, 1e-9);
    for (int g = 0; g < c.num_generators(); ++g) {
      EXPECT_GE(r.setpoints[g], c.generators()[g].p_min - 1e-9);
      EXPECT_LE(r.setpoints[g], c.generators()[g].p_max + 1e-9);
    }
  }
}

// No feasible shift of eps between any pair of generators lowers the cost.
TEST(Dispatch, PairwiseExchangeCertificate) {
  const double eps = 1e-4;
  for (const char* name : {"tri3_case.json", "ieee14_case.json"}) {
    GridCase c = LoadGridCase(DataFile(name));
    std::vector<double> loads = LoadsOf(c);
    DispatchResult r = SolveDcOpf(c, loads);
    for (int a = 0; a < c.num_generators(); ++a) {
      for (int b = 0; b < c.num_generators(); ++b) {
        if (a == b) continue;
        std::vector<double> p = r.setpoints;
        p[a] += eps;
        p[b] -= eps;
        if (p[a] > c.generators()[a].p_max || p[b] < c.generators()[b].p_min) {
          continue;
        }
        Eigen::VectorXd flows = OracleFlows(c, Injections(c, loads, p));
        if (!WithinLimits(c, flows, 1e-12)) continue;
        double delta = eps * (c.generators()[a].cost - c.generators()[b].cost);
        EXPECT_GE(delta, -1e-12) << name << " " << a << "->" << b;
      }
    }
  }
}

TEST(Dispatch, SwappingCostsSwapsTheMeritOrder) {
  GridCase c = Ring3();
  std::vector<Generator> gens = c.generators();
  std::swap(gens[0].cost, gens[1].cost);
  GridCase swapped(c.buses(), c.branches(), gens, c.reference_bus(),
                   c.measurements());
  DispatchResult r = SolveDcOpf(swapped, LoadsOf(swapped));
  EXPECT_NEAR(r.setpoints[0], 0.0, 1e-9);
  EXPECT_NEAR(r.setpoints[1], 1.5, 1e-9);
}

TEST(Dispatch, RaisingLoadNeverLowersCost) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  std::vector<double> loads = LoadsOf(c);
  double previous = SolveDcOpf(c, loads).objective;
  for (int step = 0; step < 5; ++step) {
    loads[8] += 0.05;
    double cost = SolveDcOpf(c, loads).objective;
    EXPECT_GE(cost, previous - 1e-9);
    previous = cost;
  }
}

TEST(Dispatch, RejectsLoadOutsideCapacity) {
  GridCase c = Ring3();
  std::vector<double> loads{0.0, 3.0, 2.0};
  EXPECT_THROW(SolveDcOpf(c, loads), DispatchError);
  std::vector<double> wrong(2, 0.0);
  EXPECT_THROW(SolveDcOpf(c, wrong), ContractError);
}

TEST(Dispatch, InfeasibleLimitsRaise) {
  GridCase c = Ring3();
  std::vector<Branch> branches = c.branches();
  for (Branch& br : branches) br.limit = 0.1;
  GridCase tight(c.buses(), branches, c.generators(), c.reference_bus(),
                 c.measurements());
  EXPECT_THROW(SolveDcOpf(tight, LoadsOf(tight)), DispatchError);
}

TEST(LoadEstimates, ExactStateRecoversLoads) {
  GridCase c = LoadGridCase(DataFile("ieee14_case.json"));
  std::vector<double> loads = LoadsOf(c);
  DispatchResult d = SolveDcOpf(c, loads);
  PowerFlowSolution pf = DcPowerFlow(c, Injections(c, loads, d.setpoints));
  EstimationResult est;
  est.estimate = pf.state;
  std::vector<double> back = ExtractLoadEstimates(c, est, d.setpoints);
  for (int i = 0; i < c.num_buses(); ++i) EXPECT_NEAR(back[i], loads[i], 1e-9);
}

TEST(LoadEstimates, ShiftedAnglesShiftLoads) {
  GridCase c = Ring3();
  EstimationResult est;
  est.estimate.angles = Eigen::VectorXd::Zero(2);
  std::vector<double> p{0.5, 0.25};
  std::vector<double> flat = ExtractLoadEstimates(c, est, p);
  EXPECT_NEAR(flat[0], 0.5, 1e-12);
  EXPECT_NEAR(flat[1], 0.25, 1e-12);
  EXPECT_NEAR(flat[2], 0.0, 1e-12);
  est.estimate.angles = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(ExtractLoadEstimates(c, est, p), ContractError);
}

}  // namespace
}  // namespace gridcosim
