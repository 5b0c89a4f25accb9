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
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "gridcosim/errors.h"
#include "test_util.h"

namespace gridcosim {
namespace {

using testing::OracleH;
using testing::RandomCase;
using testing::Ring3;

GridCase Ring3With(std::vector<MeasurementDef> plan) {
  return Ring3().WithMeasurements(std::move(plan));
}

TEST(HMatrix, RingFlowRow) {
  GridCase c = Ring3With({{MeasurementKind::kFlowFrom, 1, 0.01}});
  Eigen::MatrixXd h = BuildHMatrix(c);
  ASSERT_EQ(h.rows(), 1);
  EXPECT_DOUBLE_EQ(h(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.0);
}

TEST(HMatrix, RingInjectionRow) {
  GridCase c = Ring3With({{MeasurementKind::kInjection, 2, 0.01}});
  Eigen::MatrixXd h = BuildHMatrix(c);
  EXPECT_DOUBLE_EQ(h(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(h(0, 1), -1.0);
}

TEST(HMatrix, ReferenceInjectionIsMinusSumOfOthers) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    GridCase c = RandomCase(rng, 3 + trial % 10);
    Eigen::MatrixXd inj = BuildInjectionMatrix(c);
    Eigen::RowVectorXd others = Eigen::RowVectorXd::Zero(inj.cols());
    for (int b = 0; b < c.num_buses(); ++b) {
      if (b != c.reference_index()) others += inj.row(b);
    }
    EXPECT_LT((inj.row(c.reference_index()) + others).norm(), 1e-12);
  }
}

TEST(HMatrix, MatchesBranchEquationOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    GridCase c = RandomCase(rng, 3 + trial % 12);
    EXPECT_LT((BuildHMatrix(c) - OracleH(c)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HMatrix, FromAndToRowsAreExactNegatives) {
  std::mt19937_64 rng(13);
  GridCase c = RandomCase(rng, 9);
  Eigen::MatrixXd h = BuildHMatrix(c);
  int base = c.num_buses();
  for (int k = 0; k < c.num_branches(); ++k) {
    EXPECT_EQ(h.row(base + 2 * k), -h.row(base + 2 * k + 1));
  }
}

TEST(HMatrix, InjectionRowsBalanceForAnyState) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    GridCase c = RandomCase(rng, 3 + trial % 12);
    Eigen::VectorXd x(c.num_states());
    for (int k = 0; k < x.size(); ++k) x[k] = normal(rng);
    EXPECT_NEAR((BuildInjectionMatrix(c) * x).sum(), 0.0, 1e-9);
  }
}

TEST(GridCase, RejectsDisconnectedGraph) {
  std::vector<Bus> buses{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  std::vector<Branch> branches{{1, 1, 2, 0.1}, {2, 3, 4, 0.1}};
  EXPECT_THROW(GridCase(buses, branches, {}, 1, {}), ModelError);
}

TEST(GridCase, RejectsZeroReactance) {
  std::vector<Bus> buses{{1, 0}, {2, 0}};
  std::vector<Branch> branches{{1, 1, 2, 0.0}};
  EXPECT_THROW(GridCase(buses, branches, {}, 1, {}), ModelError);
}

TEST(GridCase, RejectsMissingReferenceAndBadTargets) {
  std::vector<Bus> buses{{1, 0}, {2, 0}};
  std::vector<Branch> branches{{1, 1, 2, 0.5}};
  EXPECT_THROW(GridCase(buses, branches, {}, 7, {}), ModelError);
  EXPECT_THROW(GridCase(buses, branches, {}, 1,
                        {{MeasurementKind::kFlowFrom, 9, 0.01}}),
               ModelError);
  EXPECT_THROW(GridCase(buses, branches, {}, 1,
                        {{MeasurementKind::kInjection, 1, 0.0}}),
               ModelError);
  EXPECT_THROW(GridCase(buses, branches, {{5, 0, 1, 1}}, 1, {}), ModelError);
}

TEST(PowerFlow, TwoBusHandSolve) {
  std::vector<Bus> buses{{1, 0}, {2, 0}};
  std::vector<Branch> branches{{1, 1, 2, 0.5}};
  GridCase c(buses, branches, {}, 1, {});
  Eigen::VectorXd inj(2);
  inj << -1.0, 1.0;
  PowerFlowSolution pf = DcPowerFlow(c, inj);
  EXPECT_NEAR(pf.state.angles[0], 0.5, 1e-12);
  EXPECT_NEAR(pf.flows[0], -1.0, 1e-12);
}

TEST(PowerFlow, ZeroInjectionsGiveZeroState) {
  PowerFlowSolution pf = DcPowerFlow(Ring3(), Eigen::VectorXd::Zero(3));
  EXPECT_EQ(pf.state.angles.norm(), 0.0);
  EXPECT_EQ(pf.flows.norm(), 0.0);
}

TEST(PowerFlow, SymmetricInjectionsGiveSymmetricFlows) {
  Eigen::VectorXd inj(3);
  inj << 1.0, -0.5, -0.5;
  PowerFlowSolution pf = DcPowerFlow(Ring3(), inj);
  EXPECT_NEAR(std::abs(pf.flows[0]), std::abs(pf.flows[1]), 1e-12);
  EXPECT_NEAR(pf.flows[0], 0.5, 1e-12);
}

TEST(PowerFlow, RejectsUnbalancedInjections) {
  Eigen::VectorXd inj(3);
  inj << 1.0, -0.5, -0.4;
  EXPECT_THROW(DcPowerFlow(Ring3(), inj), ContractError);
}

TEST(PowerFlow, FlowsAndNodalBalanceHold) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    GridCase c = RandomCase(rng, 4 + trial % 10);
    Eigen::VectorXd inj(c.num_buses());
    for (int b = 0; b < inj.size(); ++b) inj[b] = normal(rng);
    inj[0] -= inj.sum();
    PowerFlowSolution pf = DcPowerFlow(c, inj);
    std::vector<double> theta(c.num_buses(), 0.0);
    for (int b = 0; b < c.num_buses(); ++b) {
      if (c.state_column(b) >= 0) theta[b] = pf.state.angles[c.state_column(b)];
    }
    Eigen::VectorXd net = Eigen::VectorXd::Zero(c.num_buses());
    for (int k = 0; k < c.num_branches(); ++k) {
      const Branch& br = c.branches()[k];
      int f = c.bus_index(br.from_bus);
      int t = c.bus_index(br.to_bus);
      EXPECT_NEAR(pf.flows[k], (theta[f] - theta[t]) / br.reactance, 1e-9);
      net[f] += pf.flows[k];
      net[t] -= pf.flows[k];
    }
    EXPECT_LT((net - inj).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Measurements, ZeroSigmaIsExact) {
  std::mt19937_64 rng(16);
  GridCase c = RandomCase(rng, 8);
  Eigen::VectorXd inj = -c.loads();
  inj[0] += c.total_load();
  PowerFlowSolution pf = DcPowerFlow(c, inj);
  std::vector<double> zero(c.num_measurements(), 0.0);
  MeasurementVector z = GenerateMeasurements(c, pf.state, zero, 5);
  EXPECT_LT((z.values - BuildHMatrix(c) * pf.state.angles).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Measurements, SameSeedIsBitwiseIdentical) {
  GridCase c = Ring3();
  StateVector x{Eigen::Vector2d(0.1, -0.2)};
  MeasurementVector a = GenerateMeasurements(c, x, 99);
  MeasurementVector b = GenerateMeasurements(c, x, 99);
  MeasurementVector other = GenerateMeasurements(c, x, 100);
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.values[i], b.values[i]);
  }
  EXPECT_NE(a.values, other.values);
}

TEST(Measurements, SampleSpreadMatchesSigma) {
  GridCase c = Ring3(0.005);
  StateVector x{Eigen::Vector2d(0.1, -0.2)};
  const double truth = (BuildHMatrix(c) * x.angles)[0];
  double sum = 0.0;
  double sum_sq = 0.0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    double e = GenerateMeasurements(c, x, 1000 + s).values[0] - truth;
    sum += e;
    sum_sq += e * e;
  }
  double mean = sum / draws;
  double sd = std::sqrt((sum_sq - draws * mean * mean) / (draws - 1));
  EXPECT_GE(sd, 0.0045);
  EXPECT_LE(sd, 0.0055);
}

TEST(Observability, FullPlanOf14BusCase) {
  GridCase c = LoadGridCase(testing::DataFile("ieee14_case.json"));
  EXPECT_EQ(c.num_measurements(), 54);
  EXPECT_EQ(c.num_states(), 13);
  Eigen::MatrixXd h = BuildHMatrix(c);
  EXPECT_TRUE(CheckObservability(h, std::vector<bool>(54, true)));
  EXPECT_EQ(SelectedRank(h, std::vector<bool>(54, true)), 13);
}

TEST(Observability, EmptyMaskIsUnobservable) {
  Eigen::MatrixXd h = BuildHMatrix(Ring3());
  EXPECT_FALSE(CheckObservability(h, std::vector<bool>(9, false)));
}

TEST(Observability, CutAroundOneBus) {
  GridCase c = Ring3();
  Eigen::MatrixXd h = BuildHMatrix(c);
  // Drop every row that involves bus 3.
  std::vector<bool> mask(9, true);
  for (int i = 0; i < 9; ++i) {
    if (h(i, 1) != 0.0) mask[i] = false;
  }
  EXPECT_FALSE(CheckObservability(h, mask));
  EXPECT_EQ(SelectedRank(h, mask), 1);
}

TEST(CaseIo, RoundTripsThroughJson) {
  std::mt19937_64 rng(17);
  GridCase c = RandomCase(rng, 7);
  GridCase back = ParseGridCase(GridCaseToJson(c));
  EXPECT_EQ(BuildHMatrix(back), BuildHMatrix(c));
  EXPECT_EQ(back.sigmas(), c.sigmas());
  EXPECT_EQ(back.loads(), c.loads());
}

TEST(CaseIo, ErrorsNameTheJsonLocation) {
  const char* text = R"({"buses":[{"id":1},{"id":2}],
    "branches":[{"from":1,"to":2,"x":"big"}],
    "generators":[], "measurements":{"plan":"full","sigma":0.01}})";
  try {
    ParseGridCase(text, "case.json");
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("case.json: /branches/0/x"),
              std::string::npos)
        << e.what();
  }
}

TEST(CaseIo, DumpsLabelledHCsv) {
  auto path = std::filesystem::temp_directory_path() / "gridcosim_h.csv";
  WriteHMatrixCsv(Ring3(), path);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "measurement,label,theta2,theta3");
  EXPECT_EQ(first, "0,P1,-1,-1");
}

TEST(CaseIo, BundledCaseMatchesStandardData) {
  GridCase c = LoadGridCase(testing::DataFile("ieee14_case.json"));
  EXPECT_EQ(c.num_buses(), 14);
  EXPECT_EQ(c.num_branches(), 20);
  EXPECT_EQ(c.num_generators(), 2);
  EXPECT_EQ(c.generators()[0].bus, 1);
  EXPECT_EQ(c.generators()[1].bus, 2);
  EXPECT_NEAR(c.total_load(), 2.59, 1e-12);
  EXPECT_DOUBLE_EQ(c.base_mva(), 100.0);
  EXPECT_DOUBLE_EQ(c.sigmas()[0], 0.005);
}

}  // namespace
}  // namespace gridcosim
