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

#include <random>

#include <gtest/gtest.h>

#include "gridcosim/errors.h"
#include "gridcosim/estimation.h"
#include "test_util.h"

namespace gridcosim {
namespace {

using testing::DataFile;
using testing::OracleH;
using testing::OracleWls;
using testing::RandomCase;

class AttackTest : public ::testing::Test {
 protected:
  void SetUp() override {
    c_ = std::make_unique<GridCase>(LoadGridCase(DataFile("ieee14_case.json")));
    h_ = BuildHMatrix(*c_);
    sigmas_ = c_->sigmas();
    x_true_ = Eigen::VectorXd::LinSpaced(h_.cols(), -0.05, -0.25);
  }
  MeasurementVector Noisy(std::uint64_t seed) const {
    return GenerateMeasurements(*c_, StateVector{x_true_}, seed);
  }
  std::unique_ptr<GridCase> c_;
  Eigen::MatrixXd h_;
  std::vector<double> sigmas_;
  Eigen::VectorXd x_true_;
};

TEST_F(AttackTest, StealthAttackShiftsEstimateByC) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd c(h_.cols());
    for (int k = 0; k < c.size(); ++k) c[k] = 0.05 * n01(rng);
    std::vector<bool> none(h_.rows(), false);
    AttackSpec spec = BuildCombined(h_, c, none);
    ASSERT_FALSE(CheckAttackInvariants(h_, spec).has_value());
    MeasurementVector z = Noisy(trial);
    EstimationResult clean = WlsEstimate(h_, z, sigmas_);
    EstimationResult bad = WlsEstimate(h_, ApplyAttack(z, spec), sigmas_);
    EXPECT_LT((bad.estimate.angles - clean.estimate.angles - c)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
    EXPECT_NEAR(bad.objective, clean.objective, 1e-7 * (1 + clean.objective));
    EXPECT_EQ(bad.bdd_alarm, clean.bdd_alarm);
  }
}

TEST_F(AttackTest, CombinedAttackMatchesOracleOnRemainingRows) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(h_.cols());
  c[2] = 0.04;  // bus 4
  std::vector<bool> d(h_.rows(), false);
  d[3] = true;   // P4
  d[20] = true;  // P2-4
  AttackSpec spec = BuildCombined(h_, c, d);
  EXPECT_EQ(spec.a[3], 0.0);
  EXPECT_EQ(spec.a[20], 0.0);
  ASSERT_FALSE(CheckAttackInvariants(h_, spec).has_value());

  MeasurementVector z = Noisy(3);
  MeasurementVector za = ApplyAttack(z, spec);
  EXPECT_FALSE(za.available[3]);
  EXPECT_EQ(za.values[3], 0.0);
  EstimationResult est = WlsEstimate(h_, za, sigmas_);
  std::vector<bool> use(h_.rows(), true);
  use[3] = use[20] = false;
  Eigen::VectorXd oracle_clean = OracleWls(h_, z.values, sigmas_, use);
  EXPECT_LT((est.estimate.angles - oracle_clean - c).cwiseAbs().maxCoeff(),
            1e-9);
}

TEST_F(AttackTest, RejectsUnobservableRemoval) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(h_.cols());
  std::vector<bool> all(h_.rows(), true);
  EXPECT_THROW(BuildCombined(h_, c, all), AttackError);
}

TEST_F(AttackTest, TargetMustBeReached) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(h_.cols());
  c[0] = 0.1;  // bus 2
  std::vector<bool> d(h_.rows(), false);
  AttackSpec spec = BuildCombined(h_, c, d, 14);  // P1-2
  EXPECT_EQ(spec.target, 14);
  EXPECT_DOUBLE_EQ(spec.mu, spec.a[14]);
  EXPECT_THROW(BuildCombined(h_, c, d, 42), AttackError);  // P7-9 untouched
  d[14] = true;
  EXPECT_THROW(BuildCombined(h_, c, d, 14), AttackError);
}

TEST_F(AttackTest, InvariantCheckFlagsBrokenSpecs) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(h_.cols());
  c[1] = 0.1;
  std::vector<bool> d(h_.rows(), false);
  AttackSpec spec = BuildCombined(h_, c, d);
  spec.a[0] += 0.01;
  EXPECT_TRUE(CheckAttackInvariants(h_, spec).has_value());
  AttackSpec bias = MakeBiasAttack(h_.rows(), h_.cols(), 20, 0.25);
  EXPECT_TRUE(CheckAttackInvariants(h_, bias).has_value());
}

TEST_F(AttackTest, StealthRatesEqualBaseline) {
  Eigen::VectorXd c = Eigen::VectorXd::Constant(h_.cols(), 0.0);
  c[3] = -0.1;
  std::vector<bool> d(h_.rows(), false);
  AttackSpec spec = BuildCombined(h_, c, d);
  StealthReport r = MeasureStealth(h_, sigmas_, x_true_, spec, 0.05, 400, 8);
  EXPECT_TRUE(r.stealthy);
  EXPECT_NEAR(r.attack_alarm_rate, r.baseline_alarm_rate, 1e-12);
  EXPECT_NEAR(r.baseline_alarm_rate, 0.05, 0.04);
}

TEST_F(AttackTest, GrossErrorIsNotStealthy) {
  AttackSpec bias = MakeBiasAttack(h_.rows(), h_.cols(), 20, 0.25);
  StealthReport r = MeasureStealth(h_, sigmas_, x_true_, bias, 0.05, 200, 8);
  EXPECT_FALSE(r.stealthy);
  EXPECT_GE(r.attack_alarm_rate, 0.99);
}

TEST(Attack, RestrictDropsOutsideRows) {
  AttackSpec s = MakeBiasAttack(4, 2, 1, 0.5);
  s.a[2] = 0.3;
  s.d[3] = true;
  AttackSpec kept = Restrict(s, {2});
  EXPECT_EQ(kept.a[1], 0.0);
  EXPECT_EQ(kept.a[2], 0.3);
  EXPECT_FALSE(kept.d[3]);
  EXPECT_EQ(kept.target, -1);
  EXPECT_TRUE(Restrict(s, {}).IsNull());
}

TEST(Attack, RandomCasesKeepResidualUnchanged) {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    GridCase c = RandomCase(rng, 5 + trial);
    Eigen::MatrixXd h = OracleH(c);
    Eigen::VectorXd shift(h.cols());
    for (int k = 0; k < shift.size(); ++k) shift[k] = 0.1 * n01(rng);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(h.cols());
    MeasurementVector z = GenerateMeasurements(c, StateVector{x}, trial);
    std::vector<bool> none(h.rows(), false);
    AttackSpec spec = BuildCombined(h, shift, none);
    EstimationResult a = WlsEstimate(h, z, c.sigmas());
    EstimationResult b = WlsEstimate(h, ApplyAttack(z, spec), c.sigmas());
    EXPECT_LT((a.residual - b.residual).cwiseAbs().maxCoeff(), 1e-9);
  }
}

}  // namespace
}  // namespace gridcosim
