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

#ifndef GRIDCOSIM_TESTS_TEST_UTIL_H_
#define GRIDCOSIM_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridcosim/grid.h"
#include "gridcosim/netgraph.h"

namespace gridcosim::testing {

inline std::filesystem::path DataDir() { return GRIDCOSIM_DATA_DIR; }
inline std::filesystem::path DataFile(const std::string& name) {
  return DataDir() / name;
}

// 3-bus ring, unit reactances, reference bus 1, full plan (m = 9).
inline GridCase Ring3(double sigma = 0.01) {
  std::vector<Bus> buses{{1, 0.0}, {2, 0.6}, {3, 0.9}};
  std::vector<Branch> branches{{1, 1, 2, 1.0}, {2, 1, 3, 1.0}, {3, 2, 3, 1.0}};
  std::vector<Generator> gens{{1, 0.0, 2.0, 10.0}, {2, 0.0, 2.0, 30.0}};
  return GridCase(buses, branches, gens, 1,
                  FullMeasurementPlan(buses, branches, sigma));
}

// Connected random case: random spanning tree plus extra branches, two
// generators, full measurement plan.
inline GridCase RandomCase(std::mt19937_64& rng, int num_buses,
                           double sigma = 0.01) {
  std::uniform_real_distribution<double> x_dist(0.05, 0.5);
  std::uniform_real_distribution<double> load_dist(0.0, 0.3);
  std::vector<Bus> buses;
  for (int b = 1; b <= num_buses; ++b) buses.push_back({b, load_dist(rng)});
  std::vector<Branch> branches;
  std::set<std::pair<int, int>> used;
  int id = 1;
  for (int b = 2; b <= num_buses; ++b) {
    int parent = std::uniform_int_distribution<int>(1, b - 1)(rng);
    used.insert({parent, b});
    branches.push_back({id++, parent, b, x_dist(rng)});
  }
  int extra = num_buses / 2;
  for (int e = 0; e < extra; ++e) {
    int a = std::uniform_int_distribution<int>(1, num_buses)(rng);
    int b = std::uniform_int_distribution<int>(1, num_buses)(rng);
    if (a == b) continue;
    auto key = std::minmax(a, b);
    if (!used.insert(key).second) continue;
    branches.push_back({id++, key.first, key.second, x_dist(rng)});
  }
  std::vector<Generator> gens{{1, 0.0, 10.0, 10.0}, {2, 0.0, 10.0, 20.0}};
  return GridCase(buses, branches, gens, 1,
                  FullMeasurementPlan(buses, branches, sigma));
}

// H rebuilt from the branch equations alone: the column of state k is the
// change of every measured quantity for a unit angle change at that bus.
inline Eigen::MatrixXd OracleH(const GridCase& c) {
  const int n = c.num_states();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(c.num_measurements(), n);
  for (int k = 0; k < n; ++k) {
    std::vector<double> theta(c.num_buses(), 0.0);
    for (int b = 0; b < c.num_buses(); ++b) {
      if (c.state_column(b) == k) theta[b] = 1.0;
    }
    auto flow = [&](const Branch& br) {
      return (theta[c.bus_index(br.from_bus)] - theta[c.bus_index(br.to_bus)]) /
             br.reactance;
    };
    for (int i = 0; i < c.num_measurements(); ++i) {
      const MeasurementDef& def = c.measurements()[i];
      double v = 0.0;
      if (def.kind == MeasurementKind::kInjection) {
        for (const Branch& br : c.branches()) {
          if (br.from_bus == def.target) v += flow(br);
          if (br.to_bus == def.target) v -= flow(br);
        }
      } else {
        const Branch& br = c.branches()[c.branch_index(def.target)];
        v = def.kind == MeasurementKind::kFlowFrom ? flow(br) : -flow(br);
      }
      h(i, k) = v;
    }
  }
  return h;
}

// Weighted least squares via normal equations.
inline Eigen::VectorXd OracleWls(const Eigen::MatrixXd& h,
                                 const Eigen::VectorXd& z,
                                 const std::vector<double>& sigmas,
                                 const std::vector<bool>& use) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(h.cols(), h.cols());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(h.cols());
  for (int i = 0; i < h.rows(); ++i) {
    if (!use[i]) continue;
    double w = 1.0 / (sigmas[i] * sigmas[i]);
    g += w * h.row(i).transpose() * h.row(i);
    rhs += w * h.row(i).transpose() * z[i];
  }
  return g.ldlt().solve(rhs);
}

// Every simple path from `source` to the MTU, by depth-first enumeration.
inline std::vector<std::vector<int>> AllSimplePaths(const CommGraph& g,
                                                    int source) {
  std::vector<std::vector<int>> out;
  std::vector<int> stack{source};
  std::vector<bool> on(g.num_nodes(), false);
  on[source] = true;
  std::function<void(int)> walk = [&](int v) {
    if (v == g.mtu()) {
      out.push_back(stack);
      return;
    }
    for (const auto& [w, e] : g.neighbors(v)) {
      if (on[w]) continue;
      on[w] = true;
      stack.push_back(w);
      walk(w);
      stack.pop_back();
      on[w] = false;
    }
  };
  walk(source);
  return out;
}

// N1 - L1 - N2, L2 = N3 - N4, L3 = N2 - N4, MTU = N4.
inline CommGraph Toy4() {
  std::vector<CommNode> nodes{{"N1", NodeKind::kRtu, 1},
                              {"N2", NodeKind::kRtu, 2},
                              {"N3", NodeKind::kRtu, 3},
                              {"N4", NodeKind::kMtu, 0}};
  std::vector<CommLink> links{{"L1", 0, 1, LinkKind::kWan, {0.01, 0.0}},
                              {"L2", 2, 3, LinkKind::kWan, {0.01, 0.0}},
                              {"L3", 1, 3, LinkKind::kWan, {0.01, 0.0}}};
  return CommGraph(nodes, links, {{1, {1}}, {2, {2}}, {3, {3}}});
}

}  // namespace gridcosim::testing

#endif  // GRIDCOSIM_TESTS_TEST_UTIL_H_
