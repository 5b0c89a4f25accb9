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

#include "gridcosim/secmetric.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "gridcosim/errors.h"
#include "gridcosim/linprog.h"

namespace gridcosim {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void CheckArgs(const Eigen::MatrixXd& h, int j, double mu) {
  if (j < 0 || j >= h.rows()) {
    throw ContractError("target measurement " + std::to_string(j) +
                        " out of range");
  }
  if (mu == 0.0 || !std::isfinite(mu)) {
    throw ContractError("mu must be finite and nonzero");
  }
}

double BigM(const Eigen::MatrixXd& h, double mu, const MetricOptions& options) {
  if (options.big_m > 0.0) return options.big_m;
  return 1e3 * std::abs(mu) * (1.0 + h.cwiseAbs().maxCoeff());
}

int RankOfRows(const Eigen::MatrixXd& h, const std::vector<int>& rows) {
  if (rows.empty()) return 0;
  Eigen::MatrixXd sub(rows.size(), h.cols());
  for (size_t r = 0; r < rows.size(); ++r) sub.row(r) = h.row(rows[r]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  qr.setThreshold(1e-8);
  return static_cast<int>(qr.rank());
}

bool Observable(const Eigen::MatrixXd& h, const std::vector<bool>& d) {
  std::vector<bool> kept(h.rows());
  for (int i = 0; i < h.rows(); ++i) kept[i] = !d[i];
  return CheckObservability(h, kept);
}

// Variables shared by both formulations.
struct CoreVars {
  int c0 = 0;
  int a0 = 0;
  int d0 = 0;
};

// a = (I - diag(d)) H c and a(j) = mu through big-M rows.
CoreVars AddCore(LinearProgram& lp, const Eigen::MatrixXd& h, int j, double mu,
                 double big_m, double d_cost) {
  const int m = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  CoreVars v;
  v.c0 = lp.num_variables();
  for (int k = 0; k < n; ++k) lp.AddVariable(-kInfinity, kInfinity);
  v.a0 = lp.num_variables();
  for (int i = 0; i < m; ++i) lp.AddVariable(-kInfinity, kInfinity);
  v.d0 = lp.num_variables();
  for (int i = 0; i < m; ++i) lp.AddVariable(0.0, 1.0, d_cost);

  for (int i = 0; i < m; ++i) {
    std::vector<LinearTerm> diff{{v.a0 + i, 1.0}};
    for (int k = 0; k < n; ++k) {
      if (h(i, k) != 0.0) diff.push_back({v.c0 + k, -h(i, k)});
    }
    auto upper = diff;
    upper.push_back({v.d0 + i, -big_m});
    lp.AddRow(upper, RowSense::kLessEqual, 0.0);
    auto lower = diff;
    lower.push_back({v.d0 + i, big_m});
    lp.AddRow(lower, RowSense::kGreaterEqual, 0.0);
    lp.AddRow({{v.a0 + i, 1.0}, {v.d0 + i, big_m}}, RowSense::kLessEqual,
              big_m);
    lp.AddRow({{v.a0 + i, 1.0}, {v.d0 + i, -big_m}}, RowSense::kGreaterEqual,
              -big_m);
  }
  lp.AddRow({{v.a0 + j, 1.0}}, RowSense::kEqual, mu);
  return v;
}

LazyCheck ObservabilityCheck(const Eigen::MatrixXd& h, int d0) {
  const int m = static_cast<int>(h.rows());
  return [&h, d0, m](std::span<const double> values)
             -> std::optional<std::vector<int>> {
    std::vector<bool> d(m);
    std::vector<int> removed;
    for (int i = 0; i < m; ++i) {
      d[i] = values[d0 + i] > 0.5;
      if (d[i]) removed.push_back(d0 + i);
    }
    if (Observable(h, d)) return std::nullopt;
    return removed;
  };
}

void FillCore(MetricResult& out, const MilpResult& milp, const CoreVars& v,
              const Eigen::MatrixXd& h, double mu) {
  const int m = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  out.c.resize(n);
  out.a.resize(m);
  out.d.assign(m, false);
  for (int k = 0; k < n; ++k) out.c[k] = milp.values[v.c0 + k];
  for (int i = 0; i < m; ++i) {
    out.d[i] = milp.values[v.d0 + i] > 0.5;
    double a = milp.values[v.a0 + i];
    out.a[i] = (out.d[i] || std::abs(a) < 1e-6 * std::abs(mu)) ? 0.0 : a;
  }
}

double CoreViolation(const Eigen::MatrixXd& h, const MetricResult& r, int j,
                     double mu) {
  Eigen::VectorXd hc = h * r.c;
  double worst = std::abs(r.a[j] - mu);
  for (int i = 0; i < h.rows(); ++i) {
    double expected = r.d[i] ? 0.0 : hc[i];
    worst = std::max(worst, std::abs(r.a[i] - expected));
  }
  if (!Observable(h, r.d)) worst = std::max(worst, 1.0);
  return worst;
}

// Cheapest single-state shift c = (mu / H(j, k)) e_k, as a starting
// incumbent for the alpha search. Empty when no column touches row j.
std::vector<double> AlphaStart(const LinearProgram& lp, const Eigen::MatrixXd& h,
                               int j, double mu, int c0, int s0,
                               const std::vector<int>& groups,
                               const std::map<int, int>& group_var) {
  const int m = static_cast<int>(h.rows());
  int best_k = -1;
  int best_cost = std::numeric_limits<int>::max();
  for (int k = 0; k < h.cols(); ++k) {
    if (std::abs(h(j, k)) < 1e-9) continue;
    std::set<int> touched;
    for (int i = 0; i < m; ++i) {
      if (h(i, k) != 0.0) touched.insert(groups.empty() ? i : groups[i]);
    }
    int cost = static_cast<int>(touched.size());
    if (cost < best_cost) {
      best_cost = cost;
      best_k = k;
    }
  }
  if (best_k < 0) return {};
  std::vector<double> x(lp.num_variables(), 0.0);
  x[c0 + best_k] = mu / h(j, best_k);
  for (int i = 0; i < m; ++i) {
    if (h(i, best_k) == 0.0) continue;
    x[s0 + i] = 1.0;
    if (!groups.empty()) x[group_var.at(groups[i])] = 1.0;
  }
  return x;
}

MetricStatus FromMilp(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal:
      return MetricStatus::kOptimal;
    case MilpStatus::kInfeasible:
      return MetricStatus::kInfeasible;
    case MilpStatus::kNodeLimit:
      return MetricStatus::kNodeLimit;
  }
  return MetricStatus::kInfeasible;
}

std::vector<bool> OnAllPaths(const RoutingMatrix& routing, int i) {
  std::vector<bool> common(routing.num_nodes(), true);
  for (int r : routing.paths_of(i)) {
    const auto& part = routing.rows()[r].node_part;
    for (int v = 0; v < routing.num_nodes(); ++v) {
      common[v] = common[v] && part[v];
    }
  }
  return common;
}

}  // namespace

std::string_view MetricStatusName(MetricStatus status) {
  switch (status) {
    case MetricStatus::kOptimal:
      return "optimal";
    case MetricStatus::kInfeasible:
      return "infeasible";
    case MetricStatus::kUnknownAboveBound:
      return "unknown-above-bound";
    case MetricStatus::kNodeLimit:
      return "node-limit";
  }
  return "?";
}

MetricResult AlphaMetric(const Eigen::MatrixXd& h, int j, double mu,
                         const MetricOptions& options) {
  CheckArgs(h, j, mu);
  auto start = Clock::now();
  const int m = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  const bool grouped = !options.rtu_groups.empty();
  if (grouped && static_cast<int>(options.rtu_groups.size()) != m) {
    throw ContractError("rtu_groups must have one entry per measurement");
  }
  const double big_m = BigM(h, mu, options);

  // Removing a row costs as much as altering it and only adds the
  // observability requirement, so d = 0 at some optimum. With d fixed,
  // a = H c and the model reduces to |H_i c| <= M s_i, H_j c = mu.
  LinearProgram lp;
  const int c0 = lp.num_variables();
  for (int k = 0; k < n; ++k) lp.AddVariable(-kInfinity, kInfinity);
  const int s0 = lp.num_variables();
  for (int i = 0; i < m; ++i) lp.AddVariable(0.0, 1.0, grouped ? 0.0 : 1.0);
  for (int i = 0; i < m; ++i) {
    std::vector<LinearTerm> hc;
    for (int k = 0; k < n; ++k) {
      if (h(i, k) != 0.0) hc.push_back({c0 + k, h(i, k)});
    }
    if (i == j) {
      lp.AddRow(hc, RowSense::kEqual, mu);
      lp.SetBounds(s0 + i, 1.0, 1.0);
      continue;
    }
    auto upper = hc;
    upper.push_back({s0 + i, -big_m});
    lp.AddRow(upper, RowSense::kLessEqual, 0.0);
    auto lower = hc;
    lower.push_back({s0 + i, big_m});
    lp.AddRow(lower, RowSense::kGreaterEqual, 0.0);
  }
  std::vector<int> binaries;
  for (int i = 0; i < m; ++i) binaries.push_back(s0 + i);

  std::map<int, int> group_var;
  if (grouped) {
    for (int i = 0; i < m; ++i) {
      int g = options.rtu_groups[i];
      if (!group_var.count(g)) {
        group_var[g] = lp.AddVariable(0.0, 1.0, 1.0);
        binaries.push_back(group_var[g]);
      }
      lp.AddRow({{s0 + i, 1.0}, {group_var[g], -1.0}}, RowSense::kLessEqual,
                0.0);
    }
  }

  MilpOptions milp_options;
  milp_options.max_nodes = options.max_nodes;
  milp_options.start =
      AlphaStart(lp, h, j, mu, c0, s0, options.rtu_groups, group_var);
  MilpResult milp = SolveBinaryMilp(lp, binaries, milp_options);

  MetricResult out;
  out.status = FromMilp(milp.status);
  out.nodes = milp.nodes;
  if (milp.has_solution) {
    out.c.resize(n);
    for (int k = 0; k < n; ++k) out.c[k] = milp.values[c0 + k];
    out.a = h * out.c;
    for (int i = 0; i < m; ++i) {
      if (std::abs(out.a[i]) < 1e-6 * std::abs(mu)) out.a[i] = 0.0;
    }
    out.a[j] = mu;
    out.d.assign(m, false);
    out.max_violation = CoreViolation(h, out, j, mu);
    if (grouped) {
      std::set<int> touched;
      for (int i = 0; i < m; ++i) {
        if (out.a[i] != 0.0) touched.insert(options.rtu_groups[i]);
      }
      out.value = static_cast<int>(touched.size());
    } else {
      out.value = 0;
      for (int i = 0; i < m; ++i) out.value += out.a[i] != 0.0;
    }
    out.feasible = milp.status == MilpStatus::kOptimal;
  }
  out.seconds = Seconds(start);
  return out;
}

MetricResult BetaMetric(const Eigen::MatrixXd& h, const CommGraph& graph,
                        const RoutingMatrix& routing, int j, double mu,
                        const MetricOptions& options) {
  CheckArgs(h, j, mu);
  if (routing.num_measurements() != h.rows()) {
    throw ContractError("routing and H cover different measurement sets");
  }
  auto start = Clock::now();
  const int m = static_cast<int>(h.rows());
  const int num_nodes = graph.num_nodes();
  const int num_links = graph.num_links();
  const double big_m = BigM(h, mu, options);

  LinearProgram lp;
  CoreVars v = AddCore(lp, h, j, mu, big_m, 0.0);
  const int x0 = lp.num_variables();
  for (int node = 0; node < num_nodes; ++node) {
    bool locked = node == graph.mtu() && !options.allow_mtu;
    lp.AddVariable(0.0, locked ? 0.0 : 1.0, 1.0);
  }
  const int y0 = lp.num_variables();
  for (int e = 0; e < num_links; ++e) lp.AddVariable(0.0, 1.0, 1.0);

  for (int i = 0; i < m; ++i) {
    for (int r : routing.paths_of(i)) {
      const RoutingVector& row = routing.rows()[r];
      if (i != j) {
        std::vector<LinearTerm> upper{{v.a0 + i, 1.0}};
        std::vector<LinearTerm> lower{{v.a0 + i, 1.0}};
        for (int node : row.node_sequence) {
          upper.push_back({x0 + node, -big_m});
          lower.push_back({x0 + node, big_m});
        }
        lp.AddRow(upper, RowSense::kLessEqual, 0.0);
        lp.AddRow(lower, RowSense::kGreaterEqual, 0.0);
      }
      std::vector<LinearTerm> cover{{v.d0 + i, 1.0}};
      for (int node : row.node_sequence) cover.push_back({x0 + node, -1.0});
      for (int e : row.link_sequence) cover.push_back({y0 + e, -1.0});
      lp.AddRow(cover, RowSense::kLessEqual, 0.0);
    }
  }
  std::vector<bool> common = OnAllPaths(routing, j);
  std::vector<LinearTerm> hold_j;
  for (int node = 0; node < num_nodes; ++node) {
    if (common[node]) hold_j.push_back({x0 + node, 1.0});
  }
  lp.AddRow(hold_j, RowSense::kGreaterEqual, 1.0);

  std::vector<int> binaries;
  for (int i = 0; i < m; ++i) binaries.push_back(v.d0 + i);
  for (int node = 0; node < num_nodes; ++node) binaries.push_back(x0 + node);
  for (int e = 0; e < num_links; ++e) binaries.push_back(y0 + e);

  MilpOptions milp_options;
  milp_options.max_nodes = options.max_nodes;
  MilpResult milp =
      SolveBinaryMilp(lp, binaries, milp_options, ObservabilityCheck(h, v.d0));

  MetricResult out;
  out.status = FromMilp(milp.status);
  out.nodes = milp.nodes;
  if (milp.has_solution) {
    FillCore(out, milp, v, h, mu);
    out.x.assign(num_nodes, false);
    out.y.assign(num_links, false);
    out.value = 0;
    for (int node = 0; node < num_nodes; ++node) {
      out.x[node] = milp.values[x0 + node] > 0.5;
      out.value += out.x[node];
    }
    for (int e = 0; e < num_links; ++e) {
      out.y[e] = milp.values[y0 + e] > 0.5;
      out.value += out.y[e];
    }
    double worst = CoreViolation(h, out, j, mu);
    std::vector<bool> integrity = IntegrityReach(routing, out.x);
    std::vector<bool> availability = AvailabilityReach(routing, out.x, out.y);
    for (int i = 0; i < m; ++i) {
      if (i != j && out.a[i] != 0.0 && !integrity[i]) worst = std::max(worst, 1.0);
      if (out.d[i] && !availability[i]) worst = std::max(worst, 1.0);
    }
    bool held = false;
    for (int node = 0; node < num_nodes; ++node) {
      held = held || (common[node] && out.x[node]);
    }
    if (!held) worst = std::max(worst, 1.0);
    out.max_violation = worst;
    out.feasible = milp.status == MilpStatus::kOptimal;
  }
  out.seconds = Seconds(start);
  return out;
}

std::vector<bool> IntegrityReach(const RoutingMatrix& routing,
                                 const std::vector<bool>& x) {
  std::vector<bool> out(routing.num_measurements(), true);
  for (int i = 0; i < routing.num_measurements(); ++i) {
    for (int r : routing.paths_of(i)) {
      bool hit = false;
      for (int node : routing.rows()[r].node_sequence) hit = hit || x[node];
      out[i] = out[i] && hit;
    }
  }
  return out;
}

std::vector<bool> AvailabilityReach(const RoutingMatrix& routing,
                                    const std::vector<bool>& x,
                                    const std::vector<bool>& y) {
  std::vector<bool> out(routing.num_measurements(), true);
  for (int i = 0; i < routing.num_measurements(); ++i) {
    for (int r : routing.paths_of(i)) {
      const RoutingVector& row = routing.rows()[r];
      bool hit = false;
      for (int node : row.node_sequence) hit = hit || x[node];
      for (int e : row.link_sequence) hit = hit || (!y.empty() && y[e]);
      out[i] = out[i] && hit;
    }
  }
  return out;
}

namespace {

// Some c with H_Z c = 0 and h_j c = mu exists iff h_j is outside the row
// space of H_Z.
bool TargetReachable(const Eigen::MatrixXd& h, std::vector<int> zero_rows,
                     int j) {
  int base = RankOfRows(h, zero_rows);
  zero_rows.push_back(j);
  return RankOfRows(h, zero_rows) == base + 1;
}

void ForEachSubset(int n, int k, const std::function<bool(const std::vector<int>&)>& fn) {
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  if (k > n) return;
  while (true) {
    if (fn(pick)) return;
    int i = k - 1;
    while (i >= 0 && pick[i] == n - k + i) --i;
    if (i < 0) return;
    ++pick[i];
    for (int t = i + 1; t < k; ++t) pick[t] = pick[t - 1] + 1;
  }
}

}  // namespace

MetricResult BruteForceMetric(const Eigen::MatrixXd& h, int j, double mu,
                              int max_card) {
  CheckArgs(h, j, mu);
  auto start = Clock::now();
  const int m = static_cast<int>(h.rows());
  MetricResult out;
  for (int card = 1; card <= std::min(max_card, m); ++card) {
    // Every labelling of `card` rows as attacked (S) or removed (D), j in S.
    bool found = false;
    ForEachSubset(m, card, [&](const std::vector<int>& rows) {
      if (std::find(rows.begin(), rows.end(), j) == rows.end()) return false;
      for (int mask = 0; mask < (1 << card); ++mask) {
        std::vector<bool> in_set(m, false);
        std::vector<bool> d(m, false);
        bool bad = false;
        for (int t = 0; t < card; ++t) {
          in_set[rows[t]] = true;
          if (mask & (1 << t)) {
            if (rows[t] == j) bad = true;
            d[rows[t]] = true;
          }
        }
        if (bad || !Observable(h, d)) continue;
        std::vector<int> zero_rows;
        for (int i = 0; i < m; ++i) {
          if (!in_set[i]) zero_rows.push_back(i);
        }
        if (!TargetReachable(h, zero_rows, j)) continue;
        found = true;
        out.d = d;
        return true;
      }
      return false;
    });
    if (found) {
      out.status = MetricStatus::kOptimal;
      out.feasible = true;
      out.value = card;
      out.seconds = Seconds(start);
      return out;
    }
  }
  out.status = max_card >= m ? MetricStatus::kInfeasible
                             : MetricStatus::kUnknownAboveBound;
  out.seconds = Seconds(start);
  return out;
}

MetricResult BruteForceMetric(const Eigen::MatrixXd& h, const CommGraph& graph,
                              const RoutingMatrix& routing, int j, double mu,
                              int max_card, bool allow_mtu) {
  CheckArgs(h, j, mu);
  auto start = Clock::now();
  const int m = static_cast<int>(h.rows());
  const int num_nodes = graph.num_nodes();
  const int num_links = graph.num_links();
  // Element e < num_nodes is a node, otherwise link e - num_nodes.
  std::vector<int> elements;
  for (int node = 0; node < num_nodes; ++node) {
    if (node != graph.mtu() || allow_mtu) elements.push_back(node);
  }
  for (int e = 0; e < num_links; ++e) elements.push_back(num_nodes + e);
  const int total = static_cast<int>(elements.size());
  std::vector<bool> common = OnAllPaths(routing, j);

  MetricResult out;
  for (int card = 1; card <= std::min(max_card, total); ++card) {
    bool found = false;
    ForEachSubset(total, card, [&](const std::vector<int>& pick) {
      std::vector<bool> x(num_nodes, false);
      std::vector<bool> y(num_links, false);
      for (int p : pick) {
        int e = elements[p];
        if (e < num_nodes) {
          x[e] = true;
        } else {
          y[e - num_nodes] = true;
        }
      }
      bool held = false;
      for (int node = 0; node < num_nodes; ++node) held = held || (common[node] && x[node]);
      if (!held) return false;
      std::vector<bool> integrity = IntegrityReach(routing, x);
      std::vector<bool> availability = AvailabilityReach(routing, x, y);
      std::vector<int> removable;
      for (int i = 0; i < m; ++i) {
        if (availability[i] && i != j) removable.push_back(i);
      }
      const int r = static_cast<int>(removable.size());
      for (long mask = 0; mask < (1L << r); ++mask) {
        std::vector<bool> d(m, false);
        for (int t = 0; t < r; ++t) {
          if (mask & (1L << t)) d[removable[t]] = true;
        }
        if (!Observable(h, d)) continue;
        std::vector<int> zero_rows;
        for (int i = 0; i < m; ++i) {
          if (!d[i] && i != j && !integrity[i]) zero_rows.push_back(i);
        }
        if (!TargetReachable(h, zero_rows, j)) continue;
        found = true;
        out.x = x;
        out.y = y;
        out.d = d;
        return true;
      }
      return false;
    });
    if (found) {
      out.status = MetricStatus::kOptimal;
      out.feasible = true;
      out.value = card;
      out.seconds = Seconds(start);
      return out;
    }
  }
  out.status = max_card >= total ? MetricStatus::kInfeasible
                                 : MetricStatus::kUnknownAboveBound;
  out.seconds = Seconds(start);
  return out;
}

AttackSpec ResolveAttackAtVantage(const Eigen::MatrixXd& h,
                                  const RoutingMatrix& routing,
                                  const std::vector<bool>& x,
                                  const std::vector<bool>& y, int j,
                                  double mu) {
  CheckArgs(h, j, mu);
  const int m = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  std::vector<bool> common = OnAllPaths(routing, j);
  bool held = false;
  for (int node = 0; node < routing.num_nodes(); ++node) {
    held = held || (common[node] && x[node]);
  }
  if (!held) {
    throw AttackError("no compromised node lies on every path of measurement " +
                      std::to_string(j));
  }
  std::vector<bool> integrity = IntegrityReach(routing, x);
  std::vector<int> zero_rows;
  for (int i = 0; i < m; ++i) {
    if (i != j && !integrity[i]) zero_rows.push_back(i);
  }

  // Orthonormal basis of null(H_Z).
  Eigen::MatrixXd basis;
  if (zero_rows.empty()) {
    basis = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::MatrixXd hz(zero_rows.size(), n);
    for (size_t r = 0; r < zero_rows.size(); ++r) hz.row(r) = h.row(zero_rows[r]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(hz, Eigen::ComputeFullV);
    svd.setThreshold(1e-8);
    int rank = static_cast<int>(svd.rank());
    basis = svd.matrixV().rightCols(n - rank);
  }
  Eigen::RowVectorXd g = h.row(j) * basis;
  if (g.norm() < 1e-9 * (1.0 + h.row(j).norm())) {
    throw AttackError("measurement " + std::to_string(j) +
                      " cannot be altered stealthily from this vantage point");
  }
  Eigen::VectorXd c = basis * (g.transpose() * (mu / g.squaredNorm()));
  AttackSpec spec = BuildCombined(h, c, std::vector<bool>(m, false), j);
  for (int i = 0; i < m; ++i) {
    if (std::abs(spec.a[i]) < 1e-12 * std::abs(mu)) spec.a[i] = 0.0;
  }
  spec.a[j] = mu;
  spec.mu = mu;
  spec.x = x;
  spec.y = y;
  spec.y.resize(routing.num_links(), false);
  return spec;
}

}  // namespace gridcosim
