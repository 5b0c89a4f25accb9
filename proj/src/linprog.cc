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

#include "gridcosim/linprog.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "gridcosim/errors.h"

namespace gridcosim {

int LinearProgram::AddVariable(double lower, double upper, double cost) {
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  return num_variables() - 1;
}

void LinearProgram::AddRow(std::vector<LinearTerm> terms, RowSense sense,
                           double rhs) {
  for (const LinearTerm& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw ContractError("linear row references an unknown variable");
    }
  }
  rows_.push_back({std::move(terms), sense, rhs});
}

void LinearProgram::SetBounds(int var, double lower, double upper) {
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

namespace {

constexpr double kPivotTolerance = 1e-7;
constexpr double kCostTolerance = 1e-9;
constexpr double kFeasTolerance = 1e-9;
constexpr int kDegenerateRun = 50;
constexpr int kRefactorInterval = 100;
constexpr int kConfirmAfter = 25;
constexpr int kIterationCap = 200000;

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense tableau B^-1 [A I S] over structural, slack and artificial columns,
// kept next to the original [A I S] and right-hand side so it can be rebuilt
// from a fresh factorization. Nonbasic columns rest at a finite bound, or at
// zero when free.
class Tableau {
 public:
  Tableau(int rows, int cols)
      : original_(RowMajor::Zero(rows, cols)), rhs_(Eigen::VectorXd::Zero(rows)),
        reduced_(cols, 0.0), basis_(rows, -1), lower_(cols, 0.0),
        upper_(cols, 0.0), value_(cols, 0.0), row_of_(cols, -1) {}

  int rows() const { return static_cast<int>(original_.rows()); }
  int cols() const { return static_cast<int>(original_.cols()); }
  double at(int r, int c) const { return current_(r, c); }
  RowMajor& original() { return original_; }
  Eigen::VectorXd& rhs() { return rhs_; }
  std::vector<double>& lower() { return lower_; }
  std::vector<double>& upper() { return upper_; }
  std::vector<double>& value() { return value_; }
  const std::vector<double>& reduced() const { return reduced_; }
  int basis(int r) const { return basis_[r]; }
  bool is_basic(int c) const { return row_of_[c] >= 0; }

  // The initial basis must be an identity over the starting columns.
  void SetBasis(int r, int c) {
    basis_[r] = c;
    row_of_[c] = r;
  }
  void Start() { current_ = original_; }

  void Pivot(int r, int c) {
    const int n = cols();
    double* row = current_.row(r).data();
    double inv = 1.0 / row[c];
    for (int k = 0; k < n; ++k) row[k] *= inv;
    row[c] = 1.0;
    for (int i = 0; i < rows(); ++i) {
      if (i == r) continue;
      double* other = current_.row(i).data();
      double factor = other[c];
      if (factor == 0.0) continue;
      for (int k = 0; k < n; ++k) other[k] -= factor * row[k];
      other[c] = 0.0;
    }
    double factor = reduced_[c];
    if (factor != 0.0) {
      for (int k = 0; k < n; ++k) reduced_[k] -= factor * row[k];
      reduced_[c] = 0.0;
    }
    row_of_[basis_[r]] = -1;
    SetBasis(r, c);
  }

  // Rebuilds reduced costs for `costs` against the current basis.
  void PriceOut(const std::vector<double>& costs) {
    reduced_ = costs;
    for (int r = 0; r < rows(); ++r) {
      double cb = costs[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = current_.row(r).data();
      for (int k = 0; k < cols(); ++k) reduced_[k] -= cb * row[k];
    }
  }

  // Recomputes B^-1 [A I S] and the basic values from the original data,
  // discarding the rounding accumulated by successive pivots.
  void Refactor(const std::vector<double>& costs) {
    const int m = rows();
    Eigen::MatrixXd b(m, m);
    for (int r = 0; r < m; ++r) b.col(r) = original_.col(basis_[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    current_ = lu.solve(original_);
    Eigen::VectorXd residual = rhs_;
    for (int k = 0; k < cols(); ++k) {
      if (!is_basic(k) && value_[k] != 0.0) {
        residual -= value_[k] * original_.col(k);
      }
    }
    Eigen::VectorXd xb = lu.solve(residual);
    for (int r = 0; r < m; ++r) value_[basis_[r]] = xb[r];
    PriceOut(costs);
  }

 private:
  RowMajor original_;
  RowMajor current_;
  Eigen::VectorXd rhs_;
  std::vector<double> reduced_;
  std::vector<int> basis_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> value_;
  std::vector<int> row_of_;
};

enum class PhaseOutcome { kOptimal, kUnbounded, kIterationLimit };

// Primal simplex with bounded variables and Dantzig pricing. A run of
// degenerate steps switches to Bland's rule (lowest eligible column enters,
// lowest blocking column leaves) until the objective moves again.
PhaseOutcome RunSimplex(Tableau& t, const std::vector<double>& costs,
                        int& iterations) {
  bool bland = false;
  int degenerate = 0;
  int since_refactor = 0;
  std::vector<double>& x = t.value();
  const std::vector<double>& lo = t.lower();
  const std::vector<double>& up = t.upper();
  t.PriceOut(costs);
  while (true) {
    if (iterations >= kIterationCap) return PhaseOutcome::kIterationLimit;
    if (since_refactor >= kRefactorInterval) {
      t.Refactor(costs);
      since_refactor = 0;
    }
    const std::vector<double>& d = t.reduced();
    int entering = -1;
    double best = kCostTolerance;
    for (int k = 0; k < t.cols(); ++k) {
      if (t.is_basic(k)) continue;
      double gain = 0.0;
      if (d[k] < -kCostTolerance && x[k] < up[k]) gain = -d[k];
      if (d[k] > kCostTolerance && x[k] > lo[k]) gain = d[k];
      if (gain == 0.0) continue;
      if (bland) {
        entering = k;
        break;
      }
      if (gain > best) {
        best = gain;
        entering = k;
      }
    }
    if (entering < 0) {
      // Confirm optimality on freshly factored data after long pivot runs.
      if (since_refactor < kConfirmAfter) return PhaseOutcome::kOptimal;
      t.Refactor(costs);
      since_refactor = 0;
      continue;
    }
    const double dir = d[entering] < 0.0 ? 1.0 : -1.0;

    // Harris ratio test: bound the step with slightly relaxed basic bounds,
    // then pick among rows blocking within it.
    auto blocking = [&](int r, double relax, bool& upper_hit) {
      double alpha = t.at(r, entering);
      if (std::abs(alpha) <= kPivotTolerance) return kInfinity;
      int b = t.basis(r);
      double rate = -dir * alpha;  // change of x_b per unit step
      if (rate < 0.0) {
        upper_hit = false;
        if (!std::isfinite(lo[b])) return kInfinity;
        return std::max(x[b] - lo[b] + relax, 0.0) / -rate;
      }
      upper_hit = true;
      if (!std::isfinite(up[b])) return kInfinity;
      return std::max(up[b] - x[b] + relax, 0.0) / rate;
    };
    double bound = up[entering] - lo[entering];
    bool hit = false;
    double max_pivot = 0.0;
    for (int r = 0; r < t.rows(); ++r) {
      double limit = blocking(r, kFeasTolerance, hit);
      if (limit < kInfinity) {
        max_pivot = std::max(max_pivot, std::abs(t.at(r, entering)));
      }
      bound = std::min(bound, limit);
    }
    if (!std::isfinite(bound)) return PhaseOutcome::kUnbounded;
    int leaving = -1;
    bool to_upper = false;
    double step = up[entering] - lo[entering];
    double best_pivot = 0.0;
    for (int r = 0; r < t.rows(); ++r) {
      double limit = blocking(r, 0.0, hit);
      if (limit > bound) continue;
      double pivot = std::abs(t.at(r, entering));
      bool better;
      if (bland) {
        // Lowest index, but never trade a sound pivot for a tiny one.
        better = leaving < 0 || (pivot >= 1e-3 * max_pivot &&
                                 (best_pivot < 1e-3 * max_pivot ||
                                  t.basis(r) < t.basis(leaving)));
      } else {
        better = pivot > best_pivot;
      }
      if (better) {
        leaving = r;
        best_pivot = pivot;
        to_upper = hit;
        step = limit;
      }
    }

    if (step <= 1e-12) {
      if (++degenerate >= kDegenerateRun) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
    if (step > 0.0) {
      for (int r = 0; r < t.rows(); ++r) {
        double alpha = t.at(r, entering);
        if (alpha != 0.0) x[t.basis(r)] -= dir * step * alpha;
      }
      x[entering] += dir * step;
    }
    if (leaving >= 0) {
      int b = t.basis(leaving);
      x[b] = to_upper ? up[b] : lo[b];
      t.Pivot(leaving, entering);
      ++since_refactor;
    } else {
      x[entering] = dir > 0.0 ? up[entering] : lo[entering];
    }
    ++iterations;
  }
}

}  // namespace

LpSolution SolveLp(const LinearProgram& lp) {
  LpSolution solution;
  const int n = lp.num_variables();
  for (int j = 0; j < n; ++j) {
    if (lp.lower()[j] > lp.upper()[j] + 1e-12) return solution;
  }

  // Columns: n structurals, one slack per row (A x + s = b), then one
  // artificial for each row whose slack cannot absorb the starting residual,
  // signed so that it starts nonnegative.
  const int m = lp.num_rows();
  std::vector<double> start(n);
  for (int j = 0; j < n; ++j) {
    double l = lp.lower()[j];
    double u = lp.upper()[j];
    start[j] = std::isfinite(l) ? l : std::isfinite(u) ? u : 0.0;
  }
  std::vector<double> residual(m);
  std::vector<double> slack_lo(m);
  std::vector<double> slack_up(m);
  int num_art = 0;
  for (int r = 0; r < m; ++r) {
    const LinearRow& row = lp.rows()[r];
    slack_lo[r] = row.sense == RowSense::kLessEqual ? 0.0 : -kInfinity;
    slack_up[r] = row.sense == RowSense::kGreaterEqual ? 0.0 : kInfinity;
    if (row.sense == RowSense::kEqual) slack_lo[r] = slack_up[r] = 0.0;
    residual[r] = row.rhs;
    for (const LinearTerm& term : row.terms) {
      residual[r] -= term.coef * start[term.var];
    }
    if (residual[r] < slack_lo[r] || residual[r] > slack_up[r]) ++num_art;
  }
  const int first_art = n + m;
  const int total = first_art + num_art;
  Tableau t(m, total);
  RowMajor& a = t.original();
  std::vector<double>& lo = t.lower();
  std::vector<double>& up = t.upper();
  std::vector<double>& x = t.value();
  for (int j = 0; j < n; ++j) {
    lo[j] = lp.lower()[j];
    up[j] = lp.upper()[j];
    x[j] = start[j];
  }
  double rhs_scale = 1.0;
  int next_art = first_art;
  for (int r = 0; r < m; ++r) {
    const LinearRow& row = lp.rows()[r];
    const int slack = n + r;
    lo[slack] = slack_lo[r];
    up[slack] = slack_up[r];
    for (const LinearTerm& term : row.terms) a(r, term.var) += term.coef;
    rhs_scale = std::max(rhs_scale, std::abs(row.rhs));
    a(r, slack) = 1.0;
    t.rhs()[r] = row.rhs;
    if (residual[r] >= lo[slack] && residual[r] <= up[slack]) {
      x[slack] = residual[r];
      t.SetBasis(r, slack);
      continue;
    }
    double sign = residual[r] >= 0.0 ? 1.0 : -1.0;
    a.row(r) *= sign;
    t.rhs()[r] *= sign;
    a(r, next_art) = 1.0;
    x[next_art] = std::abs(residual[r]);
    up[next_art] = kInfinity;
    t.SetBasis(r, next_art);
    ++next_art;
  }
  t.Start();

  int iterations = 0;
  if (num_art > 0) {
    std::vector<double> phase1(total, 0.0);
    for (int k = first_art; k < total; ++k) phase1[k] = 1.0;
    PhaseOutcome outcome = RunSimplex(t, phase1, iterations);
    solution.iterations = iterations;
    if (outcome == PhaseOutcome::kIterationLimit) {
      solution.status = LpStatus::kIterationLimit;
      return solution;
    }
    double infeasibility = 0.0;
    for (int k = first_art; k < total; ++k) infeasibility += std::abs(x[k]);
    if (infeasibility > 1e-7 * rhs_scale) {
      solution.status = LpStatus::kInfeasible;
      return solution;
    }
    // Artificials stay pinned at zero; basic ones sit on redundant rows or
    // leave through degenerate pivots.
    for (int k = first_art; k < total; ++k) {
      x[k] = 0.0;
      up[k] = 0.0;
    }
  }

  std::vector<double> phase2(total, 0.0);
  for (int j = 0; j < n; ++j) phase2[j] = lp.cost()[j];
  PhaseOutcome outcome = RunSimplex(t, phase2, iterations);
  solution.iterations = iterations;
  if (outcome == PhaseOutcome::kUnbounded) {
    solution.status = LpStatus::kUnbounded;
    return solution;
  }
  if (outcome == PhaseOutcome::kIterationLimit) {
    solution.status = LpStatus::kIterationLimit;
    return solution;
  }

  solution.values.assign(x.begin(), x.begin() + n);
  double objective = 0.0;
  for (int j = 0; j < n; ++j) objective += lp.cost()[j] * solution.values[j];
  solution.objective = objective;
  solution.status = LpStatus::kOptimal;
  return solution;
}

namespace {

bool IsFeasiblePoint(const LinearProgram& lp, const std::vector<bool>& is_binary,
                     const std::vector<double>& x, double int_tol) {
  if (static_cast<int>(x.size()) != lp.num_variables()) return false;
  const double tol = 1e-7;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (x[j] < lp.lower()[j] - tol || x[j] > lp.upper()[j] + tol) return false;
    if (is_binary[j] && std::abs(x[j] - std::round(x[j])) > int_tol) return false;
  }
  for (const LinearRow& row : lp.rows()) {
    double lhs = 0.0;
    double scale = 1.0;
    for (const LinearTerm& t : row.terms) {
      lhs += t.coef * x[t.var];
      scale = std::max(scale, std::abs(t.coef * x[t.var]));
    }
    double slack = tol * scale;
    if (row.sense != RowSense::kGreaterEqual && lhs > row.rhs + slack) return false;
    if (row.sense != RowSense::kLessEqual && lhs < row.rhs - slack) return false;
  }
  return true;
}

}  // namespace

MilpResult SolveBinaryMilp(const LinearProgram& lp,
                           std::span<const int> binaries,
                           const MilpOptions& options, const LazyCheck& lazy) {
  MilpResult result;
  std::vector<bool> is_binary(lp.num_variables(), false);
  for (int b : binaries) is_binary.at(b) = true;
  bool integral_objective = true;
  for (int j = 0; j < lp.num_variables(); ++j) {
    double c = lp.cost()[j];
    if (is_binary[j] ? c != std::round(c) : c != 0.0) integral_objective = false;
  }

  if (!options.start.empty() &&
      IsFeasiblePoint(lp, is_binary, options.start, options.integrality_tolerance)) {
    result.has_solution = true;
    result.values = options.start;
    double value = 0.0;
    for (int j = 0; j < lp.num_variables(); ++j) {
      value += lp.cost()[j] * options.start[j];
    }
    result.objective = integral_objective ? std::round(value) : value;
  }

  struct Node {
    std::vector<std::pair<int, int>> fixes;
  };
  std::vector<Node> stack;
  stack.push_back({});
  const double tol = options.integrality_tolerance;
  bool hit_limit = false;

  auto is_fixed = [](const Node& node, int var) {
    for (const auto& [v, value] : node.fixes) {
      if (v == var) return true;
    }
    return false;
  };
  auto push_children = [&stack](const Node& node, int var, int first) {
    Node second_child = node;
    second_child.fixes.emplace_back(var, 1 - first);
    Node first_child = node;
    first_child.fixes.emplace_back(var, first);
    stack.push_back(std::move(second_child));
    stack.push_back(std::move(first_child));
  };

  while (!stack.empty()) {
    if (result.nodes >= options.max_nodes) {
      hit_limit = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++result.nodes;

    LinearProgram sub = lp;
    for (int b : binaries) {
      sub.SetBounds(b, std::max(0.0, lp.lower()[b]), std::min(1.0, lp.upper()[b]));
    }
    for (const auto& [var, value] : node.fixes) sub.SetBounds(var, value, value);
    LpSolution relaxed = SolveLp(sub);
    result.lp_iterations += relaxed.iterations;
    if (relaxed.status != LpStatus::kOptimal) continue;

    double bound = integral_objective
                       ? std::ceil(relaxed.objective - 1e-6)
                       : relaxed.objective;
    if (result.has_solution &&
        bound >= result.objective - (integral_objective ? 0.5 : 1e-9)) {
      continue;
    }

    int branch_var = -1;
    double branch_frac = tol;
    for (int b : binaries) {
      double v = relaxed.values[b];
      double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > branch_frac + 1e-12) {
        branch_frac = frac;
        branch_var = b;
      }
    }

    if (branch_var >= 0) {
      int first = relaxed.values[branch_var] < 0.5 ? 0 : 1;
      push_children(node, branch_var, first);
      continue;
    }

    // Near-integral binaries can still hide a big-M leak, so re-solve with
    // every binary pinned to its rounded value.
    int drift_var = -1;
    double drift = 0.0;
    for (int b : binaries) {
      double dev = std::abs(relaxed.values[b] - std::round(relaxed.values[b]));
      if (dev > drift && !is_fixed(node, b)) {
        drift = dev;
        drift_var = b;
      }
    }
    if (drift_var >= 0) {
      for (int b : binaries) {
        double v = std::round(relaxed.values[b]);
        sub.SetBounds(b, v, v);
      }
      LpSolution pinned = SolveLp(sub);
      result.lp_iterations += pinned.iterations;
      if (pinned.status != LpStatus::kOptimal) {
        int first = relaxed.values[drift_var] < 0.5 ? 0 : 1;
        push_children(node, drift_var, first);
        continue;
      }
      relaxed = std::move(pinned);
    }
    for (int b : binaries) relaxed.values[b] = std::round(relaxed.values[b]);
    if (lazy) {
      std::optional<std::vector<int>> repair = lazy(relaxed.values);
      if (repair.has_value()) {
        for (int var : *repair) {
          if (!is_fixed(node, var)) {
            int current = relaxed.values[var] < 0.5 ? 0 : 1;
            push_children(node, var, 1 - current);
            break;
          }
        }
        continue;
      }
    }
    double value = 0.0;
    for (int j = 0; j < lp.num_variables(); ++j) {
      value += lp.cost()[j] * relaxed.values[j];
    }
    if (integral_objective) value = std::round(value);
    if (!result.has_solution || value < result.objective) {
      result.has_solution = true;
      result.objective = value;
      result.values = std::move(relaxed.values);
    }
  }

  if (hit_limit) {
    result.status = MilpStatus::kNodeLimit;
  } else {
    result.status =
        result.has_solution ? MilpStatus::kOptimal : MilpStatus::kInfeasible;
  }
  return result;
}

}  // namespace gridcosim
