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

#ifndef GRIDCOSIM_LINPROG_H_
#define GRIDCOSIM_LINPROG_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace gridcosim {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

struct LinearTerm {
  int var;
  double coef;
};

struct LinearRow {
  std::vector<LinearTerm> terms;
  RowSense sense;
  double rhs;
};

// minimize cost' x  subject to rows and lower <= x <= upper.
class LinearProgram {
 public:
  int AddVariable(double lower, double upper, double cost = 0.0);
  void AddRow(std::vector<LinearTerm> terms, RowSense sense, double rhs);
  void SetBounds(int var, double lower, double upper);

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<double>& cost() const { return cost_; }
  const std::vector<LinearRow>& rows() const { return rows_; }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<LinearRow> rows_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> values;
  int iterations = 0;
};

// Dense two-phase bounded-variable primal simplex. Pricing is Dantzig and
// falls back to Bland's rule during runs of degenerate pivots; the ratio test
// is Harris's two-pass variant and the tableau is periodically rebuilt from
// an LU factorization of the basis. The pivot sequence is deterministic.
LpSolution SolveLp(const LinearProgram& lp);

enum class MilpStatus { kOptimal, kInfeasible, kNodeLimit };

struct MilpOptions {
  std::int64_t max_nodes = 2'000'000;
  double integrality_tolerance = 1e-6;
  // Optional feasible point used as the first incumbent. Ignored when empty
  // or when it violates a bound, row or integrality requirement.
  std::vector<double> start;
};

struct MilpResult {
  MilpStatus status = MilpStatus::kInfeasible;
  bool has_solution = false;
  double objective = kInfinity;
  std::vector<double> values;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
};

// Called on LP solutions whose binaries are all integral. Return nullopt to
// accept the point, or a list of binaries whose branching may repair it
// (the search branches on the first one not yet fixed).
using LazyCheck =
    std::function<std::optional<std::vector<int>>(std::span<const double>)>;

// Depth-first branch-and-bound over the listed 0-1 variables: LP relaxation
// bound, most-fractional branching with ties to the lowest index, child
// nearest the relaxed value first.
MilpResult SolveBinaryMilp(const LinearProgram& lp,
                           std::span<const int> binaries,
                           const MilpOptions& options = {},
                           const LazyCheck& lazy = {});

}  // namespace gridcosim

#endif  // GRIDCOSIM_LINPROG_H_
