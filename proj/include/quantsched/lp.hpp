#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace quantsched {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct LinearTerm {
  int var = 0;
  double coef = 0.0;

  bool operator==(const LinearTerm&) const = default;
};

struct LpRow {
  std::vector<LinearTerm> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

// min objective . x  subject to rows and lower <= x <= upper (bounds may be
// infinite).
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> values;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

struct LpOptions {
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
};

// Dense bounded-variable two-phase primal simplex. Dantzig pricing, falling
// back to Bland's rule after 3 * (rows + columns) iterations without
// objective progress. Throws InvalidArgument on malformed input and
// SolverError if the iteration cap is exceeded.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace quantsched
