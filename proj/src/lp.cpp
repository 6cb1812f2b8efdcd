#include "quantsched/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quantsched/error.hpp"

namespace quantsched {

namespace {

enum class State : unsigned char { kBasic, kAtLower, kAtUpper };

// Original variable j equals offset + sum(sign * column value) over its pieces.
struct Piece {
  int col;
  double sign;
};
struct VarMap {
  double offset = 0.0;
  std::vector<Piece> pieces;
};

enum class PhaseResult { kOptimal, kUnbounded };

// Bounded-variable simplex on a dense tableau. Every column has lower
// bound 0 and upper bound `upper[j]` (possibly infinite); nonbasic columns
// sit at one of their bounds and `beta` holds the basic values.
class Tableau {
 public:
  Tableau(int rows, int cols, const LpOptions& options)
      : m_(rows),
        n_(cols),
        opt_(options),
        a_(static_cast<size_t>(rows) * cols, 0.0),
        beta_(rows, 0.0),
        upper_(cols, kInfinity),
        cost_(cols, 0.0),
        d_(cols, 0.0),
        basis_(rows, -1),
        state_(cols, State::kAtLower),
        enterable_(cols, true) {}

  double& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

  int rows() const { return m_; }
  int cols() const { return n_; }
  std::vector<double>& beta() { return beta_; }
  std::vector<double>& upper() { return upper_; }
  std::vector<double>& cost() { return cost_; }
  std::vector<bool>& enterable() { return enterable_; }
  const std::vector<int>& basis() const { return basis_; }
  std::int64_t iterations() const { return iterations_; }

  void set_basic(int row, int col) {
    basis_[row] = col;
    state_[col] = State::kBasic;
  }

  double value(int col) const {
    switch (state_[col]) {
      case State::kAtLower: return 0.0;
      case State::kAtUpper: return upper_[col];
      case State::kBasic: break;
    }
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] == col) return beta_[i];
    }
    return 0.0;
  }

  double objective() const {
    double z = 0.0;
    for (int i = 0; i < m_; ++i) z += cost_[basis_[i]] * beta_[i];
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == State::kAtUpper) z += cost_[j] * upper_[j];
    }
    return z;
  }

  void price() {
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == State::kBasic) {
        d_[j] = 0.0;
        continue;
      }
      double v = cost_[j];
      for (int i = 0; i < m_; ++i) v -= cost_[basis_[i]] * at(i, j);
      d_[j] = v;
    }
  }

  PhaseResult run(std::int64_t iteration_cap) {
    price();
    double best = objective();
    std::int64_t stalled = 0;
    bool bland = false;
    const std::int64_t stall_limit = 3 * static_cast<std::int64_t>(m_ + n_);
    while (true) {
      const int q = choose_entering(bland);
      if (q < 0) return PhaseResult::kOptimal;
      if (++iterations_ > iteration_cap) {
        throw SolverError("simplex iteration cap exceeded (" + std::to_string(iteration_cap) + ")");
      }
      if (!step(q, bland)) return PhaseResult::kUnbounded;
      const double z = objective();
      if (z < best - 1e-12 * (1.0 + std::abs(best))) {
        best = z;
        stalled = 0;
        bland = false;
      } else if (++stalled >= stall_limit) {
        bland = true;
      }
    }
  }

  // Pivots basic artificial columns (flagged by `artificial`) out of the
  // basis where a structural column can replace them; the rest sit on
  // redundant rows and are fixed at zero.
  void drive_out(const std::vector<bool>& artificial) {
    for (int r = 0; r < m_; ++r) {
      if (!artificial[basis_[r]]) continue;
      int best = -1;
      double best_mag = opt_.pivot_tolerance;
      for (int j = 0; j < n_; ++j) {
        if (artificial[j] || state_[j] == State::kBasic) continue;
        const double mag = std::abs(at(r, j));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best < 0) continue;
      const int leaving = basis_[r];
      const double entering_value = state_[best] == State::kAtUpper ? upper_[best] : 0.0;
      // The artificial is (numerically) zero, so this pivot is degenerate.
      pivot(r, best);
      state_[leaving] = State::kAtLower;
      set_basic(r, best);
      beta_[r] = entering_value;
    }
    for (int j = 0; j < n_; ++j) {
      if (!artificial[j]) continue;
      enterable_[j] = false;
      upper_[j] = 0.0;
    }
  }

 private:
  int choose_entering(bool bland) const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (!enterable_[j] || state_[j] == State::kBasic) continue;
      double score = 0.0;
      if (state_[j] == State::kAtLower && upper_[j] > 0.0 && d_[j] < -opt_.optimality_tolerance) {
        score = -d_[j];
      } else if (state_[j] == State::kAtUpper && d_[j] > opt_.optimality_tolerance) {
        score = d_[j];
      } else {
        continue;
      }
      if (bland) return j;
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  // One simplex step with entering column q; false when unbounded.
  bool step(int q, bool bland) {
    const double dir = state_[q] == State::kAtLower ? 1.0 : -1.0;
    double theta = upper_[q];  // bound flip distance
    int leave_row = -1;
    bool leave_at_upper = false;
    double leave_pivot = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double alpha = at(i, q);
      if (std::abs(alpha) <= opt_.pivot_tolerance) continue;
      const double rate = -dir * alpha;  // d(beta_i)/d(theta)
      double limit;
      bool to_upper;
      if (rate < 0.0) {
        limit = std::max(beta_[i], 0.0) / -rate;
        to_upper = false;
      } else {
        const double ub = upper_[basis_[i]];
        if (!std::isfinite(ub)) continue;
        limit = std::max(ub - beta_[i], 0.0) / rate;
        to_upper = true;
      }
      bool better;
      if (leave_row < 0) {
        better = limit < theta;  // ties with the bound flip keep the flip
      } else if (limit < theta - 1e-12) {
        better = true;
      } else if (limit <= theta + 1e-12) {
        better = bland ? basis_[i] < basis_[leave_row]
                       : std::abs(alpha) > std::abs(leave_pivot) ||
                             (std::abs(alpha) == std::abs(leave_pivot) &&
                              basis_[i] < basis_[leave_row]);
      } else {
        better = false;
      }
      if (better) {
        theta = limit;
        leave_row = i;
        leave_at_upper = to_upper;
        leave_pivot = alpha;
      }
    }
    if (leave_row < 0 && !std::isfinite(theta)) return false;

    for (int i = 0; i < m_; ++i) beta_[i] -= dir * theta * at(i, q);
    if (leave_row < 0) {
      state_[q] = state_[q] == State::kAtLower ? State::kAtUpper : State::kAtLower;
      return true;
    }
    const double entering_value = state_[q] == State::kAtLower ? theta : upper_[q] - theta;
    const int leaving = basis_[leave_row];
    pivot(leave_row, q);
    state_[leaving] = leave_at_upper ? State::kAtUpper : State::kAtLower;
    set_basic(leave_row, q);
    beta_[leave_row] = entering_value;
    return true;
  }

  void pivot(int r, int q) {
    const double p = at(r, q);
    double* row_r = &a_[static_cast<size_t>(r) * n_];
    for (int j = 0; j < n_; ++j) row_r[j] /= p;
    row_r[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row_i = &a_[static_cast<size_t>(i) * n_];
      const double f = row_i[q];
      if (f == 0.0) continue;
      for (int j = 0; j < n_; ++j) row_i[j] -= f * row_r[j];
      row_i[q] = 0.0;
    }
    const double fd = d_[q];
    if (fd != 0.0) {
      for (int j = 0; j < n_; ++j) d_[j] -= fd * row_r[j];
    }
    d_[q] = 0.0;
  }

  int m_;
  int n_;
  LpOptions opt_;
  std::vector<double> a_;
  std::vector<double> beta_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> d_;
  std::vector<int> basis_;
  std::vector<State> state_;
  std::vector<bool> enterable_;
  std::int64_t iterations_ = 0;
};

void check_input(const LinearProgram& lp) {
  const int n = lp.num_vars();
  if (static_cast<int>(lp.lower.size()) != n || static_cast<int>(lp.upper.size()) != n) {
    throw InvalidArgument("solve_lp: bound vectors do not match the objective length");
  }
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lp.objective[j]) || std::isnan(lp.lower[j]) || std::isnan(lp.upper[j]) ||
        !std::isfinite(lp.objective[j])) {
      throw InvalidArgument("solve_lp: NaN or infinite data in variable " + std::to_string(j));
    }
    if (lp.lower[j] == kInfinity || lp.upper[j] == -kInfinity) {
      throw InvalidArgument("solve_lp: variable " + std::to_string(j) + " has an empty domain");
    }
  }
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    const auto& row = lp.rows[r];
    if (!std::isfinite(row.rhs)) throw InvalidArgument("solve_lp: non-finite rhs in row " + std::to_string(r));
    for (const auto& term : row.terms) {
      if (term.var < 0 || term.var >= n) {
        throw InvalidArgument("solve_lp: row " + std::to_string(r) + " references variable " +
                              std::to_string(term.var) + " out of range");
      }
      if (!std::isfinite(term.coef)) {
        throw InvalidArgument("solve_lp: non-finite coefficient in row " + std::to_string(r));
      }
    }
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  check_input(lp);
  const int n = lp.num_vars();
  const int m = static_cast<int>(lp.rows.size());
  LpSolution result;

  for (int j = 0; j < n; ++j) {
    if (lp.lower[j] > lp.upper[j] + options.feasibility_tolerance) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
  }

  // Shift and split variables so every tableau column lives in [0, u].
  std::vector<VarMap> maps(n);
  std::vector<double> col_upper;
  std::vector<double> col_cost;
  int structural = 0;
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    if (std::isfinite(lo)) {
      maps[j] = {lo, {{structural++, 1.0}}};
      col_upper.push_back(std::max(hi - lo, 0.0));
      col_cost.push_back(lp.objective[j]);
    } else if (std::isfinite(hi)) {
      maps[j] = {hi, {{structural++, -1.0}}};
      col_upper.push_back(kInfinity);
      col_cost.push_back(-lp.objective[j]);
    } else {
      maps[j] = {0.0, {{structural, 1.0}, {structural + 1, -1.0}}};
      structural += 2;
      col_upper.insert(col_upper.end(), {kInfinity, kInfinity});
      col_cost.insert(col_cost.end(), {lp.objective[j], -lp.objective[j]});
    }
  }

  // Dense constraint rows over structural columns, with shifted right-hand sides.
  std::vector<std::vector<double>> dense(m, std::vector<double>(structural, 0.0));
  std::vector<double> rhs(m);
  int slacks = 0;
  for (int r = 0; r < m; ++r) {
    double b = lp.rows[r].rhs;
    for (const auto& term : lp.rows[r].terms) {
      b -= term.coef * maps[term.var].offset;
      for (const auto& piece : maps[term.var].pieces) dense[r][piece.col] += term.coef * piece.sign;
    }
    rhs[r] = b;
    if (lp.rows[r].relation != Relation::kEqual) ++slacks;
  }

  // Artificial columns for rows whose slack cannot start basic.
  std::vector<int> slack_col(m, -1);
  std::vector<double> slack_sign(m, 0.0);
  std::vector<double> row_sign(m, 1.0);
  int next = structural;
  for (int r = 0; r < m; ++r) {
    if (lp.rows[r].relation == Relation::kEqual) continue;
    slack_col[r] = next++;
    slack_sign[r] = lp.rows[r].relation == Relation::kLessEqual ? 1.0 : -1.0;
  }
  std::vector<int> artificial_col(m, -1);
  for (int r = 0; r < m; ++r) {
    if (rhs[r] < 0.0) row_sign[r] = -1.0;
    const bool slack_basic = slack_col[r] >= 0 && slack_sign[r] * row_sign[r] > 0.0;
    if (!slack_basic) artificial_col[r] = next++;
  }
  const int total = next;

  Tableau tab(m, total, options);
  std::vector<bool> artificial(total, false);
  for (int j = 0; j < structural; ++j) tab.upper()[j] = col_upper[j];
  double rhs_scale = 1.0;
  for (int r = 0; r < m; ++r) {
    const double s = row_sign[r];
    for (int j = 0; j < structural; ++j) tab.at(r, j) = s * dense[r][j];
    if (slack_col[r] >= 0) tab.at(r, slack_col[r]) = s * slack_sign[r];
    tab.beta()[r] = s * rhs[r];
    rhs_scale = std::max(rhs_scale, std::abs(rhs[r]));
    if (artificial_col[r] >= 0) {
      tab.at(r, artificial_col[r]) = 1.0;
      artificial[artificial_col[r]] = true;
      tab.set_basic(r, artificial_col[r]);
    } else {
      tab.set_basic(r, slack_col[r]);
    }
  }

  const std::int64_t cap = 50 * static_cast<std::int64_t>(m + total) + 10000;
  bool any_artificial = false;
  for (int j = 0; j < total; ++j) {
    if (artificial[j]) {
      tab.cost()[j] = 1.0;
      any_artificial = true;
    }
  }
  if (any_artificial) {
    tab.run(cap);  // phase one is bounded below by zero
    if (tab.objective() > options.feasibility_tolerance * rhs_scale) {
      result.status = LpStatus::kInfeasible;
      result.iterations = tab.iterations();
      return result;
    }
    tab.drive_out(artificial);
  }

  for (int j = 0; j < total; ++j) tab.cost()[j] = j < structural ? col_cost[j] : 0.0;
  const PhaseResult phase2 = tab.run(cap);
  result.iterations = tab.iterations();
  if (phase2 == PhaseResult::kUnbounded) {
    result.status = LpStatus::kUnbounded;
    return result;
  }

  result.status = LpStatus::kOptimal;
  result.values.assign(n, 0.0);
  std::vector<double> col_value(structural);
  for (int j = 0; j < structural; ++j) col_value[j] = tab.value(j);
  for (int j = 0; j < n; ++j) {
    double v = maps[j].offset;
    for (const auto& piece : maps[j].pieces) v += piece.sign * col_value[piece.col];
    // Snap onto bounds violated by round-off only.
    if (std::isfinite(lp.lower[j]) && v < lp.lower[j]) v = lp.lower[j];
    if (std::isfinite(lp.upper[j]) && v > lp.upper[j]) v = lp.upper[j];
    result.values[j] = v;
  }
  double z = 0.0;
  for (int j = 0; j < n; ++j) z += lp.objective[j] * result.values[j];
  result.objective = z;
  return result;
}

}  // namespace quantsched
