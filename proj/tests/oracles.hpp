#pragma once

// Brute-force reference implementations used only by the tests. None of them
// share code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "quantsched/instance.hpp"
#include "quantsched/lp.hpp"
#include "quantsched/mip.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Visits every subset of {0..n-1} of exactly `size` elements.
inline void for_each_subset(int n, int size, const std::function<void(const std::vector<int>&)>& fn) {
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != size) continue;
    std::vector<int> s;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(i);
    }
    fn(s);
  }
}

// min over |w| = n-k+1 of max(w).
inline double quantile_min_max(const std::vector<double>& v, int k) {
  const int n = static_cast<int>(v.size());
  double best = kInf;
  for_each_subset(n, n - k + 1, [&](const std::vector<int>& s) {
    double mx = -kInf;
    for (int i : s) mx = std::max(mx, v[i]);
    best = std::min(best, mx);
  });
  return best;
}

// max over |w| = k of min(w).
inline double quantile_max_min(const std::vector<double>& v, int k) {
  const int n = static_cast<int>(v.size());
  double best = -kInf;
  for_each_subset(n, k, [&](const std::vector<int>& s) {
    double mn = kInf;
    for (int i : s) mn = std::min(mn, v[i]);
    best = std::max(best, mn);
  });
  return best;
}

// Solves the square system M z = b by Gaussian elimination with partial
// pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    }
    if (std::abs(m[p][c]) < 1e-10) return std::nullopt;
    std::swap(m[p], m[c]);
    std::swap(b[p], b[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      if (f == 0.0) continue;
      for (int j = c; j < n; ++j) m[r][j] -= f * m[c][j];
      b[r] -= f * b[c];
    }
  }
  for (int i = 0; i < n; ++i) b[i] /= m[i][i];
  return b;
}

struct VertexResult {
  bool feasible = false;
  double objective = kInf;
  std::vector<double> point;
};

// Minimum of the objective over all basic feasible points: every choice of
// active rows plus variables fixed at one of their finite bounds that pins
// down a unique point. Exact for LPs with a bounded feasible region.
inline VertexResult lp_vertex_enumeration(const quantsched::LinearProgram& lp) {
  using quantsched::Relation;
  const int n = lp.num_vars();
  const int m = static_cast<int>(lp.rows.size());
  std::vector<std::vector<double>> dense(m, std::vector<double>(n, 0.0));
  for (int r = 0; r < m; ++r) {
    for (const auto& t : lp.rows[r].terms) dense[r][t.var] += t.coef;
  }
  auto feasible = [&](const std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      if (x[j] < lp.lower[j] - 1e-9 || x[j] > lp.upper[j] + 1e-9) return false;
    }
    for (int r = 0; r < m; ++r) {
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) lhs += dense[r][j] * x[j];
      const double tol = 1e-9 * (1.0 + std::abs(lp.rows[r].rhs));
      switch (lp.rows[r].relation) {
        case Relation::kLessEqual: if (lhs > lp.rows[r].rhs + tol) return false; break;
        case Relation::kGreaterEqual: if (lhs < lp.rows[r].rhs - tol) return false; break;
        case Relation::kEqual: if (std::abs(lhs - lp.rows[r].rhs) > tol) return false; break;
      }
    }
    return true;
  };

  VertexResult best;
  for (std::uint32_t rmask = 0; rmask < (1u << m); ++rmask) {
    // Equality rows need not be in the active set: redundant equalities can
    // outnumber the variables, and the feasibility check enforces them.
    const int active_rows = std::popcount(rmask);
    if (active_rows > n) continue;
    const int fixed_count = n - active_rows;
    // Choose which variables sit on a bound, and which bound.
    for (std::uint32_t vmask = 0; vmask < (1u << n); ++vmask) {
      if (std::popcount(vmask) != fixed_count) continue;
      std::vector<int> fixed;
      std::vector<int> free_vars;
      for (int j = 0; j < n; ++j) ((vmask & (1u << j)) ? fixed : free_vars).push_back(j);
      for (std::uint32_t side = 0; side < (1u << fixed_count); ++side) {
        std::vector<double> x(n, 0.0);
        bool ok = true;
        for (int f = 0; f < fixed_count; ++f) {
          const int j = fixed[f];
          const double v = (side & (1u << f)) ? lp.upper[j] : lp.lower[j];
          if (!std::isfinite(v)) ok = false;
          x[j] = v;
        }
        if (!ok) continue;
        std::vector<std::vector<double>> sys;
        std::vector<double> rhs;
        for (int r = 0; r < m; ++r) {
          if (!(rmask & (1u << r))) continue;
          std::vector<double> row;
          double b = lp.rows[r].rhs;
          for (int j : fixed) b -= dense[r][j] * x[j];
          for (int j : free_vars) row.push_back(dense[r][j]);
          sys.push_back(std::move(row));
          rhs.push_back(b);
        }
        if (!free_vars.empty()) {
          auto z = solve_square(sys, rhs);
          if (!z) continue;
          for (size_t f = 0; f < free_vars.size(); ++f) x[free_vars[f]] = (*z)[f];
        }
        if (!feasible(x)) continue;
        double obj = 0.0;
        for (int j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
        if (!best.feasible || obj < best.objective) {
          best.feasible = true;
          best.objective = obj;
          best.point = x;
        }
      }
    }
  }
  return best;
}

// Every start vector (instance order) over admissible starts.
inline void for_each_schedule(const quantsched::Instance& inst,
                              const std::function<void(const std::vector<int>&)>& fn) {
  const int n = static_cast<int>(inst.interventions.size());
  std::vector<std::vector<int>> options(n);
  for (int i = 0; i < n; ++i) options[i] = inst.admissible_starts(i);
  std::vector<size_t> pos(n, 0);
  std::vector<int> starts(n);
  while (true) {
    for (int i = 0; i < n; ++i) starts[i] = options[i][pos[i]];
    fn(starts);
    int i = 0;
    while (i < n && ++pos[i] == options[i].size()) pos[i++] = 0;
    if (i == n) return;
  }
}

inline quantsched::Schedule to_schedule(const quantsched::Instance& inst, const std::vector<int>& starts) {
  quantsched::Schedule s;
  for (size_t i = 0; i < starts.size(); ++i) s.starts[inst.interventions[i].name] = starts[i];
  return s;
}

// Directly recomputed resource feasibility, independent of check_feasibility.
inline bool schedule_feasible(const quantsched::Instance& inst, const std::vector<int>& starts) {
  const int n = static_cast<int>(inst.interventions.size());
  auto active = [&](int i, int t) {
    const int d = inst.interventions[i].duration.at(starts[i]);
    return starts[i] <= t && t < starts[i] + d;
  };
  for (const auto& res : inst.resources) {
    for (int t = 1; t <= inst.horizon; ++t) {
      double usage = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto& wl = inst.interventions[i].workload;
        if (!wl.count(res.name) || !wl.at(res.name).count(t)) continue;
        const auto& by_start = wl.at(res.name).at(t);
        if (by_start.count(starts[i])) usage += by_start.at(starts[i]);
      }
      if (usage > res.upper[t - 1] + 1e-9 || usage < res.lower[t - 1] - 1e-9) return false;
    }
  }
  for (const auto& ex : inst.exclusions) {
    const int a = *inst.intervention_index(ex.first);
    const int b = *inst.intervention_index(ex.second);
    for (int t : ex.timesteps) {
      if (active(a, t) && active(b, t)) return false;
    }
  }
  return true;
}

// Blended objective recomputed from sorted scenario risks, using the
// ceil(tau * n)-th smallest element as the quantile.
inline double blended_objective(const quantsched::Instance& inst, const std::vector<int>& starts) {
  double sum_mean = 0.0;
  double sum_excess = 0.0;
  for (int t = 1; t <= inst.horizon; ++t) {
    const int ns = inst.scenario_count(t);
    std::vector<double> risk(ns, 0.0);
    for (size_t i = 0; i < starts.size(); ++i) {
      const auto& r = inst.interventions[i].risk;
      if (!r.count(t) || !r.at(t).count(starts[i])) continue;
      const auto& v = r.at(t).at(starts[i]);
      for (int s = 0; s < ns; ++s) risk[s] += v[s];
    }
    double mean = 0.0;
    for (double v : risk) mean += v;
    mean /= ns;
    std::vector<double> sorted = risk;
    std::sort(sorted.begin(), sorted.end());
    int rank = static_cast<int>(std::ceil(inst.tau * ns - 1e-9));
    rank = std::clamp(rank, 1, ns);
    const double q = sorted[rank - 1];
    sum_mean += mean;
    sum_excess += std::max(q - mean, 0.0);
  }
  return inst.alpha * sum_mean / inst.horizon + (1.0 - inst.alpha) * sum_excess / inst.horizon;
}

struct EnumerationResult {
  bool feasible = false;
  double best = kInf;
  std::vector<int> best_starts;
  long feasible_count = 0;
};

inline EnumerationResult enumerate_optimum(const quantsched::Instance& inst) {
  EnumerationResult out;
  for_each_schedule(inst, [&](const std::vector<int>& starts) {
    if (!schedule_feasible(inst, starts)) return;
    ++out.feasible_count;
    const double v = blended_objective(inst, starts);
    if (!out.feasible || v < out.best) {
      out.feasible = true;
      out.best = v;
      out.best_starts = starts;
    }
  });
  return out;
}

// k-th largest element by sorting a copy.
inline double kth_largest(std::vector<double> v, int k) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v[k - 1];
}

// (sum_{i in W} x_i - k + 1) / (|W| - k + 1).
inline double symmetric_bound_direct(const std::vector<double>& x, int k, const std::vector<int>& w) {
  double sum = 0.0;
  for (int i : w) sum += x[i];
  return (sum - k + 1) / static_cast<double>(w.size() - k + 1);
}

inline double best_symmetric_exhaustive(const std::vector<double>& x, int k) {
  const int n = static_cast<int>(x.size());
  double best = -kInf;
  for (int size = k; size <= n; ++size) {
    for_each_subset(n, size, [&](const std::vector<int>& w) { best = std::max(best, symmetric_bound_direct(x, k, w)); });
  }
  return best;
}

// L + (U - L) / (|W| - k + 1) * (sum_{i in W} (x_i - L) / (max(U, u_i) - L) - k + 1)
// with L the k-th largest lower bound.
inline double asymmetric_bound_direct(const std::vector<double>& x, int k, const std::vector<int>& w, double u,
                                      const std::vector<double>& lower, const std::vector<double>& upper) {
  const double floor = kth_largest(lower, k);
  double sum = 0.0;
  for (int i : w) sum += (x[i] - floor) / (std::max(u, upper[i]) - floor);
  return floor + (u - floor) / static_cast<double>(w.size() - k + 1) * (sum - k + 1);
}

// Maximum over every W with |W| >= k and every threshold U in {u_i > L};
// nullopt when no upper bound exceeds L.
inline std::optional<double> best_asymmetric_exhaustive(const std::vector<double>& x, int k,
                                                        const std::vector<double>& lower,
                                                        const std::vector<double>& upper) {
  const int n = static_cast<int>(x.size());
  const double floor = kth_largest(lower, k);
  std::optional<double> best;
  for (double u : upper) {
    if (!(u > floor)) continue;
    for (int size = k; size <= n; ++size) {
      for_each_subset(n, size, [&](const std::vector<int>& w) {
        const double b = asymmetric_bound_direct(x, k, w, u, lower, upper);
        if (!best || b > *best) best = b;
      });
    }
  }
  return best;
}

// Minimum of y under the indicator semantics of a quantile gadget whose
// bodies read y - expression >= 0 and whose other variables are fixed at
// their lower bounds: every guard pattern satisfying the non-y rows is tried.
inline double indicator_minimum(const quantsched::Model& m, int y) {
  const auto& inds = m.indicators();
  const int g = static_cast<int>(inds.size());
  double best = kInf;
  for (std::uint32_t mask = 0; mask < (1u << g); ++mask) {
    std::vector<double> values(m.num_vars(), 0.0);
    for (int j = 0; j < m.num_vars(); ++j) values[j] = m.variables()[j].lower;
    for (int i = 0; i < g; ++i) values[inds[i].guard] = (mask >> i) & 1u;
    bool ok = true;
    for (const auto& c : m.constraints()) {
      if (!c.terms.empty() && c.terms[0].var != y && c.violation(values) > 1e-9) ok = false;
    }
    if (!ok) continue;
    double yv = 0.0;
    for (const auto& ind : inds) {
      if (values[ind.guard] != ind.active_value) continue;
      values[y] = 0.0;
      yv = std::max(yv, -ind.body.activity(values));
    }
    best = std::min(best, yv);
  }
  return best;
}

}  // namespace oracle
