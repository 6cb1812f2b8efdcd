#include "quantsched/subset_cuts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>

#include "quantsched/error.hpp"
#include "quantsched/quantile.hpp"

namespace quantsched {

namespace {

void check_k(const Matrix& a, int k) {
  if (a.rows < 1 || k < 1 || k > a.rows) {
    throw InvalidArgument("subset cut: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(a.rows) + "]");
  }
}

void check_nonnegative(const Matrix& a) {
  for (double v : a.values) {
    if (!(v >= 0.0)) throw InvalidArgument("subset cut: scenario matrix has a negative entry");
  }
}

void check_binary(const Matrix& a, std::span<const double> x) {
  if (static_cast<int>(x.size()) != a.cols) throw InvalidArgument("subset cut: incumbent size");
  for (double v : x) {
    if (v != 0.0 && v != 1.0) throw InvalidArgument("subset cut: incumbent must be binary");
  }
}

void check_scenarios(const Matrix& a, int k, const std::vector<int>& scenarios) {
  if (static_cast<int>(scenarios.size()) < k) {
    throw InvalidArgument("subset cut: P has fewer than k scenarios");
  }
  for (size_t i = 0; i < scenarios.size(); ++i) {
    if (scenarios[i] < 0 || scenarios[i] >= a.rows || (i > 0 && scenarios[i] <= scenarios[i - 1])) {
      throw InvalidArgument("subset cut: P must hold distinct valid scenario indices");
    }
  }
}

double column_min(const Matrix& a, const std::vector<int>& rows, int col) {
  double v = std::numeric_limits<double>::infinity();
  for (int r : rows) v = std::min(v, a.at(r, col));
  return v;
}

double column_max(const Matrix& a, const std::vector<int>& rows, int col) {
  double v = -std::numeric_limits<double>::infinity();
  for (int r : rows) v = std::max(v, a.at(r, col));
  return v;
}

double subset_value(const Matrix& a, const std::vector<int>& rows, std::span<const double> x) {
  double v = 0.0;
  for (int j = 0; j < a.cols; ++j) v += column_min(a, rows, j) * x[j];
  return v;
}

// Advances `comb` (ascending, size k, values < n) to the next combination in
// lexicographic order; false after the last one.
bool next_combination(std::vector<int>& comb, int n) {
  const int k = static_cast<int>(comb.size());
  int i = k - 1;
  while (i >= 0 && comb[i] == n - k + i) --i;
  if (i < 0) return false;
  ++comb[i];
  for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  return true;
}

std::vector<int> first_combination(int k) {
  std::vector<int> comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  return comb;
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

std::string_view family_name(SubsetFamily family) {
  switch (family) {
    case SubsetFamily::kSimple: return "simple";
    case SubsetFamily::kSubset: return "subset";
    case SubsetFamily::kGeneratedSubset: return "generated-subset";
    case SubsetFamily::kGeneralSubset: return "general-subset";
  }
  return "unknown";
}

double SubsetCut::value(std::span<const double> x) const {
  double v = constant;
  for (size_t j = 0; j < coefficients.size(); ++j) v += coefficients[j] * x[j];
  return v;
}

SubsetCut simple_generated_cut(const Matrix& a, int k, std::span<const double> incumbent) {
  check_k(a, k);
  check_nonnegative(a);
  check_binary(a, incumbent);
  const std::vector<double> xt(incumbent.begin(), incumbent.end());
  const double q = q_k(a.multiply(xt), k);
  SubsetCut cut;
  cut.family = SubsetFamily::kSimple;
  cut.coefficients.assign(a.cols, 0.0);
  double support = 0.0;
  for (int j = 0; j < a.cols; ++j) {
    cut.coefficients[j] = q * xt[j];
    support += xt[j];
  }
  cut.constant = q * (1.0 - support);
  return cut;
}

SubsetCut subset_cut(const Matrix& a, int k, std::vector<int> scenarios) {
  check_k(a, k);
  std::sort(scenarios.begin(), scenarios.end());
  check_scenarios(a, k, scenarios);
  SubsetCut cut;
  cut.family = SubsetFamily::kSubset;
  cut.coefficients.resize(a.cols);
  for (int j = 0; j < a.cols; ++j) cut.coefficients[j] = column_min(a, scenarios, j);
  cut.scenarios = std::move(scenarios);
  return cut;
}

std::vector<int> top_k_rows(std::span<const double> values, int k) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return values[x] > values[y]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<SubsetCut> per_column_subsets(const Matrix& a, int k) {
  check_k(a, k);
  check_nonnegative(a);
  std::vector<SubsetCut> cuts;
  std::set<std::vector<int>> seen;
  for (int j = 0; j < a.cols; ++j) {
    auto rows = top_k_rows(a.column(j), k);
    if (!seen.insert(rows).second) continue;
    cuts.push_back(subset_cut(a, k, std::move(rows)));
  }
  return cuts;
}

SubsetCut generated_subset_cut(const Matrix& a, int k, std::span<const double> incumbent) {
  check_k(a, k);
  check_nonnegative(a);
  check_binary(a, incumbent);
  const std::vector<double> xt(incumbent.begin(), incumbent.end());
  const auto risks = a.multiply(xt);
  const double q = q_k(risks, k);
  SubsetCut cut;
  cut.family = SubsetFamily::kGeneratedSubset;
  cut.scenarios = top_k_rows(risks, k);
  cut.coefficients.resize(a.cols);
  cut.constant = q;
  for (int j = 0; j < a.cols; ++j) {
    if (xt[j] == 1.0) {
      cut.coefficients[j] = column_max(a, cut.scenarios, j);
      cut.constant -= cut.coefficients[j];
    } else {
      cut.coefficients[j] = column_min(a, cut.scenarios, j);
    }
  }
  return cut;
}

SubsetCut general_subset_cut(const Matrix& a, int k, std::vector<int> scenarios,
                             std::vector<double> beta, const BoxBounds& box) {
  check_k(a, k);
  std::sort(scenarios.begin(), scenarios.end());
  check_scenarios(a, k, scenarios);
  if (static_cast<int>(beta.size()) != a.cols || box.size() != a.cols ||
      static_cast<int>(box.upper.size()) != a.cols) {
    throw InvalidArgument("general subset cut: beta and box must have one entry per column");
  }
  for (int j = 0; j < a.cols; ++j) {
    if (!(beta[j] >= 0.0 && beta[j] <= 1.0)) {
      throw InvalidArgument("general subset cut: beta must lie in [0, 1]");
    }
    if (!(box.lower[j] <= box.upper[j])) {
      throw InvalidArgument("general subset cut: box requires l <= u");
    }
  }

  SubsetCut cut;
  cut.family = SubsetFamily::kGeneralSubset;
  cut.coefficients.resize(a.cols);
  double lower_part = std::numeric_limits<double>::infinity();
  double upper_part = std::numeric_limits<double>::infinity();
  for (int i : scenarios) {
    double lo = 0.0;
    double hi = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      lo += (1.0 - beta[j]) * a.at(i, j) * box.lower[j];
      hi += beta[j] * a.at(i, j) * box.upper[j];
    }
    lower_part = std::min(lower_part, lo);
    upper_part = std::min(upper_part, hi);
  }
  double shift = 0.0;
  for (int j = 0; j < a.cols; ++j) {
    const double mn = (1.0 - beta[j]) * column_min(a, scenarios, j);
    const double mx = beta[j] * column_max(a, scenarios, j);
    cut.coefficients[j] = mn + mx;
    shift += mn * box.lower[j] + mx * box.upper[j];
  }
  cut.constant = lower_part + upper_part - shift;
  cut.scenarios = std::move(scenarios);
  cut.beta = std::move(beta);
  cut.box = box;
  return cut;
}

SubsetCut separate_subset_exhaustive(const Matrix& a, int k, std::span<const double> point) {
  check_k(a, k);
  if (a.rows > 20) throw InvalidArgument("separate_subset_exhaustive: at most 20 scenarios");
  if (static_cast<int>(point.size()) != a.cols) throw InvalidArgument("separate: point size");
  auto comb = first_combination(k);
  std::vector<int> best = comb;
  double best_value = -std::numeric_limits<double>::infinity();
  do {
    const double v = subset_value(a, comb, point);
    if (v > best_value) {
      best_value = v;
      best = comb;
    }
  } while (next_combination(comb, a.rows));
  return subset_cut(a, k, best);
}

SubsetCut separate_subset_bestfirst(const Matrix& a, int k, std::span<const double> point,
                                    int budget, std::uint64_t seed) {
  check_k(a, k);
  if (budget < 1) throw InvalidArgument("separate_subset_bestfirst: budget must be >= 1");
  if (static_cast<int>(point.size()) != a.cols) throw InvalidArgument("separate: point size");

  struct Entry {
    double value;
    std::vector<int> rows;
    bool operator<(const Entry& o) const {
      if (value != o.value) return value < o.value;
      return rows > o.rows;  // lexicographically smaller subsets first
    }
  };
  std::priority_queue<Entry> frontier;
  std::set<std::vector<int>> visited;
  Entry best{-std::numeric_limits<double>::infinity(), {}};
  auto consider = [&](std::vector<int> rows) {
    if (!visited.insert(rows).second) return;
    Entry e{subset_value(a, rows, point), std::move(rows)};
    if (best.rows.empty() || best < e) best = e;
    frontier.push(std::move(e));
  };

  for (int j = 0; j < a.cols; ++j) consider(top_k_rows(a.column(j), k));
  if (a.cols == 0) consider(first_combination(k));

  std::mt19937_64 rng(seed);
  const double total_subsets = binomial(a.rows, k);
  for (int expanded = 1; expanded < budget; ++expanded) {
    if (frontier.empty()) {
      if (static_cast<double>(visited.size()) >= total_subsets) break;
      // Restart from an unseen random subset.
      std::vector<int> all(a.rows);
      std::iota(all.begin(), all.end(), 0);
      std::vector<int> rows;
      do {
        std::shuffle(all.begin(), all.end(), rng);
        rows.assign(all.begin(), all.begin() + k);
        std::sort(rows.begin(), rows.end());
      } while (visited.count(rows));
      consider(std::move(rows));
      continue;
    }
    const Entry node = frontier.top();
    frontier.pop();
    std::vector<bool> in(a.rows, false);
    for (int r : node.rows) in[r] = true;
    for (size_t pos = 0; pos < node.rows.size(); ++pos) {
      for (int r = 0; r < a.rows; ++r) {
        if (in[r]) continue;
        std::vector<int> next = node.rows;
        next[pos] = r;
        std::sort(next.begin(), next.end());
        consider(std::move(next));
      }
    }
  }
  return subset_cut(a, k, best.rows);
}

SubsetCut separate_general_exhaustive(const Matrix& a, int k, std::span<const double> point,
                                      std::uint64_t joint_limit) {
  check_k(a, k);
  if (static_cast<int>(point.size()) != a.cols) throw InvalidArgument("separate: point size");
  const int m = a.cols;
  const bool joint =
      m < 62 && binomial(a.rows, k) * std::ldexp(1.0, m) <= static_cast<double>(joint_limit);

  std::vector<double> rounded(m);
  for (int j = 0; j < m; ++j) rounded[j] = point[j] >= 0.5 ? 1.0 : 0.0;

  auto comb = first_combination(k);
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<int> best_rows = comb;
  std::vector<double> best_beta = rounded;

  std::vector<double> mn(m), mx(m), row_sum(k);
  std::vector<double> beta(m);
  do {
    for (int j = 0; j < m; ++j) {
      mn[j] = column_min(a, comb, j);
      mx[j] = column_max(a, comb, j);
    }
    // On the unit box the cut value at x is
    //   sum_j [(1-b_j) mn_j x_j + b_j mx_j (x_j - 1)] + min_{i in P} sum_j b_j a_ij.
    auto evaluate = [&](double linear) {
      return linear + *std::min_element(row_sum.begin(), row_sum.end());
    };
    double linear = 0.0;
    std::fill(row_sum.begin(), row_sum.end(), 0.0);
    if (!joint) {
      for (int j = 0; j < m; ++j) {
        beta[j] = rounded[j];
        linear += beta[j] == 1.0 ? mx[j] * (point[j] - 1.0) : mn[j] * point[j];
        if (beta[j] == 1.0) {
          for (int r = 0; r < k; ++r) row_sum[r] += a.at(comb[r], j);
        }
      }
      const double v = evaluate(linear);
      if (v > best_value) {
        best_value = v;
        best_rows = comb;
        best_beta = beta;
      }
      continue;
    }
    // Gray-code walk over beta in {0,1}^m.
    std::fill(beta.begin(), beta.end(), 0.0);
    for (int j = 0; j < m; ++j) linear += mn[j] * point[j];
    const std::uint64_t count = std::uint64_t{1} << m;
    for (std::uint64_t step = 0; step < count; ++step) {
      if (step > 0) {
        const int j = std::countr_zero(step);
        const double sign = beta[j] == 0.0 ? 1.0 : -1.0;
        beta[j] = 1.0 - beta[j];
        linear += sign * (mx[j] * (point[j] - 1.0) - mn[j] * point[j]);
        for (int r = 0; r < k; ++r) row_sum[r] += sign * a.at(comb[r], j);
      }
      const double v = evaluate(linear);
      if (v > best_value) {
        best_value = v;
        best_rows = comb;
        best_beta = beta;
      }
    }
  } while (next_combination(comb, a.rows));
  return general_subset_cut(a, k, best_rows, best_beta, BoxBounds::unit(m));
}

}  // namespace quantsched
