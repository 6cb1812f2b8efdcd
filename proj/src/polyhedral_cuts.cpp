#include "quantsched/polyhedral_cuts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "quantsched/error.hpp"
#include "quantsched/quantile.hpp"

namespace quantsched {

namespace {

void check_k(int n, int k) {
  if (n < 1 || k < 1 || k > n) {
    throw InvalidArgument("quantile cut: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
}

void check_support(int n, int k, std::span<const int> support) {
  if (static_cast<int>(support.size()) < k) {
    throw InvalidArgument("quantile cut: support has fewer than k elements");
  }
  std::vector<bool> seen(n, false);
  for (int i : support) {
    if (i < 0 || i >= n || seen[i]) throw InvalidArgument("quantile cut: bad support index");
    seen[i] = true;
  }
}

void check_box(const BoxBounds& bounds, int n) {
  if (bounds.size() != n || static_cast<int>(bounds.upper.size()) != n) {
    throw InvalidArgument("quantile cut: box dimension mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(bounds.lower[i]) || !std::isfinite(bounds.upper[i]) ||
        bounds.lower[i] > bounds.upper[i]) {
      throw InvalidArgument("quantile cut: box bounds must be finite with l <= u");
    }
  }
}

// Descending by key, ties by ascending index.
std::vector<int> order_desc(const std::vector<int>& items, const std::vector<double>& key) {
  std::vector<int> order = items;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return key[a] > key[b]; });
  return order;
}

struct PrefixChoice {
  int size = 0;
  double scaled = -std::numeric_limits<double>::infinity();
};

// Largest (sum of the w leading scores - k + 1) / (w - k + 1) over w >= k.
PrefixChoice best_prefix(const std::vector<double>& sorted_scores, int k) {
  const int n = static_cast<int>(sorted_scores.size());
  double sum = 0.0;
  for (int i = 0; i < k - 1; ++i) sum += sorted_scores[i];
  PrefixChoice best;
  for (int w = k; w <= n; ++w) {
    sum += sorted_scores[w - 1];
    const double scaled = (sum - k + 1) / (w - k + 1);
    if (scaled > best.scaled) best = {w, scaled};
  }
  return best;
}

}  // namespace

double QuantileCut::value(std::span<const double> x) const {
  double v = constant;
  for (int i : support) v += coefficients[i] * x[i];
  return v;
}

double symmetric_bound(std::span<const double> x, int k, std::span<const int> support) {
  const int n = static_cast<int>(x.size());
  check_k(n, k);
  check_support(n, k, support);
  double sum = 0.0;
  for (int i : support) sum += x[i];
  return (sum - k + 1) / (static_cast<double>(support.size()) - k + 1);
}

QuantileCut best_symmetric_cut(std::span<const double> x, int k) {
  const int n = static_cast<int>(x.size());
  check_k(n, k);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const std::vector<double> values(x.begin(), x.end());
  const auto order = order_desc(idx, values);
  std::vector<double> sorted(n);
  for (int i = 0; i < n; ++i) sorted[i] = values[order[i]];
  const PrefixChoice best = best_prefix(sorted, k);

  QuantileCut cut;
  cut.support.assign(order.begin(), order.begin() + best.size);
  std::sort(cut.support.begin(), cut.support.end());
  cut.threshold = 1.0;
  cut.floor = 0.0;
  const double denom = best.size - k + 1;
  cut.coefficients.assign(n, 0.0);
  for (int i : cut.support) cut.coefficients[i] = 1.0 / denom;
  cut.constant = -(k - 1) / denom;
  cut.bound = best.scaled;
  return cut;
}

std::optional<QuantileCut> separate_symmetric(std::span<const double> x, int k, double y,
                                              double tolerance) {
  QuantileCut cut = best_symmetric_cut(x, k);
  if (cut.bound > y + tolerance) return cut;
  return std::nullopt;
}

double asymmetric_bound(std::span<const double> x, int k, std::span<const int> support,
                        double threshold, const BoxBounds& bounds) {
  const int n = static_cast<int>(x.size());
  check_k(n, k);
  check_support(n, k, support);
  check_box(bounds, n);
  const double floor = q_k(bounds.lower, k);
  if (!(threshold > floor)) throw InvalidArgument("asymmetric bound: requires U > L");
  double sum = 0.0;
  for (int i : support) sum += (x[i] - floor) / (std::max(threshold, bounds.upper[i]) - floor);
  const double w = static_cast<double>(support.size());
  return floor + (threshold - floor) / (w - k + 1) * (sum - k + 1);
}

QuantileCut make_asymmetric_cut(std::span<const double> x, int k, std::vector<int> support,
                                double threshold, const BoxBounds& bounds) {
  const int n = static_cast<int>(x.size());
  check_k(n, k);
  check_support(n, k, support);
  check_box(bounds, n);
  QuantileCut cut;
  cut.floor = q_k(bounds.lower, k);
  if (!(threshold > cut.floor)) throw InvalidArgument("asymmetric cut: requires U > L");
  cut.threshold = threshold;
  std::sort(support.begin(), support.end());
  cut.support = std::move(support);
  const double L = cut.floor;
  const double scale = (threshold - L) / (static_cast<double>(cut.support.size()) - k + 1);
  cut.coefficients.assign(n, 0.0);
  double offset = 0.0;
  for (int i : cut.support) {
    const double width = std::max(threshold, bounds.upper[i]) - L;
    cut.coefficients[i] = scale / width;
    offset += L / width;
  }
  cut.constant = L - scale * (offset + k - 1);
  cut.bound = asymmetric_bound(x, k, cut.support, threshold, bounds);
  return cut;
}

std::optional<QuantileCut> best_asymmetric_cut(std::span<const double> x, int k,
                                               const BoxBounds& bounds) {
  const int n = static_cast<int>(x.size());
  check_k(n, k);
  check_box(bounds, n);
  const double L = q_k(bounds.lower, k);

  std::vector<double> thresholds;
  for (double u : bounds.upper) {
    if (u > L) thresholds.push_back(u);
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  if (thresholds.empty()) return std::nullopt;

  const std::vector<double> xs(x.begin(), x.end());
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> ratio(n, 0.0);
  std::vector<int> above;
  for (int i = 0; i < n; ++i) {
    if (bounds.upper[i] > L) {
      ratio[i] = (xs[i] - L) / (bounds.upper[i] - L);
      above.push_back(i);
    }
  }
  const auto by_value = order_desc(all, xs);
  const auto by_ratio = order_desc(above, ratio);

  double best_bound = -std::numeric_limits<double>::infinity();
  double best_threshold = thresholds.front();
  std::vector<int> best_support;

  std::vector<int> merged;
  std::vector<double> scores;
  for (double U : thresholds) {
    // Coordinates with u_i <= U are scaled by the common width U - L, so
    // their order is the value order; the rest keep their own ratio order.
    merged.clear();
    scores.clear();
    auto a = by_value.begin();
    auto b = by_ratio.begin();
    auto next_a = [&] {
      while (a != by_value.end() && bounds.upper[*a] > U) ++a;
    };
    auto next_b = [&] {
      while (b != by_ratio.end() && bounds.upper[*b] <= U) ++b;
    };
    next_a();
    next_b();
    while (a != by_value.end() || b != by_ratio.end()) {
      bool take_a;
      if (a == by_value.end()) {
        take_a = false;
      } else if (b == by_ratio.end()) {
        take_a = true;
      } else {
        const double sa = (xs[*a] - L) / (U - L);
        const double sb = ratio[*b];
        take_a = sa > sb || (sa == sb && *a < *b);
      }
      if (take_a) {
        merged.push_back(*a);
        scores.push_back((xs[*a] - L) / (U - L));
        ++a;
        next_a();
      } else {
        merged.push_back(*b);
        scores.push_back(ratio[*b]);
        ++b;
        next_b();
      }
    }
    const PrefixChoice choice = best_prefix(scores, k);
    const double bound = L + (U - L) * choice.scaled;
    if (bound > best_bound) {
      best_bound = bound;
      best_threshold = U;
      best_support.assign(merged.begin(), merged.begin() + choice.size);
    }
  }
  return make_asymmetric_cut(x, k, std::move(best_support), best_threshold, bounds);
}

std::optional<QuantileCut> separate_asymmetric(std::span<const double> x, int k, double y,
                                               const BoxBounds& bounds, double tolerance) {
  auto cut = best_asymmetric_cut(x, k, bounds);
  if (cut && cut->bound > y + tolerance) return cut;
  return std::nullopt;
}

QuantileCut brute_force_separation(std::span<const double> x, int k, const BoxBounds& bounds) {
  const int n = static_cast<int>(x.size());
  if (n > 15) throw InvalidArgument("brute_force_separation: n must be <= 15");
  check_k(n, k);
  check_box(bounds, n);
  const double L = q_k(bounds.lower, k);
  std::vector<double> thresholds;
  for (double u : bounds.upper) {
    if (u > L) thresholds.push_back(u);
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  if (thresholds.empty()) throw InvalidArgument("brute_force_separation: no threshold U > L");

  double best_bound = -std::numeric_limits<double>::infinity();
  std::vector<int> best_support;
  double best_threshold = thresholds.front();
  std::vector<int> support;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) < k) continue;
    support.clear();
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) support.push_back(i);
    }
    for (double U : thresholds) {
      const double bound = asymmetric_bound(x, k, support, U, bounds);
      if (bound > best_bound) {
        best_bound = bound;
        best_support = support;
        best_threshold = U;
      }
    }
  }
  return make_asymmetric_cut(x, k, std::move(best_support), best_threshold, bounds);
}

}  // namespace quantsched
