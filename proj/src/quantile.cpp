#include "quantsched/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "quantsched/error.hpp"

namespace quantsched {

double q_k(std::span<const double> values, int k) {
  const int n = static_cast<int>(values.size());
  if (n == 0) throw InvalidArgument("q_k: empty population");
  if (k < 1 || k > n) {
    throw InvalidArgument("q_k: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return sorted[k - 1];
}

int tau_to_k(int n, double tau) {
  if (n < 1) throw InvalidArgument("tau_to_k: population size must be >= 1");
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw InvalidArgument("tau_to_k: tau must lie in (0, 1]");
  }
  // tau * n can land a hair above an integer (0.7 * 10 = 7.000000000000001);
  // snap before taking the ceiling so the quantile follows the decimal tau.
  const double scaled = tau * n;
  const double nearest = std::round(scaled);
  const double rank_real =
      std::abs(scaled - nearest) <= 1e-9 * n ? nearest : std::ceil(scaled);
  const int rank = std::clamp(static_cast<int>(rank_real), 1, n);
  return n - rank + 1;
}

}  // namespace quantsched
