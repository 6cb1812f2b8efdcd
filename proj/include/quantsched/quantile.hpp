#pragma once

#include <span>

namespace quantsched {

// k-th largest element of `values` (1-indexed): k = 1 is the maximum and
// k = values.size() the minimum. Comparisons are exact.
// Throws InvalidArgument when values is empty or k is outside [1, n].
double q_k(std::span<const double> values, int k);

// Order-statistic index k such that q_k(values, k) is the tau-quantile of a
// population of size n, i.e. its ceil(tau * n)-th smallest element.
// Requires n >= 1 and 0 < tau <= 1.
int tau_to_k(int n, double tau);

}  // namespace quantsched
