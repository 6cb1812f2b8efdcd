#pragma once

#include <optional>
#include <span>
#include <vector>

namespace quantsched {

// Minimum amount by which a cut must exceed the current y to be reported.
inline constexpr double kViolationTolerance = 1e-6;

// Componentwise box l <= x <= u.
struct BoxBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static BoxBounds unit(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}; }
  int size() const { return static_cast<int>(lower.size()); }
};

// Linear lower bound y >= sum_i coefficients[i] * x[i] + constant on the
// k-th largest element of x, supported on W.
struct QuantileCut {
  std::vector<int> support;          // W, ascending
  double threshold = 1.0;            // U
  double floor = 0.0;                // L = q_k(lower bounds)
  std::vector<double> coefficients;  // dense, zero outside W
  double constant = 0.0;
  double bound = 0.0;                // value of the right-hand side at the separated point

  double value(std::span<const double> x) const;
};

// (sum_{i in W} x_i - k + 1) / (|W| - k + 1) for x in [0,1]^n.
double symmetric_bound(std::span<const double> x, int k, std::span<const int> support);

// Best cut of the symmetric family at x: sort descending, then scan the
// prefix sizes w = k..n and keep the largest bound. O(n log n).
QuantileCut best_symmetric_cut(std::span<const double> x, int k);

// best_symmetric_cut, reported only when it exceeds y by more than `tolerance`.
std::optional<QuantileCut> separate_symmetric(std::span<const double> x, int k, double y,
                                              double tolerance = kViolationTolerance);

// L + (U-L)/(|W|-k+1) * (sum_{i in W} (x_i-L)/(max(U,u_i)-L) - k + 1), with
// L = q_k(lower, k). Requires U > L.
double asymmetric_bound(std::span<const double> x, int k, std::span<const int> support,
                        double threshold, const BoxBounds& bounds);

// Linearized asymmetric cut for a fixed (W, U); `bound` is evaluated at x.
QuantileCut make_asymmetric_cut(std::span<const double> x, int k, std::vector<int> support,
                                double threshold, const BoxBounds& bounds);

// Maximizes the asymmetric bound over all W (|W| >= k) and all thresholds
// U in {u_i : u_i > L}. Each U is handled with one merge of two presorted
// orders followed by a prefix scan, O(n^2) overall. Empty when no u_i > L.
std::optional<QuantileCut> best_asymmetric_cut(std::span<const double> x, int k,
                                               const BoxBounds& bounds);

std::optional<QuantileCut> separate_asymmetric(std::span<const double> x, int k, double y,
                                               const BoxBounds& bounds,
                                               double tolerance = kViolationTolerance);

// Exhaustive maximization over every W and every U in {u_i : u_i > L}.
// Test oracle; n <= 15. Throws InvalidArgument when no threshold exists.
QuantileCut brute_force_separation(std::span<const double> x, int k, const BoxBounds& bounds);

}  // namespace quantsched
