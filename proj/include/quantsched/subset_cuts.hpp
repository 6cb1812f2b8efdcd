#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "quantsched/matrix.hpp"
#include "quantsched/polyhedral_cuts.hpp"

namespace quantsched {

// Lower bounds on q_k(A x) for a nonnegative scenario matrix A (rows are
// scenarios, columns decisions). Every cut reads y >= coefficients . x + constant.

enum class SubsetFamily { kSimple, kSubset, kGeneratedSubset, kGeneralSubset };

std::string_view family_name(SubsetFamily family);

struct SubsetCut {
  SubsetFamily family = SubsetFamily::kSubset;
  std::vector<int> scenarios;        // P, ascending; empty for the simple family
  std::vector<double> beta;          // general family only
  BoxBounds box;                     // general family only
  std::vector<double> coefficients;  // one per column of A
  double constant = 0.0;

  double value(std::span<const double> x) const;
};

// q_k(A x~) * (sum_j x~_j x_j - sum_j x~_j + 1). Requires A >= 0, x~ binary.
SubsetCut simple_generated_cut(const Matrix& a, int k, std::span<const double> incumbent);

// y >= sum_j min_{i in P} a_ij x_j, valid for any |P| >= k.
SubsetCut subset_cut(const Matrix& a, int k, std::vector<int> scenarios);

// Rows of the k largest entries of `values`, ties to the lowest index; sorted.
std::vector<int> top_k_rows(std::span<const double> values, int k);

// One subset cut per column j with P_j = top-k rows of column j, dropping
// repeated P (first column wins).
std::vector<SubsetCut> per_column_subsets(const Matrix& a, int k);

// Tight at x~: P = top-k rows of A x~, columns in x~ get max_{i in P} a_ij,
// the others min_{i in P} a_ij.
SubsetCut generated_subset_cut(const Matrix& a, int k, std::span<const double> incumbent);

// General subset family on l <= x <= u with weights beta in [0,1]^m.
SubsetCut general_subset_cut(const Matrix& a, int k, std::vector<int> scenarios,
                             std::vector<double> beta, const BoxBounds& box);

// Maximizes the subset-cut value at `point` over all P with |P| >= k by
// enumeration (the optimum is always reached at |P| = k). n <= 20.
SubsetCut separate_subset_exhaustive(const Matrix& a, int k, std::span<const double> point);

// Best-first search over k-row subsets seeded with the per-column optima.
// `budget` counts expanded nodes, the seed set being the first; the queue is
// restarted from random subsets drawn from `seed` when it runs dry.
SubsetCut separate_subset_bestfirst(const Matrix& a, int k, std::span<const double> point,
                                    int budget, std::uint64_t seed = 0);

// Best general-subset cut at `point` on the unit box. P ranges over all
// k-row subsets; beta over {0,1}^m jointly with P when
// C(n,k) * 2^m <= joint_limit, otherwise beta is the rounding of `point`.
SubsetCut separate_general_exhaustive(const Matrix& a, int k, std::span<const double> point,
                                      std::uint64_t joint_limit = 1u << 18);

}  // namespace quantsched
