#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantsched/instance.hpp"
#include "quantsched/mip.hpp"
#include "quantsched/polyhedral_cuts.hpp"

namespace quantsched {

enum class Method { kFull, kFullC, kFullS, kCGen, kCGenS, kCGenO };

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct MethodConfig {
  Method method = Method::kCGen;
  MipConfig mip;
  // Root separation rounds for full+C and cgen+O.
  int cut_rounds = 20;
  // Absolute slack on y_t before a cut is considered violated.
  double tolerance = 1e-6;
  BigMVariant bigm = BigMVariant::kActivate;
  // Lazy family of the constraint-generation driver: generated subset cuts
  // by default, simple generated cuts for ablation.
  bool simple_lazy_cuts = false;
};

struct MethodResult {
  Method method = Method::kCGen;
  MipStatus status = MipStatus::kInfeasible;
  Schedule schedule;
  std::vector<Timestep> starts;    // instance order; empty without incumbent
  ObjectiveBreakdown breakdown;    // re-evaluated from the decoded schedule
  double objective = kInfinity;    // model objective at the incumbent
  double lower_bound = -kInfinity;
  double gap = kInfinity;          // fraction, not percent
  double root_bound = -kInfinity;  // root LP value after the method's root cuts
  std::vector<double> y;           // y_t at the incumbent, index t-1
  std::map<std::string, int> cuts; // family -> rows added
  int root_rounds = 0;
  std::int64_t nodes = 0;
  std::int64_t rejected_incumbents = 0;
  // Rejected incumbents whose start vector had already been rejected before;
  // tight lazy cuts keep this at zero.
  std::int64_t repeated_rejections = 0;
  // Lazy rows added by the constraint-generation driver, over the variable
  // indices of build_base(inst).
  std::vector<Constraint> lazy_rows;
  std::vector<std::string> log;
  double seconds = 0.0;

  bool has_schedule() const { return !starts.empty(); }
  int total_cuts() const;
};

// Variable naming shared by every model builder. Interventions and scenarios
// are 0-based indices, timesteps 1-based.
std::string x_name(int intervention, Timestep start);
std::string y_name(Timestep t);
std::string excess_name(Timestep t);
std::string risk_name(Timestep t, int scenario);

// u_ts = sum over interventions of the largest risk any admissible start
// puts on scenario s at t (missing entries count as 0). Index [t-1][s].
std::vector<std::vector<double>> risk_upper_bounds(const Instance& inst);

// Assignment, resource and exclusion rows over x, continuous y_t >= 0 and
// excess variables with excess_t >= y_t - mean_t(x); objective
// alpha * obj1 + (1 - alpha) / T * sum excess_t. No quantile structure,
// except that single-scenario timesteps get the exact floor y_t >= A_t x.
// Throws SemanticError when the instance does not validate.
Model build_base(const Instance& inst);

// build_base plus risk variables r_ts = (A_t x)_s bounded by
// risk_upper_bounds and the indicator gadget y_t >= Q_k(r_t).
Model build_full(const Instance& inst);

// Per-column subset cuts y_t >= sum_j c_j x_j for every timestep; returns the
// number of rows added (all-zero rows are skipped).
int add_root_subset_cuts(Model& model, const Instance& inst);

struct CutLoopReport {
  int rounds = 0;              // rounds that added at least one row
  int cuts = 0;
  std::vector<double> bounds;  // LP value before the first and after every round
};

// Root asymmetric cutting-plane loop on a build_full model: separates the
// LP point r_t against y_t on the box [0, u_t] and adds the best violated
// cut per timestep until none is violated or `max_rounds` is reached.
CutLoopReport run_quantile_cut_loop(Model& model, const Instance& inst,
                                    const std::vector<std::vector<double>>& bounds,
                                    int max_rounds = 20,
                                    BigMVariant variant = BigMVariant::kActivate,
                                    double tolerance = kViolationTolerance);

// LP relaxation value of the model (indicators rewritten with `variant`).
double root_lp_bound(const Model& model, BigMVariant variant = BigMVariant::kActivate);

MethodResult solve_cgen(const Instance& inst, const MethodConfig& config);
MethodResult solve_method(const Instance& inst, const MethodConfig& config);

}  // namespace quantsched
