#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quantsched/lp.hpp"

namespace quantsched {

enum class VarKind { kContinuous, kBinary };

struct Variable {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  double lower = 0.0;
  double upper = kInfinity;
};

// sum terms (relation) rhs.
struct Constraint {
  std::string name;
  std::vector<LinearTerm> terms;
  Relation relation = Relation::kGreaterEqual;
  double rhs = 0.0;

  double activity(std::span<const double> values) const;
  // Amount by which `values` violates the row (0 when satisfied).
  double violation(std::span<const double> values) const;
};

// body holds whenever variable `guard` takes the value `active_value`.
struct IndicatorConstraint {
  int guard = 0;
  int active_value = 1;
  Constraint body;
};

// Solver-neutral MILP: minimize objective . x + objective_constant.
class Model {
 public:
  int add_variable(std::string name, VarKind kind, double lower, double upper,
                   double objective = 0.0);
  int add_binary(std::string name, double objective = 0.0) {
    return add_variable(std::move(name), VarKind::kBinary, 0.0, 1.0, objective);
  }
  int add_constraint(Constraint row);
  int add_indicator(IndicatorConstraint indicator);

  // Index of the named variable, or nullopt.
  std::optional<int> find_variable(std::string_view name) const;
  // Index of the named variable; throws InvalidArgument when unknown.
  int variable(std::string_view name) const;

  int num_vars() const { return static_cast<int>(variables_.size()); }
  const std::vector<Variable>& variables() const { return variables_; }
  std::vector<Variable>& variables() { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<IndicatorConstraint>& indicators() const { return indicators_; }
  std::vector<double>& objective() { return objective_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant = 0.0;

  double objective_value(std::span<const double> values) const;
  void clear_indicators() { indicators_.clear(); }

 private:
  std::vector<Variable> variables_;
  std::vector<double> objective_;
  std::vector<Constraint> constraints_;
  std::vector<IndicatorConstraint> indicators_;
  std::unordered_map<std::string, int> by_name_;
};

// Ways of rewriting indicators with big-M constants. kActivate keeps each
// guard's meaning (guard on enforces the body, relaxed by M*(1 - guard));
// kDeactivate complements the guards first so that a guard set to one
// switches the body off (relaxed by M*guard). Cardinality and any other row
// mentioning a complemented guard are rewritten accordingly.
enum class BigMVariant { kActivate, kDeactivate };

// Replaces every indicator with a linear row whose M is derived from the
// stored variable bounds. Complemented guards keep their index and get the
// suffix "_off". Throws InvalidArgument when a body has no finite bound.
Model to_bigm(const Model& model, BigMVariant variant);

// Adds y >= Q_k(bodies) for the expressions in `bodies`: one binary guard per
// expression enforcing y >= body, with n - k + 1 guards switched on. For
// k = 1 the guards are unnecessary and plain rows are emitted. Guard and row
// names are built from `prefix` and the expression index. Returns the guard
// indices (empty when k = 1).
std::vector<int> add_quantile_gadget(Model& model, int y,
                                     const std::vector<std::vector<LinearTerm>>& bodies, int k,
                                     const std::string& prefix);

// Continuous relaxation; throws InvalidArgument if indicators remain.
LinearProgram relaxation(const Model& model);

// Structural checks shared by the solver and the exporter: unique legal
// bounds, term indices in range, binary guards, no NaN.
void check_model(const Model& model);

// CPLEX LP-dialect text. Variables are listed in declaration order in the
// Bounds section, which the reader uses to restore that order.
std::string export_lp_format(const Model& model);
Model parse_lp_format(std::string_view text);
// True iff `name` can be written verbatim in the LP dialect.
bool legal_lp_name(std::string_view name);

enum class MipStatus { kOptimal, kFeasible, kInfeasible, kLimit };

std::string_view status_name(MipStatus status);

struct MipConfig {
  std::int64_t node_limit = 1000000;
  double time_limit = kInfinity;  // seconds
  double relative_gap = 1e-6;
  double absolute_gap = 1e-9;
  double integrality_tolerance = 1e-6;
  int max_cut_rounds_per_node = 200;
};

// Both callbacks see the full LP point of the current node and may return
// rows that are valid for the true feasible set; they are added globally.
// A point handed to on_incumbent is integral on all binaries; returning a
// row it violates rejects it.
struct SolveCallbacks {
  std::function<std::vector<Constraint>(std::span<const double>)> on_incumbent;
  std::function<std::vector<Constraint>(std::span<const double>)> on_node_lp;
};

struct MipSolution {
  MipStatus status = MipStatus::kInfeasible;
  std::vector<double> values;
  double objective = kInfinity;
  double lower_bound = -kInfinity;
  double root_bound = -kInfinity;  // first root LP value, before any callback cut
  std::int64_t nodes = 0;
  std::int64_t cuts_added = 0;
  std::int64_t rejected_incumbents = 0;
  std::vector<double> bound_trace;  // global lower bound after each node

  bool has_incumbent() const { return !values.empty(); }
  // (objective - lower bound) / max(|objective|, 1e-9); infinite without incumbent.
  double gap() const;
};

// Best-bound branch-and-bound on LP relaxations; branching on the most
// fractional binary, ties to the lowest index. The model must be
// indicator-free. LP failures are rethrown as SolverError naming the node.
MipSolution solve_mip(const Model& model, const MipConfig& config = {},
                      const SolveCallbacks& callbacks = {});

}  // namespace quantsched
