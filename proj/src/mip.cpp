#include "quantsched/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <string>
#include <unordered_set>

#include "quantsched/error.hpp"

namespace quantsched {

namespace {

// Violations at or below this are treated as satisfied when deciding whether
// a callback row actually cuts off the point it was given.
constexpr double kCutViolation = 1e-9;

void add_term(std::vector<LinearTerm>& terms, int var, double coef) {
  for (auto& t : terms) {
    if (t.var == var) {
      t.coef += coef;
      return;
    }
  }
  terms.push_back({var, coef});
}

// Smallest and largest value of sum terms over the variable box.
std::pair<double, double> activity_range(const Model& model, const std::vector<LinearTerm>& terms) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& t : terms) {
    const auto& v = model.variables()[t.var];
    if (t.coef > 0) {
      lo += t.coef * v.lower;
      hi += t.coef * v.upper;
    } else if (t.coef < 0) {
      lo += t.coef * v.upper;
      hi += t.coef * v.lower;
    }
  }
  return {lo, hi};
}

LpRow to_lp_row(const Constraint& c) { return {c.terms, c.relation, c.rhs}; }

}  // namespace

double Constraint::activity(std::span<const double> values) const {
  double sum = 0.0;
  for (const auto& t : terms) sum += t.coef * values[t.var];
  return sum;
}

double Constraint::violation(std::span<const double> values) const {
  const double lhs = activity(values);
  switch (relation) {
    case Relation::kLessEqual: return std::max(0.0, lhs - rhs);
    case Relation::kGreaterEqual: return std::max(0.0, rhs - lhs);
    case Relation::kEqual: return std::abs(lhs - rhs);
  }
  return 0.0;
}

int Model::add_variable(std::string name, VarKind kind, double lower, double upper,
                        double objective) {
  if (name.empty()) throw InvalidArgument("model: variable name must not be empty");
  if (by_name_.count(name)) throw InvalidArgument("model: duplicate variable '" + name + "'");
  const int index = num_vars();
  by_name_.emplace(name, index);
  variables_.push_back({std::move(name), kind, lower, upper});
  objective_.push_back(objective);
  return index;
}

int Model::add_constraint(Constraint row) {
  for (const auto& t : row.terms) {
    if (t.var < 0 || t.var >= num_vars()) {
      throw InvalidArgument("model: constraint '" + row.name + "' references an unknown variable");
    }
  }
  constraints_.push_back(std::move(row));
  return static_cast<int>(constraints_.size()) - 1;
}

int Model::add_indicator(IndicatorConstraint indicator) {
  if (indicator.guard < 0 || indicator.guard >= num_vars() ||
      variables_[indicator.guard].kind != VarKind::kBinary) {
    throw InvalidArgument("model: indicator '" + indicator.body.name + "' needs a binary guard");
  }
  if (indicator.active_value != 0 && indicator.active_value != 1) {
    throw InvalidArgument("model: indicator '" + indicator.body.name + "' guard value must be 0 or 1");
  }
  for (const auto& t : indicator.body.terms) {
    if (t.var < 0 || t.var >= num_vars()) {
      throw InvalidArgument("model: indicator '" + indicator.body.name +
                            "' references an unknown variable");
    }
  }
  indicators_.push_back(std::move(indicator));
  return static_cast<int>(indicators_.size()) - 1;
}

std::optional<int> Model::find_variable(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int Model::variable(std::string_view name) const {
  auto index = find_variable(name);
  if (!index) throw InvalidArgument("model: unknown variable '" + std::string(name) + "'");
  return *index;
}

double Model::objective_value(std::span<const double> values) const {
  double sum = objective_constant;
  for (int j = 0; j < num_vars(); ++j) sum += objective_[j] * values[j];
  return sum;
}

Model to_bigm(const Model& model, BigMVariant variant) {
  check_model(model);
  Model out;
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variables()[j];
    out.add_variable(v.name, v.kind, v.lower, v.upper, model.objective()[j]);
  }
  out.objective_constant = model.objective_constant;
  for (const auto& c : model.constraints()) out.add_constraint(c);
  if (model.indicators().empty()) return out;

  std::vector<IndicatorConstraint> indicators = model.indicators();
  if (variant == BigMVariant::kDeactivate) {
    // Substitute g = 1 - g' for every guard g.
    std::vector<bool> guard(model.num_vars(), false);
    for (const auto& ind : indicators) guard[ind.guard] = true;
    Model flipped;
    for (int j = 0; j < out.num_vars(); ++j) {
      const auto& v = out.variables()[j];
      if (!guard[j]) {
        flipped.add_variable(v.name, v.kind, v.lower, v.upper, out.objective()[j]);
        continue;
      }
      const std::string name = v.name + "_off";
      if (model.find_variable(name)) {
        throw InvalidArgument("to_bigm: complemented guard name '" + name + "' already in use");
      }
      flipped.add_variable(name, v.kind, 1.0 - v.upper, 1.0 - v.lower, -out.objective()[j]);
      flipped.objective_constant += out.objective()[j];
    }
    flipped.objective_constant += out.objective_constant;
    auto complement = [&](std::vector<LinearTerm>& terms, double& rhs) {
      for (auto& t : terms) {
        if (guard[t.var]) {
          rhs -= t.coef;
          t.coef = -t.coef;
        }
      }
    };
    for (Constraint c : out.constraints()) {
      complement(c.terms, c.rhs);
      flipped.add_constraint(std::move(c));
    }
    for (auto& ind : indicators) {
      complement(ind.body.terms, ind.body.rhs);
      ind.active_value = 1 - ind.active_value;
    }
    out = std::move(flipped);
  }

  for (const auto& ind : indicators) {
    const auto [lo, hi] = activity_range(out, ind.body.terms);
    auto emit = [&](Relation relation, const std::string& name) {
      Constraint row;
      row.name = name;
      row.terms = ind.body.terms;
      row.relation = relation;
      // M is the largest amount by which the body can be violated.
      const double reach = relation == Relation::kGreaterEqual ? ind.body.rhs - lo : hi - ind.body.rhs;
      if (!std::isfinite(reach)) {
        throw InvalidArgument("to_bigm: indicator '" + ind.body.name +
                              "' has a body without finite bounds");
      }
      const double big_m = std::max(reach, 0.0);
      // Relax by M whenever the guard sits off its active value.
      const double sign = relation == Relation::kGreaterEqual ? 1.0 : -1.0;
      if (ind.active_value == 1) {
        add_term(row.terms, ind.guard, -sign * big_m);
        row.rhs = ind.body.rhs - sign * big_m;
      } else {
        add_term(row.terms, ind.guard, sign * big_m);
        row.rhs = ind.body.rhs;
      }
      out.add_constraint(std::move(row));
    };
    if (ind.body.relation == Relation::kEqual) {
      emit(Relation::kGreaterEqual, ind.body.name + "_ge");
      emit(Relation::kLessEqual, ind.body.name + "_le");
    } else {
      emit(ind.body.relation, ind.body.name);
    }
  }
  return out;
}

std::vector<int> add_quantile_gadget(Model& model, int y,
                                     const std::vector<std::vector<LinearTerm>>& bodies, int k,
                                     const std::string& prefix) {
  const int n = static_cast<int>(bodies.size());
  if (n < 1 || k < 1 || k > n) {
    throw InvalidArgument("quantile gadget: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  auto guarded_row = [&](int s) {
    Constraint row;
    row.name = "quant_" + prefix + "_" + std::to_string(s);
    row.terms.push_back({y, 1.0});
    for (const auto& t : bodies[s]) add_term(row.terms, t.var, -t.coef);
    row.relation = Relation::kGreaterEqual;
    row.rhs = 0.0;
    return row;
  };
  std::vector<int> guards;
  if (k == 1) {
    for (int s = 0; s < n; ++s) model.add_constraint(guarded_row(s));
    return guards;
  }
  Constraint cardinality;
  cardinality.name = "card_" + prefix;
  cardinality.relation = Relation::kEqual;
  cardinality.rhs = n - k + 1;
  for (int s = 0; s < n; ++s) {
    const int guard = model.add_binary("kappa_" + prefix + "_" + std::to_string(s));
    guards.push_back(guard);
    model.add_indicator({guard, 1, guarded_row(s)});
    cardinality.terms.push_back({guard, 1.0});
  }
  model.add_constraint(std::move(cardinality));
  return guards;
}

LinearProgram relaxation(const Model& model) {
  if (!model.indicators().empty()) {
    throw InvalidArgument("relaxation: model still has indicator constraints; call to_bigm first");
  }
  LinearProgram lp;
  lp.objective = model.objective();
  for (const auto& v : model.variables()) {
    lp.lower.push_back(v.lower);
    lp.upper.push_back(v.upper);
  }
  for (const auto& c : model.constraints()) lp.rows.push_back(to_lp_row(c));
  return lp;
}

void check_model(const Model& model) {
  std::unordered_set<std::string_view> names;
  for (const auto& v : model.variables()) {
    if (!names.insert(v.name).second) throw InvalidArgument("model: duplicate variable '" + v.name + "'");
    if (std::isnan(v.lower) || std::isnan(v.upper)) {
      throw InvalidArgument("model: variable '" + v.name + "' has a NaN bound");
    }
    if (v.kind == VarKind::kBinary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw InvalidArgument("model: binary '" + v.name + "' has bounds outside [0, 1]");
    }
  }
  for (double c : model.objective()) {
    if (!std::isfinite(c)) throw InvalidArgument("model: non-finite objective coefficient");
  }
  auto check_row = [&](const Constraint& c) {
    if (!std::isfinite(c.rhs)) throw InvalidArgument("model: row '" + c.name + "' has a non-finite rhs");
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= model.num_vars()) {
        throw InvalidArgument("model: row '" + c.name + "' references an unknown variable");
      }
      if (!std::isfinite(t.coef)) {
        throw InvalidArgument("model: row '" + c.name + "' has a non-finite coefficient");
      }
    }
  };
  for (const auto& c : model.constraints()) check_row(c);
  for (const auto& ind : model.indicators()) {
    if (ind.guard < 0 || ind.guard >= model.num_vars() ||
        model.variables()[ind.guard].kind != VarKind::kBinary) {
      throw InvalidArgument("model: indicator '" + ind.body.name + "' needs a binary guard");
    }
    check_row(ind.body);
  }
}

std::string_view status_name(MipStatus status) {
  switch (status) {
    case MipStatus::kOptimal: return "optimal";
    case MipStatus::kFeasible: return "feasible";
    case MipStatus::kInfeasible: return "infeasible";
    case MipStatus::kLimit: return "limit";
  }
  return "unknown";
}

double MipSolution::gap() const {
  if (!has_incumbent()) return kInfinity;
  return std::max(0.0, (objective - lower_bound) / std::max(std::abs(objective), 1e-9));
}

namespace {

struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  double bound = -kInfinity;
  std::int64_t id = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MipSolution solve_mip(const Model& model, const MipConfig& config, const SolveCallbacks& callbacks) {
  check_model(model);
  LinearProgram lp = relaxation(model);
  const int n = model.num_vars();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  MipSolution result;
  double incumbent = kInfinity;
  auto within_gap = [&](double bound) {
    if (!std::isfinite(incumbent)) return false;
    const double gap = incumbent - bound;
    return gap <= config.absolute_gap ||
           gap / std::max(std::abs(incumbent), 1e-9) <= config.relative_gap;
  };
  // Adds every row to the formulation; true iff one of them cuts off `point`.
  auto absorb = [&](std::vector<Constraint> rows, std::span<const double> point) {
    bool cuts_off = false;
    for (auto& row : rows) {
      for (const auto& t : row.terms) {
        if (t.var < 0 || t.var >= n) throw InvalidArgument("solve_mip: callback row references an unknown variable");
      }
      if (row.violation(point) > kCutViolation) cuts_off = true;
      lp.rows.push_back(to_lp_row(row));
      ++result.cuts_added;
    }
    return cuts_off;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  open.push({lp.lower, lp.upper, -kInfinity, next_id++});
  double global_bound = -kInfinity;
  bool limit_hit = false;
  bool root_done = false;

  while (!open.empty()) {
    if (within_gap(open.top().bound)) break;
    if (result.nodes >= config.node_limit || elapsed() > config.time_limit) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    ++result.nodes;

    LinearProgram node_lp;
    int node_cut_rounds = 0;
    while (true) {
      node_lp.objective = lp.objective;
      node_lp.lower = node.lower;
      node_lp.upper = node.upper;
      node_lp.rows = lp.rows;
      LpSolution sol;
      try {
        sol = solve_lp(node_lp);
      } catch (const Error& e) {
        throw SolverError("solve_mip: node " + std::to_string(result.nodes) + ": " + e.what());
      }
      if (sol.status == LpStatus::kUnbounded) {
        throw SolverError("solve_mip: node " + std::to_string(result.nodes) +
                          ": LP relaxation is unbounded");
      }
      const double value = sol.status == LpStatus::kOptimal
                               ? sol.objective + model.objective_constant
                               : kInfinity;
      if (!root_done) {
        result.root_bound = value;
        root_done = true;
      }
      if (sol.status == LpStatus::kInfeasible || within_gap(value)) break;

      if (callbacks.on_node_lp && node_cut_rounds < config.max_cut_rounds_per_node) {
        ++node_cut_rounds;
        if (absorb(callbacks.on_node_lp(sol.values), sol.values)) continue;
      }

      int branch = -1;
      double best_frac = config.integrality_tolerance;
      for (int j = 0; j < n; ++j) {
        if (model.variables()[j].kind != VarKind::kBinary) continue;
        const double frac = std::abs(sol.values[j] - std::round(sol.values[j]));
        if (frac > best_frac) {
          best_frac = frac;
          branch = j;
        }
      }
      if (branch >= 0) {
        Node down{node.lower, node.upper, value, next_id++};
        down.upper[branch] = std::floor(sol.values[branch]);
        Node up{node.lower, node.upper, value, next_id++};
        up.lower[branch] = std::ceil(sol.values[branch]);
        open.push(std::move(down));
        open.push(std::move(up));
        break;
      }

      std::vector<double> point = sol.values;
      for (int j = 0; j < n; ++j) {
        if (model.variables()[j].kind == VarKind::kBinary) point[j] = std::round(point[j]);
      }
      if (callbacks.on_incumbent && absorb(callbacks.on_incumbent(point), point)) {
        ++result.rejected_incumbents;
        continue;
      }
      const double objective = model.objective_value(point);
      if (objective < incumbent) {
        incumbent = objective;
        result.values = std::move(point);
      }
      break;
    }

    const double open_bound = open.empty() ? incumbent : std::min(open.top().bound, incumbent);
    global_bound = std::max(global_bound, open_bound);
    result.bound_trace.push_back(global_bound);
  }

  result.objective = incumbent;
  if (limit_hit) {
    result.status = result.has_incumbent() ? MipStatus::kFeasible : MipStatus::kLimit;
    result.lower_bound = std::max(global_bound, std::min(open.top().bound, incumbent));
  } else if (result.has_incumbent()) {
    result.status = MipStatus::kOptimal;
    result.lower_bound = open.empty() ? incumbent : std::min(std::max(global_bound, open.top().bound), incumbent);
  } else {
    result.status = MipStatus::kInfeasible;
    result.lower_bound = kInfinity;
  }
  return result;
}

}  // namespace quantsched
