#include "quantsched/methods.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>

#include "quantsched/error.hpp"
#include "quantsched/polyhedral_cuts.hpp"
#include "quantsched/quantile.hpp"
#include "quantsched/subset_cuts.hpp"

namespace quantsched {

namespace {

constexpr Method kMethods[] = {Method::kFull,  Method::kFullC, Method::kFullS,
                               Method::kCGen,  Method::kCGenS, Method::kCGenO};

void require_valid(const Instance& inst) {
  const ValidationReport report = validate(inst);
  if (report.empty()) return;
  std::string message = "instance is not valid:";
  for (const auto& issue : report) message += "\n  " + issue.entity + ": " + issue.message;
  throw SemanticError(message);
}

int k_at(const Instance& inst, Timestep t) { return tau_to_k(inst.scenario_count(t), inst.tau); }

// Column j of a risk matrix -> model index of its x variable.
std::vector<int> column_vars(const Model& model, const RiskMatrix& a) {
  std::vector<int> vars;
  vars.reserve(a.columns.size());
  for (const auto& col : a.columns) vars.push_back(model.variable(x_name(col.intervention, col.start)));
  return vars;
}

// y_t - sum_j c_j x_j >= constant.
Constraint cut_row(std::string name, int y, const std::vector<int>& vars,
                   const std::vector<double>& coefficients, double constant) {
  Constraint row;
  row.name = std::move(name);
  row.terms.push_back({y, 1.0});
  for (size_t j = 0; j < vars.size(); ++j) {
    if (coefficients[j] != 0.0) row.terms.push_back({vars[j], -coefficients[j]});
  }
  row.relation = Relation::kGreaterEqual;
  row.rhs = constant;
  return row;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Copies the solver outcome into a result and decodes the schedule.
void finish(MethodResult& result, const Instance& inst, const Model& model, const MipSolution& sol) {
  result.status = sol.status;
  result.lower_bound = sol.lower_bound;
  result.root_bound = sol.root_bound;
  result.nodes = sol.nodes;
  result.rejected_incumbents = sol.rejected_incumbents;
  result.gap = sol.gap();
  if (!sol.has_incumbent()) return;
  result.objective = sol.objective;
  result.starts.assign(inst.interventions.size(), 0);
  for (const Column& col : admissible_columns(inst)) {
    if (sol.values[model.variable(x_name(col.intervention, col.start))] > 0.5) {
      result.starts[col.intervention] = col.start;
    }
  }
  for (size_t i = 0; i < inst.interventions.size(); ++i) {
    result.schedule.starts[inst.interventions[i].name] = result.starts[i];
  }
  for (Timestep t = 1; t <= inst.horizon; ++t) result.y.push_back(sol.values[model.variable(y_name(t))]);
  result.breakdown = evaluate(inst, result.starts);
  if (std::abs(result.breakdown.blended - result.objective) > 1e-6) {
    result.log.push_back("model objective " + std::to_string(result.objective) +
                         " differs from the evaluated schedule " +
                         std::to_string(result.breakdown.blended));
  }
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kFull: return "full";
    case Method::kFullC: return "full+C";
    case Method::kFullS: return "full+S";
    case Method::kCGen: return "cgen";
    case Method::kCGenS: return "cgen+S";
    case Method::kCGenO: return "cgen+O";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kMethods) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods(std::begin(kMethods), std::end(kMethods));
  return methods;
}

int MethodResult::total_cuts() const {
  int total = 0;
  for (const auto& [family, count] : cuts) total += count;
  return total;
}

std::string x_name(int intervention, Timestep start) {
  return "x_" + std::to_string(intervention) + "_" + std::to_string(start);
}
std::string y_name(Timestep t) { return "y_" + std::to_string(t); }
std::string excess_name(Timestep t) { return "dev_" + std::to_string(t); }
std::string risk_name(Timestep t, int scenario) {
  return "r_" + std::to_string(t) + "_" + std::to_string(scenario);
}

std::vector<std::vector<double>> risk_upper_bounds(const Instance& inst) {
  std::vector<std::vector<double>> bounds(inst.horizon);
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    const int ns = inst.scenario_count(t);
    auto& u = bounds[t - 1];
    u.assign(ns, 0.0);
    for (int i = 0; i < static_cast<int>(inst.interventions.size()); ++i) {
      const auto& risk = inst.interventions[i].risk;
      auto at_t = risk.find(t);
      if (at_t == risk.end()) continue;
      for (int s = 0; s < ns; ++s) {
        double worst = 0.0;
        for (const auto& [start, values] : at_t->second) {
          if (!inst.admissible(i, start)) continue;
          if (s < static_cast<int>(values.size())) worst = std::max(worst, values[s]);
        }
        u[s] += worst;
      }
    }
  }
  return bounds;
}

Model build_base(const Instance& inst) {
  require_valid(inst);
  const double horizon = inst.horizon;
  Model model;

  // x_it carries its share of alpha * obj1: the mean risk it causes at every
  // covered timestep, averaged over the horizon.
  const auto columns = admissible_columns(inst);
  std::vector<int> x(columns.size());
  for (size_t j = 0; j < columns.size(); ++j) {
    const auto& col = columns[j];
    double mean_risk = 0.0;
    const auto& risk = inst.interventions[col.intervention].risk;
    for (const auto& [t, by_start] : risk) {
      auto it = by_start.find(col.start);
      if (it == by_start.end()) continue;
      double sum = 0.0;
      for (double v : it->second) sum += v;
      mean_risk += sum / inst.scenario_count(t);
    }
    x[j] = model.add_binary(x_name(col.intervention, col.start), inst.alpha * mean_risk / horizon);
  }
  std::vector<int> y(inst.horizon);
  std::vector<int> excess(inst.horizon);
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    y[t - 1] = model.add_variable(y_name(t), VarKind::kContinuous, 0.0, kInfinity);
    excess[t - 1] = model.add_variable(excess_name(t), VarKind::kContinuous, 0.0, kInfinity,
                                       (1.0 - inst.alpha) / horizon);
  }

  for (int i = 0; i < static_cast<int>(inst.interventions.size()); ++i) {
    Constraint row{"assign_" + std::to_string(i), {}, Relation::kEqual, 1.0};
    for (size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].intervention == i) row.terms.push_back({x[j], 1.0});
    }
    model.add_constraint(std::move(row));
  }

  for (size_t c = 0; c < inst.resources.size(); ++c) {
    const auto& res = inst.resources[c];
    for (Timestep t = 1; t <= inst.horizon; ++t) {
      std::vector<LinearTerm> terms;
      for (size_t j = 0; j < columns.size(); ++j) {
        const auto& wl = inst.interventions[columns[j].intervention].workload;
        auto by_res = wl.find(res.name);
        if (by_res == wl.end()) continue;
        auto at_t = by_res->second.find(t);
        if (at_t == by_res->second.end()) continue;
        auto amount = at_t->second.find(columns[j].start);
        if (amount != at_t->second.end() && amount->second != 0.0) {
          terms.push_back({x[j], amount->second});
        }
      }
      const std::string stem = "res_" + std::to_string(c) + "_" + std::to_string(t);
      const double lower = res.lower[t - 1];
      const double upper = res.upper[t - 1];
      // Rows without terms only matter when the bounds exclude zero usage.
      if (!terms.empty() || lower > 0.0) {
        model.add_constraint({stem + "_lo", terms, Relation::kGreaterEqual, lower});
      }
      if (!terms.empty() || upper < 0.0) {
        model.add_constraint({stem + "_up", terms, Relation::kLessEqual, upper});
      }
    }
  }

  for (size_t e = 0; e < inst.exclusions.size(); ++e) {
    const auto& ex = inst.exclusions[e];
    const int a = *inst.intervention_index(ex.first);
    const int b = *inst.intervention_index(ex.second);
    std::set<std::pair<int, int>> pairs;
    for (Timestep t : ex.timesteps) {
      for (size_t ja = 0; ja < columns.size(); ++ja) {
        if (columns[ja].intervention != a || !inst.covers(a, columns[ja].start, t)) continue;
        for (size_t jb = 0; jb < columns.size(); ++jb) {
          if (columns[jb].intervention != b || !inst.covers(b, columns[jb].start, t)) continue;
          pairs.emplace(x[ja], x[jb]);
        }
      }
    }
    int n = 0;
    for (const auto& [xa, xb] : pairs) {
      model.add_constraint({"excl_" + std::to_string(e) + "_" + std::to_string(n++),
                            {{xa, 1.0}, {xb, 1.0}},
                            Relation::kLessEqual,
                            1.0});
    }
  }

  // excess_t >= y_t - mean_t(x)
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    const RiskMatrix a = risk_matrix(inst, t);
    Constraint row{"over_" + std::to_string(t), {{excess[t - 1], 1.0}, {y[t - 1], -1.0}},
                   Relation::kGreaterEqual, 0.0};
    for (int j = 0; j < a.cols; ++j) {
      double sum = 0.0;
      for (int s = 0; s < a.rows; ++s) sum += a.at(s, j);
      if (sum != 0.0) {
        row.terms.push_back({model.variable(x_name(a.columns[j].intervention, a.columns[j].start)),
                             sum / a.rows});
      }
    }
    model.add_constraint(std::move(row));
    // With one scenario the quantile is the scenario risk itself, a linear
    // floor the master can carry exactly.
    if (a.rows == 1) {
      Constraint floor{"floor_" + std::to_string(t), {{y[t - 1], 1.0}}, Relation::kGreaterEqual, 0.0};
      for (int j = 0; j < a.cols; ++j) {
        if (a.at(0, j) != 0.0) {
          floor.terms.push_back(
              {model.variable(x_name(a.columns[j].intervention, a.columns[j].start)), -a.at(0, j)});
        }
      }
      model.add_constraint(std::move(floor));
    }
  }
  return model;
}

Model build_full(const Instance& inst) {
  Model model = build_base(inst);
  const auto bounds = risk_upper_bounds(inst);
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    const RiskMatrix a = risk_matrix(inst, t);
    const auto vars = column_vars(model, a);
    std::vector<std::vector<LinearTerm>> bodies;
    for (int s = 0; s < a.rows; ++s) {
      const int r = model.add_variable(risk_name(t, s), VarKind::kContinuous, 0.0, bounds[t - 1][s]);
      Constraint link{"risk_" + std::to_string(t) + "_" + std::to_string(s), {{r, 1.0}},
                      Relation::kEqual, 0.0};
      for (int j = 0; j < a.cols; ++j) {
        if (a.at(s, j) != 0.0) link.terms.push_back({vars[j], -a.at(s, j)});
      }
      model.add_constraint(std::move(link));
      bodies.push_back({{r, 1.0}});
    }
    add_quantile_gadget(model, model.variable(y_name(t)), bodies, k_at(inst, t), std::to_string(t));
  }
  return model;
}

int add_root_subset_cuts(Model& model, const Instance& inst) {
  int added = 0;
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    const RiskMatrix a = risk_matrix(inst, t);
    if (a.cols == 0) continue;
    const auto vars = column_vars(model, a);
    const int y = model.variable(y_name(t));
    int n = 0;
    for (const SubsetCut& cut : per_column_subsets(a, k_at(inst, t))) {
      if (std::all_of(cut.coefficients.begin(), cut.coefficients.end(),
                      [](double c) { return c == 0.0; })) {
        continue;
      }
      model.add_constraint(cut_row("subset_" + std::to_string(t) + "_" + std::to_string(n++), y,
                                   vars, cut.coefficients, cut.constant));
      ++added;
    }
  }
  return added;
}

double root_lp_bound(const Model& model, BigMVariant variant) {
  const Model linear = to_bigm(model, variant);
  const LpSolution sol = solve_lp(relaxation(linear));
  if (sol.status != LpStatus::kOptimal) {
    throw SolverError("root LP relaxation is not optimal");
  }
  return sol.objective + linear.objective_constant;
}

CutLoopReport run_quantile_cut_loop(Model& model, const Instance& inst,
                                    const std::vector<std::vector<double>>& bounds, int max_rounds,
                                    BigMVariant variant, double tolerance) {
  CutLoopReport report;
  std::vector<int> y(inst.horizon);
  std::vector<std::vector<int>> r(inst.horizon);
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    y[t - 1] = model.variable(y_name(t));
    for (int s = 0; s < inst.scenario_count(t); ++s) r[t - 1].push_back(model.variable(risk_name(t, s)));
  }
  for (int round = 0;; ++round) {
    const Model linear = to_bigm(model, variant);
    const LpSolution sol = solve_lp(relaxation(linear));
    if (sol.status != LpStatus::kOptimal) throw SolverError("cut loop: LP relaxation is not optimal");
    report.bounds.push_back(sol.objective + linear.objective_constant);
    if (round >= max_rounds) break;
    int added = 0;
    for (Timestep t = 1; t <= inst.horizon; ++t) {
      std::vector<double> z;
      for (int v : r[t - 1]) z.push_back(sol.values[v]);
      BoxBounds box{std::vector<double>(z.size(), 0.0), bounds[t - 1]};
      // Snap LP noise into the box the cut is derived for.
      for (size_t s = 0; s < z.size(); ++s) z[s] = std::clamp(z[s], 0.0, box.upper[s]);
      auto cut = separate_asymmetric(z, k_at(inst, t), sol.values[y[t - 1]], box, tolerance);
      if (!cut) continue;
      Constraint row;
      row.name = "qcut_" + std::to_string(t) + "_" + std::to_string(report.cuts);
      row.terms.push_back({y[t - 1], 1.0});
      for (int s : cut->support) {
        if (cut->coefficients[s] != 0.0) row.terms.push_back({r[t - 1][s], -cut->coefficients[s]});
      }
      row.relation = Relation::kGreaterEqual;
      row.rhs = cut->constant;
      model.add_constraint(std::move(row));
      ++added;
      ++report.cuts;
    }
    if (added == 0) break;
    ++report.rounds;
  }
  return report;
}

MethodResult solve_cgen(const Instance& inst, const MethodConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  MethodResult result;
  result.method = config.method;
  Model model = build_base(inst);
  if (config.method == Method::kCGenS) {
    result.cuts[std::string(family_name(SubsetFamily::kSubset))] += add_root_subset_cuts(model, inst);
  }

  struct Slice {
    RiskMatrix a;
    std::vector<int> vars;
    int y = 0;
    int k = 1;
  };
  std::vector<Slice> slices;
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    Slice slice{risk_matrix(inst, t), {}, model.variable(y_name(t)), k_at(inst, t)};
    slice.vars = column_vars(model, slice.a);
    slices.push_back(std::move(slice));
  }
  auto restrict = [](const Slice& slice, std::span<const double> point, bool round) {
    std::vector<double> x;
    for (int v : slice.vars) x.push_back(round ? std::round(point[v]) : point[v]);
    return x;
  };

  if (config.method == Method::kCGenO) {
    const std::string family(family_name(SubsetFamily::kGeneralSubset));
    int n = 0;
    for (int round = 0; round < config.cut_rounds; ++round) {
      const LpSolution sol = solve_lp(relaxation(model));
      if (sol.status != LpStatus::kOptimal) break;
      int added = 0;
      for (size_t t = 0; t < slices.size(); ++t) {
        const Slice& slice = slices[t];
        if (slice.a.cols == 0) continue;
        auto point = restrict(slice, sol.values, false);
        for (auto& v : point) v = std::clamp(v, 0.0, 1.0);
        const SubsetCut cut = separate_general_exhaustive(slice.a, slice.k, point);
        if (cut.value(point) <= sol.values[slice.y] + config.tolerance) continue;
        model.add_constraint(cut_row("gen_" + std::to_string(t + 1) + "_" + std::to_string(n++),
                                     slice.y, slice.vars, cut.coefficients, cut.constant));
        ++added;
      }
      result.cuts[family] += added;
      if (added == 0) break;
      ++result.root_rounds;
    }
  }

  const SubsetFamily lazy_family =
      config.simple_lazy_cuts ? SubsetFamily::kSimple : SubsetFamily::kGeneratedSubset;
  const std::string lazy_name(family_name(lazy_family));
  std::vector<std::set<std::vector<double>>> cut_patterns(slices.size());
  std::set<std::vector<double>> rejected;
  std::vector<int> x_vars;
  for (const Column& col : admissible_columns(inst)) {
    x_vars.push_back(model.variable(x_name(col.intervention, col.start)));
  }
  int lazy_count = 0;
  SolveCallbacks callbacks;
  callbacks.on_incumbent = [&](std::span<const double> point) {
    std::vector<Constraint> rows;
    std::vector<double> qs(slices.size(), 0.0);
    std::vector<std::vector<double>> patterns(slices.size());
    bool violated = false;
    for (size_t t = 0; t < slices.size(); ++t) {
      const Slice& slice = slices[t];
      if (slice.a.cols == 0) continue;
      patterns[t] = restrict(slice, point, true);
      qs[t] = q_k(slice.a.multiply(patterns[t]), slice.k);
      if (point[slice.y] < qs[t] - config.tolerance) violated = true;
    }
    if (!violated) return rows;
    // Cut the whole incumbent at once: every timestep whose quantile is
    // positive gets its tight cut unless this pattern was already cut there.
    for (size_t t = 0; t < slices.size(); ++t) {
      const Slice& slice = slices[t];
      if (slice.a.cols == 0) continue;
      const bool below = point[slice.y] < qs[t] - config.tolerance;
      if (!below && (qs[t] <= config.tolerance || cut_patterns[t].count(patterns[t]))) continue;
      cut_patterns[t].insert(patterns[t]);
      const SubsetCut cut = config.simple_lazy_cuts
                                ? simple_generated_cut(slice.a, slice.k, patterns[t])
                                : generated_subset_cut(slice.a, slice.k, patterns[t]);
      rows.push_back(cut_row("lazy_" + std::to_string(t + 1) + "_" + std::to_string(lazy_count++),
                             slice.y, slice.vars, cut.coefficients, cut.constant));
      ++result.cuts[lazy_name];
    }
    result.lazy_rows.insert(result.lazy_rows.end(), rows.begin(), rows.end());
    std::vector<double> x;
    for (int v : x_vars) x.push_back(std::round(point[v]));
    if (!rejected.insert(x).second) ++result.repeated_rejections;
    return rows;
  };

  const MipSolution sol = solve_mip(model, config.mip, callbacks);
  finish(result, inst, model, sol);
  result.seconds = elapsed_since(start);
  return result;
}

MethodResult solve_method(const Instance& inst, const MethodConfig& config) {
  if (config.method == Method::kCGen || config.method == Method::kCGenS ||
      config.method == Method::kCGenO) {
    return solve_cgen(inst, config);
  }
  const auto start = std::chrono::steady_clock::now();
  MethodResult result;
  result.method = config.method;
  Model model = build_full(inst);
  if (config.method == Method::kFullS) {
    result.cuts[std::string(family_name(SubsetFamily::kSubset))] += add_root_subset_cuts(model, inst);
  } else if (config.method == Method::kFullC) {
    const CutLoopReport loop = run_quantile_cut_loop(model, inst, risk_upper_bounds(inst),
                                                     config.cut_rounds, config.bigm, config.tolerance);
    result.cuts["asymmetric"] += loop.cuts;
    result.root_rounds = loop.rounds;
  }
  const Model linear = to_bigm(model, config.bigm);
  const MipSolution sol = solve_mip(linear, config.mip);
  finish(result, inst, linear, sol);
  result.seconds = elapsed_since(start);
  return result;
}

}  // namespace quantsched
