#include "quantsched/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "quantsched/error.hpp"
#include "quantsched/quantile.hpp"

namespace quantsched {

namespace {

constexpr double kResourceTolerance = 1e-9;

std::string ts(Timestep t) { return std::to_string(t); }

}  // namespace

std::optional<int> Instance::intervention_index(std::string_view name) const {
  for (size_t i = 0; i < interventions.size(); ++i) {
    if (interventions[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool Instance::admissible(int intervention, Timestep start) const {
  const auto& durations = interventions.at(intervention).duration;
  auto it = durations.find(start);
  if (it == durations.end() || start < 1 || start > horizon) return false;
  return it->second >= 1 && start + it->second <= horizon + 1;
}

std::vector<Timestep> Instance::admissible_starts(int intervention) const {
  std::vector<Timestep> starts;
  for (Timestep t = 1; t <= horizon; ++t) {
    if (admissible(intervention, t)) starts.push_back(t);
  }
  return starts;
}

bool Instance::covers(int intervention, Timestep start, Timestep t) const {
  const auto& durations = interventions.at(intervention).duration;
  auto it = durations.find(start);
  if (it == durations.end()) return false;
  return start <= t && t < start + it->second;
}

std::vector<Column> admissible_columns(const Instance& inst) {
  std::vector<Column> cols;
  for (int i = 0; i < static_cast<int>(inst.interventions.size()); ++i) {
    for (Timestep t : inst.admissible_starts(i)) cols.push_back({i, t});
  }
  return cols;
}

std::vector<Timestep> schedule_starts(const Instance& inst, const Schedule& sched) {
  std::vector<Timestep> starts(inst.interventions.size(), 0);
  for (const auto& [name, start] : sched.starts) {
    auto idx = inst.intervention_index(name);
    if (!idx) throw SemanticError("schedule names unknown intervention '" + name + "'");
    starts[*idx] = start;
  }
  for (size_t i = 0; i < starts.size(); ++i) {
    if (starts[i] == 0) {
      throw SemanticError("schedule leaves intervention '" + inst.interventions[i].name +
                          "' unscheduled");
    }
  }
  return starts;
}

ValidationReport validate(const Instance& inst) {
  ValidationReport report;
  auto issue = [&](std::string entity, std::string message) {
    report.push_back({std::move(entity), std::move(message)});
  };
  const int T = inst.horizon;

  if (T < 1) {
    issue("horizon", "horizon must be >= 1");
    return report;
  }
  if (!(inst.alpha >= 0.0 && inst.alpha <= 1.0)) issue("alpha", "alpha must lie in [0, 1]");
  if (!(inst.tau > 0.0 && inst.tau <= 1.0)) issue("tau", "tau must lie in (0, 1]");
  if (static_cast<int>(inst.scenario_counts.size()) != T) {
    issue("scenario_counts", "expected " + ts(T) + " entries, found " +
                                 std::to_string(inst.scenario_counts.size()));
    return report;
  }
  for (Timestep t = 1; t <= T; ++t) {
    if (inst.scenario_counts[t - 1] < 1) {
      issue("scenario_counts", "timestep " + ts(t) + " has no scenario");
    }
  }

  std::set<std::string> resource_names;
  for (const auto& res : inst.resources) {
    if (!resource_names.insert(res.name).second) issue(res.name, "duplicate resource name");
    if (static_cast<int>(res.lower.size()) != T || static_cast<int>(res.upper.size()) != T) {
      issue(res.name, "resource bounds must have one entry per timestep");
      continue;
    }
    for (Timestep t = 1; t <= T; ++t) {
      const double lo = res.lower[t - 1];
      const double hi = res.upper[t - 1];
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        issue(res.name, "non-finite bound at t=" + ts(t));
      } else if (lo < 0.0) {
        issue(res.name, "negative lower bound at t=" + ts(t));
      } else if (lo > hi) {
        issue(res.name, "lower bound exceeds upper bound at t=" + ts(t));
      }
    }
  }

  std::set<std::string> intervention_names;
  for (int i = 0; i < static_cast<int>(inst.interventions.size()); ++i) {
    const auto& iv = inst.interventions[i];
    if (!intervention_names.insert(iv.name).second) issue(iv.name, "duplicate intervention name");
    bool bad_duration = false;
    for (const auto& [start, delta] : iv.duration) {
      if (start < 1 || start > T) {
        issue(iv.name, "duration given for start " + ts(start) + " outside the horizon");
        bad_duration = true;
      } else if (delta < 1) {
        issue(iv.name, "non-positive duration for start " + ts(start));
        bad_duration = true;
      }
    }
    if (bad_duration) continue;
    if (inst.admissible_starts(i).empty()) issue(iv.name, "no admissible start");

    auto check_affected = [&](Timestep t, Timestep start, const std::string& what) {
      if (t < 1 || t > T) {
        issue(iv.name, what + " references timestep " + ts(t) + " outside the horizon");
        return false;
      }
      if (!inst.covers(i, start, t)) {
        issue(iv.name, what + " at t=" + ts(t) + " for start " + ts(start) +
                           " lies outside the intervention's execution");
        return false;
      }
      return true;
    };

    for (const auto& [res_name, by_t] : iv.workload) {
      if (!resource_names.count(res_name)) {
        issue(iv.name, "workload references unknown resource '" + res_name + "'");
        continue;
      }
      for (const auto& [t, by_start] : by_t) {
        for (const auto& [start, amount] : by_start) {
          if (!check_affected(t, start, "workload")) continue;
          if (!std::isfinite(amount) || amount < 0.0) {
            issue(iv.name, "negative workload for resource '" + res_name + "' at t=" + ts(t));
          }
        }
      }
    }
    for (const auto& [t, by_start] : iv.risk) {
      for (const auto& [start, values] : by_start) {
        if (!check_affected(t, start, "risk")) continue;
        if (static_cast<int>(values.size()) != inst.scenario_counts[t - 1]) {
          issue(iv.name, "risk at t=" + ts(t) + " for start " + ts(start) + " has " +
                             std::to_string(values.size()) + " scenarios, expected " +
                             std::to_string(inst.scenario_counts[t - 1]));
        }
        for (double v : values) {
          if (!std::isfinite(v) || v < 0.0) {
            issue(iv.name, "negative risk at t=" + ts(t) + " for start " + ts(start));
            break;
          }
        }
      }
    }
  }

  for (const auto& ex : inst.exclusions) {
    const std::string entity = ex.first + "/" + ex.second;
    if (!intervention_names.count(ex.first)) {
      issue(entity, "exclusion references unknown intervention '" + ex.first + "'");
    }
    if (!intervention_names.count(ex.second)) {
      issue(entity, "exclusion references unknown intervention '" + ex.second + "'");
    }
    if (ex.first == ex.second) issue(entity, "exclusion pairs an intervention with itself");
    if (ex.timesteps.empty()) issue(entity, "exclusion lists no timestep");
    for (Timestep t : ex.timesteps) {
      if (t < 1 || t > T) issue(entity, "exclusion timestep " + ts(t) + " outside the horizon");
    }
  }
  return report;
}

std::vector<Violation> check_feasibility(const Instance& inst, const Schedule& sched) {
  const auto starts = schedule_starts(inst, sched);
  std::vector<Violation> out;
  const int n = static_cast<int>(inst.interventions.size());

  for (int i = 0; i < n; ++i) {
    if (!inst.admissible(i, starts[i])) {
      out.push_back({ViolationKind::kInadmissibleStart, inst.interventions[i].name, starts[i], 0.0,
                     "start " + ts(starts[i]) + " is not admissible"});
    }
  }

  for (const auto& res : inst.resources) {
    for (Timestep t = 1; t <= inst.horizon; ++t) {
      double usage = 0.0;
      for (int i = 0; i < n; ++i) {
        auto by_res = inst.interventions[i].workload.find(res.name);
        if (by_res == inst.interventions[i].workload.end()) continue;
        auto by_t = by_res->second.find(t);
        if (by_t == by_res->second.end()) continue;
        auto amount = by_t->second.find(starts[i]);
        if (amount != by_t->second.end()) usage += amount->second;
      }
      const double lo = res.lower[t - 1];
      const double hi = res.upper[t - 1];
      if (usage > hi + kResourceTolerance) {
        out.push_back({ViolationKind::kResourceUpper, res.name, t, usage - hi,
                       "usage " + std::to_string(usage) + " exceeds upper bound " +
                           std::to_string(hi) + " at t=" + ts(t)});
      } else if (usage < lo - kResourceTolerance) {
        out.push_back({ViolationKind::kResourceLower, res.name, t, lo - usage,
                       "usage " + std::to_string(usage) + " below lower bound " +
                           std::to_string(lo) + " at t=" + ts(t)});
      }
    }
  }

  for (const auto& ex : inst.exclusions) {
    auto a = inst.intervention_index(ex.first);
    auto b = inst.intervention_index(ex.second);
    if (!a || !b) throw SemanticError("exclusion references unknown intervention");
    for (Timestep t : ex.timesteps) {
      if (inst.covers(*a, starts[*a], t) && inst.covers(*b, starts[*b], t)) {
        out.push_back({ViolationKind::kExclusion, ex.first + "/" + ex.second, t, 0.0,
                       "mutually exclusive interventions overlap at t=" + ts(t)});
      }
    }
  }
  return out;
}

std::vector<double> scenario_risks(const Instance& inst, const std::vector<Timestep>& starts,
                                   Timestep t) {
  std::vector<double> risks(inst.scenario_count(t), 0.0);
  for (size_t i = 0; i < inst.interventions.size(); ++i) {
    const auto& by_t = inst.interventions[i].risk;
    auto at_t = by_t.find(t);
    if (at_t == by_t.end()) continue;
    auto values = at_t->second.find(starts[i]);
    if (values == at_t->second.end()) continue;
    for (size_t s = 0; s < risks.size() && s < values->second.size(); ++s) {
      risks[s] += values->second[s];
    }
  }
  return risks;
}

ObjectiveBreakdown evaluate(const Instance& inst, const std::vector<Timestep>& starts) {
  ObjectiveBreakdown out;
  const int T = inst.horizon;
  double sum_mean = 0.0;
  double sum_excess = 0.0;
  for (Timestep t = 1; t <= T; ++t) {
    const auto risks = scenario_risks(inst, starts, t);
    double total = 0.0;
    for (double r : risks) total += r;
    const double mean = total / static_cast<double>(risks.size());
    const int k = tau_to_k(static_cast<int>(risks.size()), inst.tau);
    const double quantile = q_k(risks, k);
    const double excess = std::max(quantile - mean, 0.0);
    out.mean_risk.push_back(mean);
    out.quantile.push_back(quantile);
    out.excess.push_back(excess);
    sum_mean += mean;
    sum_excess += excess;
  }
  out.obj1 = sum_mean / T;
  out.obj2 = sum_excess / T;
  out.blended = inst.alpha * out.obj1 + (1.0 - inst.alpha) * out.obj2;
  return out;
}

ObjectiveBreakdown evaluate(const Instance& inst, const Schedule& sched) {
  return evaluate(inst, schedule_starts(inst, sched));
}

RiskMatrix risk_matrix(const Instance& inst, Timestep t) {
  if (t < 1 || t > inst.horizon) throw InvalidArgument("risk_matrix: timestep out of range");
  RiskMatrix m;
  m.rows = inst.scenario_count(t);
  for (const Column& col : admissible_columns(inst)) {
    if (inst.covers(col.intervention, col.start, t)) m.columns.push_back(col);
  }
  m.cols = static_cast<int>(m.columns.size());
  m.values.assign(static_cast<size_t>(m.rows) * m.cols, 0.0);
  for (int c = 0; c < m.cols; ++c) {
    const auto& risk = inst.interventions[m.columns[c].intervention].risk;
    auto at_t = risk.find(t);
    if (at_t == risk.end()) continue;
    auto values = at_t->second.find(m.columns[c].start);
    if (values == at_t->second.end()) continue;
    for (int r = 0; r < m.rows && r < static_cast<int>(values->second.size()); ++r) {
      m.values[static_cast<size_t>(r) * m.cols + c] = values->second[r];
    }
  }
  return m;
}

}  // namespace quantsched
