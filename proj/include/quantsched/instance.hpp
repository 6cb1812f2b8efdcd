#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantsched/matrix.hpp"

namespace quantsched {

// Timesteps are 1-based throughout: valid values are 1..horizon.
using Timestep = int;

struct Resource {
  std::string name;
  std::vector<double> lower;  // index t-1
  std::vector<double> upper;  // index t-1

  bool operator==(const Resource&) const = default;
};

struct Intervention {
  std::string name;
  // start t -> duration in timesteps. Starts missing from the map are not
  // admissible, and neither are starts with t + duration > horizon + 1.
  std::map<Timestep, int> duration;
  // resource name -> affected timestep t -> start t' -> units required.
  std::map<std::string, std::map<Timestep, std::map<Timestep, double>>> workload;
  // affected timestep t -> start t' -> risk per scenario of t.
  std::map<Timestep, std::map<Timestep, std::vector<double>>> risk;

  bool operator==(const Intervention&) const = default;
};

struct Exclusion {
  std::string first;
  std::string second;
  std::vector<Timestep> timesteps;

  bool operator==(const Exclusion&) const = default;
};

struct Instance {
  int horizon = 1;
  double alpha = 0.5;
  double tau = 0.5;
  std::vector<int> scenario_counts;  // index t-1
  std::vector<Intervention> interventions;
  std::vector<Resource> resources;
  std::vector<Exclusion> exclusions;

  bool operator==(const Instance&) const = default;

  // Index of the named intervention, or nullopt.
  std::optional<int> intervention_index(std::string_view name) const;
  int scenario_count(Timestep t) const { return scenario_counts.at(t - 1); }
  // True iff intervention i may start at t (duration known and it ends
  // within the horizon).
  bool admissible(int intervention, Timestep start) const;
  std::vector<Timestep> admissible_starts(int intervention) const;
  // True iff intervention i started at `start` is in progress at t.
  bool covers(int intervention, Timestep start, Timestep t) const;
};

// An (intervention, start) pair; one binary decision x_it.
struct Column {
  int intervention = 0;
  Timestep start = 1;

  auto operator<=>(const Column&) const = default;
};

// Every admissible (intervention, start) pair, intervention-major.
std::vector<Column> admissible_columns(const Instance& inst);

// Intervention name -> start timestep.
struct Schedule {
  std::map<std::string, Timestep> starts;

  bool operator==(const Schedule&) const = default;
};

// Start index per intervention (instance order). Throws SemanticError on
// names the instance does not know or interventions left unscheduled.
std::vector<Timestep> schedule_starts(const Instance& inst, const Schedule& sched);

struct ValidationIssue {
  std::string entity;
  std::string message;
};
using ValidationReport = std::vector<ValidationIssue>;

// Checks every structural invariant; an empty report means the instance is
// usable by all other operations.
ValidationReport validate(const Instance& inst);

enum class ViolationKind { kInadmissibleStart, kResourceLower, kResourceUpper, kExclusion };

struct Violation {
  ViolationKind kind;
  std::string entity;  // intervention, resource or "a/b" exclusion pair
  Timestep t = 0;
  double amount = 0.0;  // magnitude of the resource violation
  std::string message;
};

std::vector<Violation> check_feasibility(const Instance& inst, const Schedule& sched);

struct ObjectiveBreakdown {
  std::vector<double> mean_risk;  // per timestep
  std::vector<double> quantile;   // per timestep
  std::vector<double> excess;     // per timestep, max(quantile - mean, 0)
  double obj1 = 0.0;
  double obj2 = 0.0;
  double blended = 0.0;
};

// Per-scenario total risk at t for the given start vector.
std::vector<double> scenario_risks(const Instance& inst, const std::vector<Timestep>& starts,
                                   Timestep t);

ObjectiveBreakdown evaluate(const Instance& inst, const Schedule& sched);
ObjectiveBreakdown evaluate(const Instance& inst, const std::vector<Timestep>& starts);

// Scenario risk matrix at one timestep: rows are scenarios, columns the
// (intervention, start) pairs in progress at t.
struct RiskMatrix : Matrix {
  std::vector<Column> columns;  // column index -> decision
};

RiskMatrix risk_matrix(const Instance& inst, Timestep t);

// Serialization of the canonical JSON instance document. parse_instance
// throws ParseError on malformed text and SemanticError listing every
// validation issue; parse_instance_document stops after the structural parse.
Instance parse_instance(std::string_view text);
Instance parse_instance_document(std::string_view text);
std::string serialize_instance(const Instance& inst);
Instance read_instance_file(const std::string& path);

// Solution files: one "<name> <start>" line per intervention.
Schedule parse_schedule(std::string_view text);
std::string serialize_schedule(const Instance& inst, const Schedule& sched);

struct GeneratorParams {
  int min_interventions = 3;
  int max_interventions = 6;
  int min_horizon = 3;
  int max_horizon = 5;
  int max_scenarios = 8;
  int max_duration = 2;
  int resources = 1;
  int exclusions = 1;
  double max_risk = 10.0;
  // Drawn uniformly from these when unset.
  std::optional<double> alpha;
  std::optional<double> tau;
};

struct GeneratedInstance {
  Instance instance;
  Schedule planted;  // feasible by construction
};

GeneratedInstance generate_synthetic(const GeneratorParams& params, std::uint64_t seed);

}  // namespace quantsched
