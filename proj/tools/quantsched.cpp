// Command-line front end: validate, evaluate, solve, separate, export,
// generate and bench. Exit codes: 0 success, 1 domain failure (invalid
// instance, infeasible schedule, no solution found), 2 usage or I/O error.

#include <glob.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "quantsched/error.hpp"
#include "quantsched/instance.hpp"
#include "quantsched/methods.hpp"
#include "quantsched/mip.hpp"
#include "quantsched/quantile.hpp"
#include "quantsched/report.hpp"
#include "quantsched/subset_cuts.hpp"

using namespace quantsched;

namespace {

constexpr int kSuccess = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

// Unreadable files, undecodable inputs and bad flag values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string instance;
  std::vector<std::string> instances;
  std::string solution;
  std::string method = "cgen";
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  std::int64_t node_limit = 1000000;
  double time_limit = kInfinity;
  double gap = 1e-6;
  std::string format = "text";
  std::string out;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes to `path`, or to standard output when it is empty.
void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write '" + path + "'");
}

Instance load_instance(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return parse_instance(text);
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

Schedule load_schedule(const Instance& inst, const std::string& path) {
  const std::string text = read_text(path);
  try {
    Schedule sched = parse_schedule(text);
    schedule_starts(inst, sched);  // rejects unknown or missing interventions
    return sched;
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

TableFormat format_of(const Options& opt) {
  const auto format = parse_format(opt.format);
  if (!format) throw UsageError("unknown format '" + opt.format + "'");
  return *format;
}

Method method_of(const std::string& name) {
  const auto method = parse_method(name);
  if (!method) throw UsageError("unknown method '" + name + "'");
  return *method;
}

MethodConfig config_of(const Options& opt, Method method) {
  MethodConfig config;
  config.method = method;
  config.mip.node_limit = opt.node_limit;
  config.mip.time_limit = opt.time_limit;
  config.mip.relative_gap = opt.gap;
  return config;
}

std::string describe(const Violation& v) {
  std::string line = v.entity;
  if (v.t > 0) line += " t=" + std::to_string(v.t);
  return line + ": " + v.message + "\n";
}

int cmd_validate(const Options& opt) {
  const std::string text = read_text(opt.instance);
  ValidationReport report;
  try {
    report = validate(parse_instance_document(text));
  } catch (const ParseError& e) {
    report.push_back({opt.instance, e.what()});
  }
  if (report.empty()) {
    write_output(opt.out, "OK\n");
    return kSuccess;
  }
  std::string out;
  for (const auto& issue : report) out += issue.entity + ": " + issue.message + "\n";
  write_output(opt.out, out);
  return kDomainFailure;
}

int cmd_evaluate(const Options& opt) {
  const Instance inst = load_instance(opt.instance);
  const Schedule sched = load_schedule(inst, opt.solution);
  const auto violations = check_feasibility(inst, sched);
  std::string out = render_breakdown(evaluate(inst, sched), format_of(opt));
  if (!violations.empty()) {
    std::string report = "infeasible schedule:\n";
    for (const auto& v : violations) report += "  " + describe(v);
    std::cerr << report;
  }
  write_output(opt.out, out);
  return violations.empty() ? kSuccess : kDomainFailure;
}

int cmd_solve(const Options& opt) {
  const Instance inst = load_instance(opt.instance);
  const MethodResult r = solve_method(inst, config_of(opt, method_of(opt.method)));
  std::string summary = "method " + std::string(method_name(r.method)) + "\n";
  summary += "status " + std::string(status_name(r.status)) + "\n";
  if (r.has_schedule()) {
    summary += "objective " + format_number(r.objective) + "\n";
    summary += "bound " + format_number(r.lower_bound) + "\n";
    char gap[64];
    std::snprintf(gap, sizeof gap, "%.2f%%", 100.0 * r.gap);
    summary += "gap " + std::string(gap) + "\n";
  }
  summary += "root_bound " + format_number(r.root_bound) + "\n";
  summary += "nodes " + std::to_string(r.nodes) + "\n";
  for (const auto& [family, count] : r.cuts) summary += "cuts " + family + " " + std::to_string(count) + "\n";
  for (const auto& line : r.log) summary += "note " + line + "\n";
  char seconds[64];
  std::snprintf(seconds, sizeof seconds, "seconds %.3f\n", r.seconds);
  if (!r.has_schedule()) {
    std::cout << summary << seconds;
    std::cerr << "no schedule found\n";
    return kDomainFailure;
  }
  const std::string solution = serialize_schedule(inst, r.schedule);
  if (opt.out.empty()) {
    std::cout << summary << seconds << "\n" << solution;
  } else {
    write_output(opt.out, solution);
    std::cout << summary << seconds;
  }
  return kSuccess;
}

std::string render_cut(const RiskMatrix& a, Timestep t, const SubsetCut& cut) {
  std::string row = "  " + std::string(family_name(cut.family)) + ": " + y_name(t) + " >= " +
                    format_number(cut.constant);
  for (int j = 0; j < a.cols; ++j) {
    if (cut.coefficients[j] == 0.0) continue;
    row += " + " + format_number(cut.coefficients[j]) + " " +
           x_name(a.columns[j].intervention, a.columns[j].start);
  }
  return row + "\n";
}

// Cuts of every subset family at the binary point of a schedule, per timestep.
int cmd_separate(const Options& opt) {
  const Instance inst = load_instance(opt.instance);
  const Schedule sched = load_schedule(inst, opt.solution);
  const auto starts = schedule_starts(inst, sched);
  std::string out;
  for (Timestep t = 1; t <= inst.horizon; ++t) {
    const RiskMatrix a = risk_matrix(inst, t);
    const int k = tau_to_k(a.rows, inst.tau);
    std::vector<double> x(a.cols, 0.0);
    for (int j = 0; j < a.cols; ++j) x[j] = starts[a.columns[j].intervention] == a.columns[j].start ? 1.0 : 0.0;
    out += "t=" + std::to_string(t) + " k=" + std::to_string(k) + " q=" + format_number(q_k(a.multiply(x), k)) + "\n";
    if (a.cols == 0) continue;
    out += render_cut(a, t, simple_generated_cut(a, k, x));
    out += render_cut(a, t, generated_subset_cut(a, k, x));
    out += render_cut(a, t, separate_subset_bestfirst(a, k, x, 64, opt.seed));
    out += render_cut(a, t, separate_general_exhaustive(a, k, x));
  }
  write_output(opt.out, out);
  return kSuccess;
}

// LP-format model of a method before branching: root cuts included, lazy
// cuts absent. Indicators are kept for the full models.
int cmd_export(const Options& opt) {
  const Instance inst = load_instance(opt.instance);
  const Method method = method_of(opt.method);
  const bool full = method == Method::kFull || method == Method::kFullS || method == Method::kFullC;
  Model model = full ? build_full(inst) : build_base(inst);
  if (method == Method::kFullS || method == Method::kCGenS) add_root_subset_cuts(model, inst);
  if (method == Method::kFullC) run_quantile_cut_loop(model, inst, risk_upper_bounds(inst));
  write_output(opt.out, export_lp_format(model));
  return kSuccess;
}

int cmd_generate(const Options& opt) {
  const GeneratedInstance g = generate_synthetic({}, opt.seed);
  write_output(opt.out, serialize_instance(g.instance));
  if (!opt.solution.empty()) write_output(opt.solution, serialize_schedule(g.instance, g.planted));
  return kSuccess;
}

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> paths;
  for (const auto& pattern : patterns) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc == GLOB_NOMATCH) throw UsageError("no instance matches '" + pattern + "'");
    if (rc != 0) throw UsageError("cannot expand '" + pattern + "'");
  }
  return paths;
}

std::string stem(const std::string& path) {
  const size_t slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const size_t dot = name.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

int cmd_bench(const Options& opt) {
  const TableFormat format = format_of(opt);
  std::vector<Method> methods;
  for (const auto& name : opt.methods) methods.push_back(method_of(name));
  if (methods.empty()) methods = all_methods();
  const auto paths = expand(opt.instances);
  std::vector<Instance> instances;
  for (const auto& path : paths) instances.push_back(load_instance(path));

  std::vector<BenchCell> cells;
  for (size_t i = 0; i < instances.size(); ++i) {
    for (Method m : methods) {
      BenchCell cell;
      try {
        cell = make_cell(stem(paths[i]), solve_method(instances[i], config_of(opt, m)));
      } catch (const Error& e) {
        cell.instance = stem(paths[i]);
        cell.method = m;
        std::cerr << cell.instance << " " << method_name(m) << ": " << e.what() << "\n";
      }
      // Runtimes go to the console only; the table stays reproducible.
      std::fprintf(opt.out.empty() ? stderr : stdout, "%s %s %.3fs\n", cell.instance.c_str(),
                   std::string(method_name(m)).c_str(), cell.seconds);
      cells.push_back(std::move(cell));
    }
  }
  write_output(opt.out, render_bench(cells, format));
  return kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile-objective maintenance scheduling"};
  app.require_subcommand(1);
  Options opt;

  auto add_limits = [&](CLI::App* cmd) {
    cmd->add_option("--node-limit", opt.node_limit, "Branch-and-bound node limit")->check(CLI::PositiveNumber);
    cmd->add_option("--time-limit", opt.time_limit, "Wall-clock limit in seconds")->check(CLI::NonNegativeNumber);
    cmd->add_option("--gap", opt.gap, "Relative optimality gap to stop at")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", opt.seed, "Seed for randomized steps");
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check an instance document");
  validate_cmd->add_option("--instance", opt.instance, "Instance JSON")->required();
  validate_cmd->add_option("--out", opt.out, "Report path (default: stdout)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Objective breakdown of a schedule");
  evaluate_cmd->add_option("--instance", opt.instance, "Instance JSON")->required();
  evaluate_cmd->add_option("--solution", opt.solution, "Solution file")->required();
  evaluate_cmd->add_option("--format", opt.format, "text, csv or markdown");
  evaluate_cmd->add_option("--out", opt.out, "Output path (default: stdout)");

  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance with one method");
  solve_cmd->add_option("--instance", opt.instance, "Instance JSON")->required();
  solve_cmd->add_option("--method", opt.method, "full, full+C, full+S, cgen, cgen+S or cgen+O");
  solve_cmd->add_option("--out", opt.out, "Solution path (default: stdout)");
  add_limits(solve_cmd);

  auto* separate_cmd = app.add_subcommand("separate", "Print subset cuts at a schedule");
  separate_cmd->add_option("--instance", opt.instance, "Instance JSON")->required();
  separate_cmd->add_option("--solution", opt.solution, "Solution file")->required();
  separate_cmd->add_option("--seed", opt.seed, "Seed of the best-first search");
  separate_cmd->add_option("--out", opt.out, "Output path (default: stdout)");

  auto* export_cmd = app.add_subcommand("export", "Write a method's root model in LP format");
  export_cmd->add_option("--instance", opt.instance, "Instance JSON")->required();
  export_cmd->add_option("--method", opt.method, "full, full+C, full+S, cgen, cgen+S or cgen+O");
  export_cmd->add_option("--out", opt.out, "LP path (default: stdout)");

  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic desk-scale instance");
  generate_cmd->add_option("--seed", opt.seed, "Generator seed");
  generate_cmd->add_option("--out", opt.out, "Instance path (default: stdout)");
  generate_cmd->add_option("--solution", opt.solution, "Also write the planted feasible schedule here");

  auto* bench_cmd = app.add_subcommand("bench", "Gap table over instances and methods");
  bench_cmd->add_option("--instance", opt.instances, "Instance paths or glob patterns")->required();
  bench_cmd->add_option("--method", opt.methods, "Methods to run (default: all)");
  bench_cmd->add_option("--format", opt.format, "text, csv or markdown");
  bench_cmd->add_option("--out", opt.out, "Table path (default: stdout)");
  add_limits(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*validate_cmd) return cmd_validate(opt);
    if (*evaluate_cmd) return cmd_evaluate(opt);
    if (*solve_cmd) return cmd_solve(opt);
    if (*separate_cmd) return cmd_separate(opt);
    if (*export_cmd) return cmd_export(opt);
    if (*generate_cmd) return cmd_generate(opt);
    if (*bench_cmd) return cmd_bench(opt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  return kUsageError;
}
