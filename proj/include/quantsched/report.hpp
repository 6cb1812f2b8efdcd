#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantsched/instance.hpp"
#include "quantsched/methods.hpp"

namespace quantsched {

enum class TableFormat { kText, kCsv, kMarkdown };

std::optional<TableFormat> parse_format(std::string_view name);

// One method run on one instance. A missing gap marks a failed cell (no
// incumbent, or the run threw).
struct BenchCell {
  std::string instance;
  Method method = Method::kCGen;
  std::optional<double> gap;  // fraction
  double objective = kInfinity;
  double seconds = 0.0;
};

BenchCell make_cell(std::string instance, const MethodResult& result);

// Instances as rows and methods as columns, both in order of first
// appearance. Text and markdown cells show the gap as a percentage with two
// decimals, "-" for failures; markdown bolds the smallest gap of each row.
// CSV cells hold the raw gap fraction. Runtimes are left out so that tables
// are reproducible.
std::string render_bench(const std::vector<BenchCell>& cells, TableFormat format);

// obj1, obj2 and the blended objective followed by one row per timestep.
// The CSV form carries only the per-timestep rows.
std::string render_breakdown(const ObjectiveBreakdown& breakdown, TableFormat format);

// Shortest round-trip decimal form of `value`; "inf"/"-inf" for infinities.
std::string format_number(double value);

}  // namespace quantsched
