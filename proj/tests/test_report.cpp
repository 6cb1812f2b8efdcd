#include <doctest.h>

#include <fstream>
#include <sstream>

#include "quantsched/report.hpp"

using namespace quantsched;

namespace {

BenchCell cell(std::string instance, Method method, std::optional<double> gap) {
  BenchCell c;
  c.instance = std::move(instance);
  c.method = method;
  c.gap = gap;
  c.objective = gap ? 1.0 : kInfinity;
  c.seconds = 12.5;
  return c;
}

}  // namespace

TEST_CASE("formats parse by name") {
  CHECK(parse_format("text") == TableFormat::kText);
  CHECK(parse_format("csv") == TableFormat::kCsv);
  CHECK(parse_format("markdown") == TableFormat::kMarkdown);
  CHECK_FALSE(parse_format("html").has_value());
}

TEST_CASE("numbers print in shortest round-trip form") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-kInfinity) == "-inf");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("one proven optimum renders as 0.00%") {
  const std::vector<BenchCell> cells{cell("a", Method::kFull, 0.0)};
  CHECK(render_bench(cells, TableFormat::kText) == "instance   full\na         0.00%\n");
  CHECK(render_bench(cells, TableFormat::kCsv) == "instance,full\na,0\n");
  CHECK(render_bench(cells, TableFormat::kMarkdown) ==
        "| instance | full      |\n| -------- | --------: |\n| a        | **0.00%** |\n");
}

TEST_CASE("failures, positive gaps and per-row best") {
  const std::vector<BenchCell> cells{
      cell("b", Method::kCGen, 0.125), cell("b", Method::kFull, std::nullopt),
      cell("a", Method::kCGen, 0.5),   cell("a", Method::kFull, 0.25),
  };
  const std::string md = render_bench(cells, TableFormat::kMarkdown);
  CHECK(md ==
        "| instance | cgen       | full       |\n"
        "| -------- | ---------: | ---------: |\n"
        "| b        | **12.50%** | -          |\n"
        "| a        | 50.00%     | **25.00%** |\n");
  CHECK(render_bench(cells, TableFormat::kCsv) == "instance,cgen,full\nb,0.125,-\na,0.5,0.25\n");
  // Runtimes never reach the table.
  CHECK(render_bench(cells, TableFormat::kText).find("12.5 ") == std::string::npos);
  CHECK(render_bench({}, TableFormat::kCsv) == "instance\n");
}

TEST_CASE("cells come from method results") {
  MethodResult r;
  r.method = Method::kFullS;
  r.seconds = 0.5;
  BenchCell failed = make_cell("x", r);
  CHECK_FALSE(failed.gap.has_value());
  r.starts = {1};
  r.gap = 0.02;
  r.objective = 3.0;
  const BenchCell ok = make_cell("x", r);
  CHECK(ok.gap == 0.02);
  CHECK(ok.objective == 3.0);
  CHECK(ok.method == Method::kFullS);
  CHECK(ok.seconds == 0.5);
}

TEST_CASE("breakdown tables") {
  ObjectiveBreakdown b;
  b.mean_risk = {2.5, 0.0};
  b.quantile = {4.0, 0.0};
  b.excess = {1.5, 0.0};
  b.obj1 = 1.25;
  b.obj2 = 0.75;
  b.blended = 1.0;
  CHECK(render_breakdown(b, TableFormat::kCsv) == "t,mean_risk,quantile,excess\n1,2.5,4,1.5\n2,0,0,0\n");
  const std::string text = render_breakdown(b, TableFormat::kText);
  CHECK(text.rfind("obj1 1.250000\nobj2 0.750000\nblended 1.000000\n\n", 0) == 0);
  CHECK(text.find("1   2.500000  4.000000  1.500000") != std::string::npos);
}
