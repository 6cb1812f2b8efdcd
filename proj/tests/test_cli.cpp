#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "quantsched/instance.hpp"
#include "quantsched/mip.hpp"

using namespace quantsched;
namespace fs = std::filesystem;

namespace {

const std::string kCli = QUANTSCHED_CLI;
const std::string kData = QUANTSCHED_DATA_DIR;
const std::string kGolden = QUANTSCHED_GOLDEN_DIR;

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args`, capturing standard output; stderr is dropped.
Run cli(const std::string& args) {
  Run run;
  FILE* pipe = ::popen((kCli + " " + args + " 2>/dev/null").c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) run.out.append(buf, n);
  const int status = ::pclose(pipe);
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return run;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "quantsched_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const std::string kInstance = kData + "/corpus/synthetic_03.json";
const std::string kPlanted = kData + "/planted/synthetic_03.sol";

}  // namespace

TEST_CASE("validate") {
  const Run ok = cli("validate --instance " + kInstance);
  CHECK(ok.code == 0);
  CHECK(ok.out == "OK\n");

  std::string text = slurp(kInstance);
  const auto pos = text.find("[", text.find("\"risk\""));
  REQUIRE(pos != std::string::npos);
  text.insert(pos + 1, "-1.5, ");
  // The extra entry also breaks the vector length; both issues are listed.
  const fs::path bad = workdir() / "negative.json";
  spit(bad, text);
  const Run report = cli("validate --instance " + q(bad));
  CHECK(report.code == 1);
  CHECK(report.out.find("negative risk") != std::string::npos);

  CHECK(cli("validate --instance " + q(workdir() / "missing.json")).code == 2);
  CHECK(cli("validate").code == 2);
}

TEST_CASE("evaluate") {
  const Run csv = cli("evaluate --format csv --instance " + kInstance + " --solution " + kPlanted);
  CHECK(csv.code == 0);
  CHECK(csv.out == slurp(kGolden + "/evaluate_synthetic_03.csv"));

  const Instance inst = read_instance_file(kInstance);
  const Schedule planted = parse_schedule(slurp(kPlanted));
  const Run text = cli("evaluate --instance " + kInstance + " --solution " + kPlanted);
  char expected[64];
  std::snprintf(expected, sizeof expected, "blended %.6f\n", evaluate(inst, planted).blended);
  CHECK(text.out.find(expected) != std::string::npos);

  // Any schedule breaking an exclusion: exit 1, objective still printed.
  std::optional<std::vector<int>> clash;
  oracle::for_each_schedule(inst, [&](const std::vector<int>& starts) {
    if (clash) return;
    for (const auto& v : check_feasibility(inst, oracle::to_schedule(inst, starts))) {
      if (v.kind == ViolationKind::kExclusion) clash = starts;
    }
  });
  REQUIRE(clash.has_value());
  const fs::path sol = workdir() / "clash.sol";
  spit(sol, serialize_schedule(inst, oracle::to_schedule(inst, *clash)));
  const Run infeasible = cli("evaluate --instance " + kInstance + " --solution " + q(sol));
  CHECK(infeasible.code == 1);
  CHECK(infeasible.out.find("blended") != std::string::npos);

  const fs::path unknown = workdir() / "unknown.sol";
  spit(unknown, slurp(kPlanted) + "ghost 1\n");
  CHECK(cli("evaluate --instance " + kInstance + " --solution " + q(unknown)).code == 2);
}

TEST_CASE("solve writes reproducible optimal schedules") {
  const Instance inst = read_instance_file(kInstance);
  const auto truth = oracle::enumerate_optimum(inst);
  const fs::path first = workdir() / "first.sol";
  const fs::path second = workdir() / "second.sol";
  const Run r1 = cli("solve --method cgen --instance " + kInstance + " --out " + q(first));
  const Run r2 = cli("solve --method cgen --instance " + kInstance + " --out " + q(second));
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  CHECK(slurp(first) == slurp(second));
  const Schedule found = parse_schedule(slurp(first));
  CHECK(check_feasibility(inst, found).empty());
  CHECK(evaluate(inst, found).blended == doctest::Approx(truth.best).epsilon(1e-6));
  CHECK(r1.out.find("status optimal\n") != std::string::npos);
  CHECK(r1.out.find("gap 0.00%\n") != std::string::npos);

  GeneratorParams one;
  one.max_scenarios = 1;
  const fs::path single = workdir() / "single.json";
  spit(single, serialize_instance(generate_synthetic(one, 4).instance));
  const Run full = cli("solve --method full --instance " + q(single) + " --out " + q(workdir() / "single.sol"));
  CHECK(full.code == 0);
  CHECK(full.out.find("gap 0.00%\n") != std::string::npos);

  CHECK(cli("solve --method nope --instance " + kInstance).code == 2);
  CHECK(cli("solve --instance " + kInstance + " --node-limit -3").code == 2);
}

TEST_CASE("bench tables") {
  const std::string corpus = "'" + kData + "/corpus/*.json'";
  const fs::path md = workdir() / "bench.md";
  const Run run = cli("bench --node-limit 2 --format markdown --instance " + corpus + " --out " + q(md));
  CHECK(run.code == 0);
  CHECK(slurp(md) == slurp(kGolden + "/bench_corpus_nodes2.md"));

  // CSV cells carry raw gaps: compare numerically.
  const fs::path csv = workdir() / "bench.csv";
  CHECK(cli("bench --node-limit 2 --format csv --instance " + corpus + " --out " + q(csv)).code == 0);
  std::istringstream got(slurp(csv));
  std::istringstream want(slurp(kGolden + "/bench_corpus_nodes2.csv"));
  std::string a;
  std::string b;
  while (std::getline(want, b)) {
    REQUIRE(std::getline(got, a));
    std::istringstream ca(a);
    std::istringstream cb(b);
    std::string x;
    std::string y;
    while (std::getline(cb, y, ',')) {
      REQUIRE(std::getline(ca, x, ','));
      if (x == "-" || y == "-" || !std::isdigit(static_cast<unsigned char>(y[0]))) {
        CHECK(x == y);
      } else {
        CHECK(std::stod(x) == doctest::Approx(std::stod(y)).epsilon(1e-9));
      }
    }
  }

  const Run small = cli("bench --format csv --method full --method cgen --instance " + kData +
                        "/corpus/synthetic_01.json " + kData + "/corpus/synthetic_02.json " + kData +
                        "/corpus/synthetic_05.json");
  CHECK(small.code == 0);
  CHECK(small.out == "instance,full,cgen\nsynthetic_01,0,0\nsynthetic_02,0,0\nsynthetic_05,0,0\n");
  CHECK(cli("bench --instance '" + kData + "/nothing_*.json'").code == 2);
  CHECK(cli("bench --format html --instance " + kInstance).code == 2);
}

TEST_CASE("export and generate are deterministic") {
  for (const std::string method : {"full", "full+C", "cgen+S"}) {
    const Run a = cli("export --method " + method + " --instance " + kInstance);
    const Run b = cli("export --method " + method + " --instance " + kInstance);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(export_lp_format(parse_lp_format(a.out)) == a.out);
  }
  const Run g1 = cli("generate --seed 11");
  const Run g2 = cli("generate --seed 11");
  CHECK(g1.code == 0);
  CHECK(g1.out == g2.out);
  CHECK(g1.out == serialize_instance(generate_synthetic({}, 11).instance));
  const Run cuts = cli("separate --instance " + kInstance + " --solution " + kPlanted);
  CHECK(cuts.code == 0);
  CHECK(cuts.out.find("generated-subset: y_1 >= ") != std::string::npos);
}
