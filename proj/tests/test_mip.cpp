#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "quantsched/error.hpp"
#include "quantsched/mip.hpp"
#include "quantsched/quantile.hpp"

using namespace quantsched;

namespace {

// y >= Q_k(x) for x fixed through its bounds; returns the model and y.
std::pair<Model, int> fixed_gadget(const std::vector<double>& x, int k) {
  Model m;
  std::vector<std::vector<LinearTerm>> bodies;
  for (size_t i = 0; i < x.size(); ++i) {
    const int v = m.add_variable("x" + std::to_string(i), VarKind::kContinuous, x[i], x[i]);
    bodies.push_back({{v, 1.0}});
  }
  const int y = m.add_variable("y", VarKind::kContinuous, 0.0, kInfinity, 1.0);
  add_quantile_gadget(m, y, bodies, k, "t");
  return {m, y};
}

}  // namespace

TEST_CASE("model bookkeeping") {
  Model m;
  const int a = m.add_binary("a", 2.0);
  CHECK(m.variable("a") == a);
  CHECK_FALSE(m.find_variable("b"));
  CHECK_THROWS_AS(m.add_binary("a"), InvalidArgument);
  CHECK_THROWS_AS(m.variable("b"), InvalidArgument);
  CHECK_THROWS_AS(m.add_constraint({"c", {{3, 1.0}}, Relation::kEqual, 0.0}), InvalidArgument);
  const int c = m.add_variable("c", VarKind::kContinuous, 0, 1);
  CHECK_THROWS_AS(m.add_indicator({c, 1, {"i", {{a, 1.0}}, Relation::kGreaterEqual, 0.0}}),
                  InvalidArgument);
}

TEST_CASE("to_bigm leaves indicator-free models unchanged") {
  Model m;
  m.add_binary("a", 1.0);
  m.add_constraint({"c", {{0, 1.0}}, Relation::kLessEqual, 1.0});
  for (auto variant : {BigMVariant::kActivate, BigMVariant::kDeactivate}) {
    const Model out = to_bigm(m, variant);
    CHECK(export_lp_format(out) == export_lp_format(m));
  }
}

TEST_CASE("quantile gadget with k = 1 gives the maximum") {
  const std::vector<double> x{0.5, 3.0, 2.0};
  auto [m, y] = fixed_gadget(x, 1);
  CHECK(m.indicators().empty());
  const auto sol = solve_mip(m);
  REQUIRE(sol.status == MipStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("quantile gadget n=4 k=2 at x=(2,1,1,0) has minimum 1") {
  auto [m, y] = fixed_gadget({2, 1, 1, 0}, 2);
  CHECK(oracle::indicator_minimum(m, y) == 1.0);
  for (auto variant : {BigMVariant::kActivate, BigMVariant::kDeactivate}) {
    const auto sol = solve_mip(to_bigm(m, variant));
    REQUIRE(sol.status == MipStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("big-M variants and indicator semantics all reproduce q_k") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = size(rng);
    std::vector<double> x(n);
    for (auto& v : x) v = bit(rng);
    std::uniform_int_distribution<int> pick_k(1, n);
    const int k = pick_k(rng);
    auto [m, y] = fixed_gadget(x, k);
    const double expected = q_k(x, k);
    if (k > 1) CHECK(oracle::indicator_minimum(m, y) == expected);
    for (auto variant : {BigMVariant::kActivate, BigMVariant::kDeactivate}) {
      const auto sol = solve_mip(to_bigm(m, variant));
      REQUIRE(sol.status == MipStatus::kOptimal);
      CHECK(std::abs(sol.objective - expected) < 1e-9);
    }
  }
}

TEST_CASE("deactivate variant complements guards in every row and the objective") {
  Model m;
  const int g = m.add_binary("g", 3.0);
  const int z = m.add_variable("z", VarKind::kContinuous, 0.0, 5.0, 1.0);
  m.add_constraint({"link", {{g, 2.0}, {z, 1.0}}, Relation::kLessEqual, 4.0});
  m.add_indicator({g, 1, {"ind", {{z, 1.0}}, Relation::kGreaterEqual, 2.0}});
  const Model out = to_bigm(m, BigMVariant::kDeactivate);
  CHECK(out.variables()[g].name == "g_off");
  CHECK(out.objective()[g] == -3.0);
  CHECK(out.objective_constant == 3.0);
  // Both forms describe the same points: g=1,z=2 (cost 5) is optimal.
  Model forced = m;
  forced.variables()[g].lower = 1.0;
  const auto a = solve_mip(to_bigm(forced, BigMVariant::kActivate));
  const auto d = solve_mip(to_bigm(forced, BigMVariant::kDeactivate));
  CHECK(a.objective == doctest::Approx(5.0));
  CHECK(d.objective == doctest::Approx(5.0));
  CHECK(solve_mip(to_bigm(m, BigMVariant::kDeactivate)).objective == doctest::Approx(0.0));
}

TEST_CASE("to_bigm rejects bodies without finite bounds") {
  Model m;
  const int g = m.add_binary("g");
  const int z = m.add_variable("z", VarKind::kContinuous, -kInfinity, kInfinity);
  m.add_indicator({g, 1, {"ind", {{z, 1.0}}, Relation::kGreaterEqual, 2.0}});
  CHECK_THROWS_AS(to_bigm(m, BigMVariant::kActivate), InvalidArgument);
  CHECK_THROWS_AS(relaxation(m), InvalidArgument);
}

TEST_CASE("to_bigm preserves the binary feasible set on random indicator models") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int trial = 0; trial < 40; ++trial) {
    Model m;
    const int nb = 4;
    for (int j = 0; j < nb; ++j) m.add_binary("b" + std::to_string(j), coef(rng));
    const int z = m.add_variable("z", VarKind::kContinuous, -4.0, 6.0, 1.0);
    for (int r = 0; r < 3; ++r) {
      Constraint body{"i" + std::to_string(r), {{z, 1.0}, {r, static_cast<double>(coef(rng))}},
                      r == 1 ? Relation::kLessEqual : Relation::kGreaterEqual,
                      static_cast<double>(coef(rng))};
      m.add_indicator({r, r % 2, body});
    }
    m.add_constraint({"cap", {{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, Relation::kLessEqual, 3.0});
    // Oracle: for each binary pattern, the best z is the smallest value
    // meeting the enforced bodies.
    double best = kInfinity;
    for (int mask = 0; mask < (1 << nb); ++mask) {
      std::vector<double> v(m.num_vars(), 0.0);
      for (int j = 0; j < nb; ++j) v[j] = (mask >> j) & 1;
      if (m.constraints()[0].violation(v) > 0) continue;
      double lo = -4.0;
      double hi = 6.0;
      for (const auto& ind : m.indicators()) {
        if (v[ind.guard] != ind.active_value) continue;
        const double other = ind.body.terms[1].coef * v[ind.body.terms[1].var];
        if (ind.body.terms[1].var == z) continue;
        const double bound = ind.body.rhs - other;
        if (ind.body.relation == Relation::kGreaterEqual) lo = std::max(lo, bound);
        else hi = std::min(hi, bound);
      }
      if (lo > hi + 1e-12) continue;
      best = std::min(best, m.objective_value(v) + lo);
    }
    for (auto variant : {BigMVariant::kActivate, BigMVariant::kDeactivate}) {
      const auto sol = solve_mip(to_bigm(m, variant));
      if (best == kInfinity) {
        CHECK(sol.status == MipStatus::kInfeasible);
      } else {
        REQUIRE(sol.status == MipStatus::kOptimal);
        CHECK(sol.objective == doctest::Approx(best));
      }
    }
  }
}

TEST_CASE("LP-integral model is solved at the root") {
  Model m;
  m.add_binary("a", -1.0);
  m.add_binary("b", -1.0);
  m.add_constraint({"c", {{0, 1.0}, {1, 1.0}}, Relation::kLessEqual, 2.0});
  const auto sol = solve_mip(m);
  CHECK(sol.status == MipStatus::kOptimal);
  CHECK(sol.nodes == 1);
  CHECK(sol.objective == -2.0);
  CHECK(sol.gap() == 0.0);
}

TEST_CASE("binary knapsacks match exhaustive enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> w(1, 9);
  for (int trial = 0; trial < 50; ++trial) {
    Model m;
    std::vector<double> value(6), weight(6);
    Constraint cap{"cap", {}, Relation::kLessEqual, 0.0};
    Constraint side{"side", {}, Relation::kGreaterEqual, 1.0};
    for (int j = 0; j < 6; ++j) {
      value[j] = w(rng);
      weight[j] = w(rng);
      m.add_binary("x" + std::to_string(j), -value[j]);
      cap.terms.push_back({j, weight[j]});
      if (j % 2 == 0) side.terms.push_back({j, 1.0});
    }
    cap.rhs = w(rng) + w(rng);
    m.add_constraint(cap);
    m.add_constraint(side);
    double best = kInfinity;
    for (int mask = 0; mask < 64; ++mask) {
      std::vector<double> v(6);
      for (int j = 0; j < 6; ++j) v[j] = (mask >> j) & 1;
      if (cap.violation(v) > 0 || side.violation(v) > 0) continue;
      best = std::min(best, m.objective_value(v));
    }
    const auto sol = solve_mip(m);
    if (best == kInfinity) {
      CHECK(sol.status == MipStatus::kInfeasible);
      continue;
    }
    REQUIRE(sol.status == MipStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(best));
    CHECK(sol.lower_bound <= sol.objective + 1e-9);
    for (size_t i = 1; i < sol.bound_trace.size(); ++i) {
      CHECK(sol.bound_trace[i] >= sol.bound_trace[i - 1]);
    }
    CHECK(sol.bound_trace.back() <= best + 1e-9);
  }
}

TEST_CASE("node limit reports the remaining gap honestly") {
  Model m;
  Constraint cap{"cap", {}, Relation::kLessEqual, 17.5};
  for (int j = 0; j < 12; ++j) {
    m.add_binary("x" + std::to_string(j), -(3.0 + j % 5));
    cap.terms.push_back({j, 2.0 + (j * 7) % 5});
  }
  m.add_constraint(cap);
  MipConfig config;
  config.node_limit = 3;
  const auto sol = solve_mip(m, config);
  CHECK(sol.nodes == 3);
  CHECK((sol.status == MipStatus::kFeasible || sol.status == MipStatus::kLimit));
  if (sol.has_incumbent()) CHECK(sol.gap() >= 0.0);
}

TEST_CASE("lazy cuts converge to the exact quantile optimum") {
  // min y + sum c x with y >= max over three scenario rows, modelled only
  // through lazily added no-good style rows.
  const std::vector<std::vector<double>> a{{4, 1, 3, 0}, {0, 5, 1, 2}, {2, 2, 2, 2}};
  const std::vector<double> cost{1, -1, 0, 0.5};
  Model m;
  for (int j = 0; j < 4; ++j) m.add_binary("x" + std::to_string(j), cost[j]);
  const int y = m.add_variable("y", VarKind::kContinuous, 0.0, kInfinity, 1.0);
  m.add_constraint({"two", {{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, Relation::kEqual, 2.0});
  int calls = 0;
  SolveCallbacks cb;
  cb.on_incumbent = [&](std::span<const double> x) {
    ++calls;
    std::vector<Constraint> cuts;
    for (const auto& row : a) {
      double r = 0.0;
      for (int j = 0; j < 4; ++j) r += row[j] * x[j];
      if (x[y] < r - 1e-6) {
        Constraint c{"lazy", {{y, 1.0}}, Relation::kGreaterEqual, 0.0};
        for (int j = 0; j < 4; ++j) c.terms.push_back({j, -row[j]});
        cuts.push_back(c);
      }
    }
    return cuts;
  };
  const auto sol = solve_mip(m, {}, cb);
  double best = kInfinity;
  for (int mask = 0; mask < 16; ++mask) {
    if (std::popcount(static_cast<unsigned>(mask)) != 2) continue;
    double mx = 0.0;
    double c = 0.0;
    for (const auto& row : a) {
      double r = 0.0;
      for (int j = 0; j < 4; ++j) r += row[j] * ((mask >> j) & 1);
      mx = std::max(mx, r);
    }
    for (int j = 0; j < 4; ++j) c += cost[j] * ((mask >> j) & 1);
    best = std::min(best, mx + c);
  }
  REQUIRE(sol.status == MipStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(best));
  CHECK(sol.rejected_incumbents <= 6);
  CHECK(sol.cuts_added > 0);
}

TEST_CASE("empty model exports header and footer only") {
  CHECK(export_lp_format(Model{}) == "Minimize\n obj:\nSubject To\nEnd\n");
  const Model back = parse_lp_format("Minimize\n obj:\nSubject To\nEnd\n");
  CHECK(back.num_vars() == 0);
}

TEST_CASE("one binary, one constraint export matches the golden file") {
  Model m;
  m.add_binary("x", 2.5);
  m.add_constraint({"c1", {{0, 1.0}}, Relation::kLessEqual, 1.0});
  std::ifstream in(std::string(QUANTSCHED_GOLDEN_DIR) + "/one_binary.lp");
  REQUIRE(in.good());
  std::stringstream golden;
  golden << in.rdbuf();
  CHECK(export_lp_format(m) == golden.str());
}

TEST_CASE("export, import, export is byte-identical") {
  Model m;
  const int a = m.add_binary("a", -1.25);
  const int b = m.add_variable("b", VarKind::kContinuous, -kInfinity, 4.0, 0.1);
  const int c = m.add_variable("c", VarKind::kContinuous, -2.0, kInfinity);
  const int d = m.add_variable("d", VarKind::kContinuous, 0.0, 0.0);
  m.objective_constant = -7.5;
  m.add_constraint({"r1", {{a, 1.0}, {b, -1.0}, {c, 3e-7}}, Relation::kGreaterEqual, -1.0});
  m.add_constraint({"r2", {{b, -1.0}, {d, 1e21}}, Relation::kEqual, 0.3});
  m.add_constraint({"r3", {}, Relation::kLessEqual, 2.0});
  m.add_indicator({a, 0, {"ind", {{c, -1.0}}, Relation::kLessEqual, 5.0}});
  Constraint longrow{"long", {}, Relation::kLessEqual, 1.0};
  for (int j = 0; j < 40; ++j) {
    const int v = m.add_binary("very_long_variable_name_" + std::to_string(j));
    longrow.terms.push_back({v, j % 3 == 0 ? -1.0 : 0.5 * j});
  }
  m.add_constraint(longrow);
  const std::string once = export_lp_format(m);
  const Model back = parse_lp_format(once);
  CHECK(export_lp_format(back) == once);
  CHECK(back.num_vars() == m.num_vars());
  CHECK(back.indicators().size() == 1);
  CHECK(back.indicators()[0].active_value == 0);
  CHECK(back.variables()[b].lower == -kInfinity);
  CHECK(back.objective_constant == -7.5);
}

TEST_CASE("illegal names and malformed LP text are rejected") {
  CHECK(legal_lp_name("x_1_2"));
  CHECK_FALSE(legal_lp_name("1x"));
  CHECK_FALSE(legal_lp_name("a b"));
  CHECK_FALSE(legal_lp_name("a:b"));
  CHECK_FALSE(legal_lp_name("free"));
  CHECK_FALSE(legal_lp_name(""));
  Model m;
  m.add_binary("bad name");
  CHECK_THROWS_AS(export_lp_format(m), InvalidArgument);
  CHECK_THROWS_AS(parse_lp_format("Subject To\nEnd\n"), ParseError);
  CHECK_THROWS_AS(parse_lp_format("Minimize\n obj: x y\nEnd\n"), ParseError);
  CHECK_THROWS_AS(parse_lp_format("Minimize\n obj: x\nSubject To\n c: x >= \nEnd\n"), ParseError);
  CHECK_THROWS_AS(parse_lp_format("Minimize\n obj: x\n"), ParseError);
  CHECK_THROWS_AS(parse_lp_format("Maximize\n obj: x\nEnd\n"), ParseError);
}

TEST_CASE("reader accepts common hand-written forms") {
  const Model m = parse_lp_format(
      "\\ comment line\n"
      "Minimize\n obj: 2x + y\n"
      "Subject To\n c1: x + y >= 1\n x - y <= 3 \\ trailing comment\n"
      "Bounds\n y free\n x <= 4\n"
      "Binaries\nEnd\n");
  REQUIRE(m.num_vars() == 2);
  CHECK(m.constraints()[1].name == "R2");
  CHECK(m.variables()[m.variable("y")].lower == -kInfinity);
  CHECK(m.variables()[m.variable("x")].upper == 4.0);
}
