#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "quantsched/error.hpp"
#include "quantsched/instance.hpp"

namespace quantsched {

namespace {

// Draws are taken straight from the engine (whose output sequence is fixed by
// the standard) so generated documents are identical across toolchains.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : engine_(seed) {}

  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  template <class T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<size_t>(integer(0, static_cast<int>(items.size()) - 1))];
  }

 private:
  std::mt19937_64 engine_;
};

double cents(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

GeneratedInstance generate_synthetic(const GeneratorParams& params, std::uint64_t seed) {
  if (params.min_interventions < 1 || params.max_interventions < params.min_interventions ||
      params.min_horizon < 1 || params.max_horizon < params.min_horizon ||
      params.max_scenarios < 1 || params.max_duration < 1 || params.resources < 0 ||
      params.exclusions < 0 || !(params.max_risk > 0.0)) {
    throw InvalidArgument("generate_synthetic: generator bounds must be positive and ordered");
  }
  Draw draw(seed);
  GeneratedInstance out;
  Instance& inst = out.instance;

  const int n = draw.integer(params.min_interventions, params.max_interventions);
  inst.horizon = draw.integer(params.min_horizon, params.max_horizon);
  const int T = inst.horizon;
  inst.alpha = params.alpha ? *params.alpha : draw.pick(std::vector<double>{0.2, 0.5, 0.8});
  inst.tau = params.tau ? *params.tau : draw.pick(std::vector<double>{0.5, 0.75, 0.9, 0.95});
  for (int t = 0; t < T; ++t) inst.scenario_counts.push_back(draw.integer(1, params.max_scenarios));

  for (int c = 0; c < params.resources; ++c) {
    inst.resources.push_back({"c" + std::to_string(c + 1), std::vector<double>(T, 0.0),
                              std::vector<double>(T, 0.0)});
  }

  for (int i = 0; i < n; ++i) {
    Intervention iv;
    iv.name = "I" + std::to_string(i + 1);
    for (Timestep start = 1; start <= T; ++start) {
      iv.duration[start] = std::min(draw.integer(1, params.max_duration), T);
    }
    // Scenario factors shared across the intervention's starts so scenarios
    // keep a recognizable structure.
    const double base = draw.unit() * params.max_risk;
    for (Timestep start = 1; start <= T; ++start) {
      const int delta = iv.duration[start];
      if (start + delta > T + 1) continue;
      for (Timestep t = start; t < start + delta; ++t) {
        std::vector<double> values;
        for (int s = 0; s < inst.scenario_count(t); ++s) {
          values.push_back(cents(base * 2.0 * draw.unit()));
        }
        iv.risk[t][start] = std::move(values);
        for (const auto& res : inst.resources) {
          const int amount = draw.integer(0, 3);
          if (amount > 0) iv.workload[res.name][t][start] = amount;
        }
      }
    }
    inst.interventions.push_back(std::move(iv));
  }

  std::vector<Timestep> planted(n);
  for (int i = 0; i < n; ++i) {
    planted[i] = draw.pick(inst.admissible_starts(i));
    out.planted.starts[inst.interventions[i].name] = planted[i];
  }

  for (auto& res : inst.resources) {
    for (Timestep t = 1; t <= T; ++t) {
      double usage = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto& wl = inst.interventions[i].workload;
        auto r = wl.find(res.name);
        if (r == wl.end()) continue;
        auto at_t = r->second.find(t);
        if (at_t == r->second.end()) continue;
        auto amount = at_t->second.find(planted[i]);
        if (amount != at_t->second.end()) usage += amount->second;
      }
      res.upper[t - 1] = usage + draw.integer(0, 2);
      res.lower[t - 1] = draw.chance(0.3) ? std::max(0.0, usage - draw.integer(0, 1)) : 0.0;
    }
  }

  std::set<std::pair<int, int>> used;
  for (int e = 0; e < params.exclusions && n >= 2; ++e) {
    const int a = draw.integer(0, n - 1);
    int b = draw.integer(0, n - 2);
    if (b >= a) ++b;
    if (!used.insert({std::min(a, b), std::max(a, b)}).second) continue;
    std::vector<Timestep> allowed;
    for (Timestep t = 1; t <= T; ++t) {
      if (!(inst.covers(a, planted[a], t) && inst.covers(b, planted[b], t))) allowed.push_back(t);
    }
    if (allowed.empty()) continue;
    Exclusion ex{inst.interventions[a].name, inst.interventions[b].name, {}};
    std::set<Timestep> chosen;
    const int count = draw.integer(1, std::min<int>(2, static_cast<int>(allowed.size())));
    while (static_cast<int>(chosen.size()) < count) chosen.insert(draw.pick(allowed));
    ex.timesteps.assign(chosen.begin(), chosen.end());
    inst.exclusions.push_back(std::move(ex));
  }
  return out;
}

}  // namespace quantsched
