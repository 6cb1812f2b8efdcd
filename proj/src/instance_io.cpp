#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "quantsched/error.hpp"
#include "quantsched/instance.hpp"

namespace quantsched {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Timestep parse_timestep_key(const std::string& key, const std::string& where) {
  Timestep t = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), t);
  if (ec != std::errc() || ptr != key.data() + key.size() || key.empty()) {
    throw ParseError(where + ": key '" + key + "' is not a decimal timestep");
  }
  return t;
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> as_number_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, where));
  return out;
}

const json& as_object(const json& v, const std::string& where) {
  if (!v.is_object()) throw ParseError(where + ": expected an object");
  return v;
}

Intervention parse_intervention(const json& obj, size_t index) {
  Intervention iv;
  const std::string where = "interventions[" + std::to_string(index) + "]";
  iv.name = as_string(require(obj, "name", where), where + ".name");
  const std::string named = "intervention '" + iv.name + "'";

  for (const auto& [key, value] : as_object(require(obj, "duration", named), named).items()) {
    iv.duration[parse_timestep_key(key, named + ".duration")] =
        as_int(value, named + ".duration");
  }
  for (const auto& [res, by_t] : as_object(require(obj, "workload", named), named).items()) {
    const std::string w = named + ".workload." + res;
    for (const auto& [tkey, by_start] : as_object(by_t, w).items()) {
      const Timestep t = parse_timestep_key(tkey, w);
      for (const auto& [skey, amount] : as_object(by_start, w).items()) {
        iv.workload[res][t][parse_timestep_key(skey, w)] = as_number(amount, w);
      }
    }
  }
  for (const auto& [tkey, by_start] : as_object(require(obj, "risk", named), named).items()) {
    const std::string w = named + ".risk";
    const Timestep t = parse_timestep_key(tkey, w);
    for (const auto& [skey, values] : as_object(by_start, w).items()) {
      iv.risk[t][parse_timestep_key(skey, w)] = as_number_array(values, w);
    }
  }
  return iv;
}

}  // namespace

Instance parse_instance_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }

  Instance inst;
  const std::string top = "document";
  inst.horizon = as_int(require(doc, "horizon", top), "horizon");
  inst.alpha = as_number(require(doc, "alpha", top), "alpha");
  inst.tau = as_number(require(doc, "tau", top), "tau");
  const auto& counts = require(doc, "scenario_counts", top);
  if (!counts.is_array()) throw ParseError("scenario_counts: expected an array");
  for (const auto& c : counts) inst.scenario_counts.push_back(as_int(c, "scenario_counts"));

  const auto& resources = require(doc, "resources", top);
  if (!resources.is_array()) throw ParseError("resources: expected an array");
  for (size_t r = 0; r < resources.size(); ++r) {
    const std::string where = "resources[" + std::to_string(r) + "]";
    Resource res;
    res.name = as_string(require(resources[r], "name", where), where + ".name");
    res.lower = as_number_array(require(resources[r], "lower", where), where + ".lower");
    res.upper = as_number_array(require(resources[r], "upper", where), where + ".upper");
    inst.resources.push_back(std::move(res));
  }

  const auto& interventions = require(doc, "interventions", top);
  if (!interventions.is_array()) throw ParseError("interventions: expected an array");
  for (size_t i = 0; i < interventions.size(); ++i) {
    inst.interventions.push_back(parse_intervention(interventions[i], i));
  }

  const auto& exclusions = require(doc, "exclusions", top);
  if (!exclusions.is_array()) throw ParseError("exclusions: expected an array");
  for (size_t e = 0; e < exclusions.size(); ++e) {
    const std::string where = "exclusions[" + std::to_string(e) + "]";
    Exclusion ex;
    ex.first = as_string(require(exclusions[e], "first", where), where + ".first");
    ex.second = as_string(require(exclusions[e], "second", where), where + ".second");
    const auto& steps = require(exclusions[e], "timesteps", where);
    if (!steps.is_array()) throw ParseError(where + ".timesteps: expected an array");
    for (const auto& t : steps) ex.timesteps.push_back(as_int(t, where + ".timesteps"));
    inst.exclusions.push_back(std::move(ex));
  }
  return inst;
}

Instance parse_instance(std::string_view text) {
  Instance inst = parse_instance_document(text);
  const auto report = validate(inst);
  if (!report.empty()) {
    std::string msg = "invalid instance:";
    for (const auto& item : report) msg += "\n  " + item.entity + ": " + item.message;
    throw SemanticError(msg);
  }
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  ordered_json doc;
  doc["horizon"] = inst.horizon;
  doc["alpha"] = inst.alpha;
  doc["tau"] = inst.tau;
  doc["scenario_counts"] = inst.scenario_counts;
  doc["resources"] = ordered_json::array();
  for (const auto& res : inst.resources) {
    ordered_json r;
    r["name"] = res.name;
    r["lower"] = res.lower;
    r["upper"] = res.upper;
    doc["resources"].push_back(std::move(r));
  }
  doc["interventions"] = ordered_json::array();
  for (const auto& iv : inst.interventions) {
    ordered_json o;
    o["name"] = iv.name;
    o["duration"] = ordered_json::object();
    for (const auto& [start, delta] : iv.duration) o["duration"][std::to_string(start)] = delta;
    o["workload"] = ordered_json::object();
    for (const auto& [res, by_t] : iv.workload) {
      ordered_json w = ordered_json::object();
      for (const auto& [t, by_start] : by_t) {
        ordered_json s = ordered_json::object();
        for (const auto& [start, amount] : by_start) s[std::to_string(start)] = amount;
        w[std::to_string(t)] = std::move(s);
      }
      o["workload"][res] = std::move(w);
    }
    o["risk"] = ordered_json::object();
    for (const auto& [t, by_start] : iv.risk) {
      ordered_json s = ordered_json::object();
      for (const auto& [start, values] : by_start) s[std::to_string(start)] = values;
      o["risk"][std::to_string(t)] = std::move(s);
    }
    doc["interventions"].push_back(std::move(o));
  }
  doc["exclusions"] = ordered_json::array();
  for (const auto& ex : inst.exclusions) {
    ordered_json e;
    e["first"] = ex.first;
    e["second"] = ex.second;
    e["timesteps"] = ex.timesteps;
    doc["exclusions"].push_back(std::move(e));
  }
  return doc.dump(1) + "\n";
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

Schedule parse_schedule(std::string_view text) {
  Schedule sched;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string name;
    std::string start_text;
    if (!(fields >> name)) continue;
    std::string extra;
    if (!(fields >> start_text) || (fields >> extra)) {
      throw ParseError("solution line " + std::to_string(line_no) +
                       ": expected '<name> <start>'");
    }
    const Timestep start = parse_timestep_key(start_text, "solution line " + std::to_string(line_no));
    if (!sched.starts.emplace(name, start).second) {
      throw ParseError("solution line " + std::to_string(line_no) + ": intervention '" + name +
                       "' scheduled twice");
    }
  }
  return sched;
}

std::string serialize_schedule(const Instance& inst, const Schedule& sched) {
  std::string out;
  for (const auto& iv : inst.interventions) {
    auto it = sched.starts.find(iv.name);
    if (it == sched.starts.end()) continue;
    out += iv.name + " " + std::to_string(it->second) + "\n";
  }
  return out;
}

}  // namespace quantsched
