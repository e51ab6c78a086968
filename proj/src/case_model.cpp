#include "dscopf/case_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dscopf {

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string out = "invalid case";
  for (const auto& v : violations) out += "\n  " + v.to_string();
  return out;
}

using nlohmann::json;

// Field access with a JSON-pointer style path in every error message.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& at(const std::string& key) const {
    if (!node_.is_object()) fail(path_, "expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) fail(path_ + "/" + key, "missing field");
    return *it;
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(path_ + "/" + key, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(path_ + "/" + key, "not finite");
    return x;
  }

  BusId bus_id(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) fail(path_ + "/" + key, "expected an integer bus id");
    return v.get<BusId>();
  }

  std::string identifier(const std::string& key) const {
    const json& v = at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    fail(path_ + "/" + key, "expected a string or integer id");
  }

  const json& array(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(path_ + "/" + key, "expected an array");
    return v;
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw CaseError("parse error at " + path + ": " + what);
  }

 private:
  const json& node_;
  std::string path_;
};

}  // namespace

CaseError::CaseError(const std::string& message) : std::runtime_error(message) {}

CaseError::CaseError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

std::optional<std::size_t> Case::bus_index(BusId id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Case::branch_index(std::string_view id) const {
  for (std::size_t i = 0; i < branches.size(); ++i)
    if (branches[i].id == id) return i;
  return std::nullopt;
}

const Contingency* Case::find_contingency(std::string_view id) const {
  for (const auto& k : contingencies)
    if (k.id == id) return &k;
  return nullptr;
}

double Case::total_load() const {
  double sum = 0.0;
  for (const auto& b : buses) sum += b.load;
  return sum;
}

Topology::Topology(const Case& c) {
  std::map<BusId, std::size_t> index;
  for (std::size_t i = 0; i < c.buses.size(); ++i) index.emplace(c.buses[i].id, i);
  auto lookup = [&](BusId id) {
    auto it = index.find(id);
    if (it == index.end()) throw ContractViolation("unknown bus " + std::to_string(id));
    return it->second;
  };

  incident.resize(c.buses.size());
  bus_generators.resize(c.buses.size());
  branch_from.reserve(c.branches.size());
  branch_to.reserve(c.branches.size());
  for (std::size_t b = 0; b < c.branches.size(); ++b) {
    const std::size_t f = lookup(c.branches[b].from);
    const std::size_t t = lookup(c.branches[b].to);
    branch_from.push_back(f);
    branch_to.push_back(t);
    incident[f].push_back({b, true});
    incident[t].push_back({b, false});
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g)
    bus_generators[lookup(c.generators[g].bus)].push_back(g);
}

bool is_connected(const Case& c, std::optional<std::size_t> removed) {
  const std::size_t n = c.buses.size();
  if (n <= 1) return true;
  std::map<BusId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(c.buses[i].id, i);

  // Union-find over bus indices; branches with dangling ends are ignored.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t b = 0; b < c.branches.size(); ++b) {
    if (removed && *removed == b) continue;
    auto f = index.find(c.branches[b].from);
    auto t = index.find(c.branches[b].to);
    if (f == index.end() || t == index.end()) continue;
    std::size_t rf = find(f->second), rt = find(t->second);
    if (rf != rt) {
      parent[rf] = rt;
      --components;
    }
  }
  return components == 1;
}

Scenario base_scenario(const Case& c) {
  Scenario s;
  s.id = std::string(kBaseScenario);
  s.capacity.reserve(c.branches.size());
  for (const auto& br : c.branches) s.capacity.push_back(br.capacity);
  return s;
}

Scenario apply_contingency(const Case& c, std::string_view contingency_id) {
  const Contingency* k = c.find_contingency(contingency_id);
  if (!k) throw ContractViolation("unknown contingency '" + std::string(contingency_id) + "'");
  auto b = c.branch_index(k->outaged_branch);
  if (!b) throw ContractViolation("contingency " + k->id + " references unknown branch");
  if (!is_connected(c, *b))
    throw IslandingError("contingency " + k->id + " (branch " + k->outaged_branch +
                         ") islands the network");
  Scenario s = base_scenario(c);
  s.id = k->id;
  s.outaged = *b;
  s.capacity[*b] = 0.0;
  return s;
}

std::vector<Violation> validate_case(const Case& c) {
  std::vector<Violation> out;
  if (!(c.base_mva > 0.0) || !std::isfinite(c.base_mva)) out.push_back({"case", "base_mva must be > 0"});

  std::set<BusId> bus_ids;
  for (const auto& bus : c.buses) {
    const std::string name = "bus " + std::to_string(bus.id);
    if (!bus_ids.insert(bus.id).second) out.push_back({name, "duplicate bus id"});
    if (!std::isfinite(bus.load)) out.push_back({name, "load not finite"});
  }
  if (c.buses.empty()) out.push_back({"case", "no buses"});

  std::set<std::string> gen_ids;
  for (const auto& g : c.generators) {
    const std::string name = "generator " + g.id;
    if (!gen_ids.insert(g.id).second) out.push_back({name, "duplicate generator id"});
    if (!bus_ids.count(g.bus)) out.push_back({name, "unknown bus " + std::to_string(g.bus)});
    if (!(g.a >= 0.0)) out.push_back({name, "a < 0 (cost not convex)"});
    if (!std::isfinite(g.a) || !std::isfinite(g.b) || !std::isfinite(g.c))
      out.push_back({name, "cost coefficient not finite"});
    if (!std::isfinite(g.p_min) || !std::isfinite(g.p_max))
      out.push_back({name, "bounds not finite"});
    else if (g.p_min > g.p_max)
      out.push_back({name, "p_min > p_max"});
  }

  std::set<std::string> branch_ids;
  bool dangling = false;
  for (const auto& br : c.branches) {
    const std::string name = "branch " + br.id;
    if (!branch_ids.insert(br.id).second) out.push_back({name, "duplicate branch id"});
    if (!bus_ids.count(br.from)) {
      out.push_back({name, "unknown bus " + std::to_string(br.from)});
      dangling = true;
    }
    if (!bus_ids.count(br.to)) {
      out.push_back({name, "unknown bus " + std::to_string(br.to)});
      dangling = true;
    }
    if (br.from == br.to) out.push_back({name, "from == to"});
    if (!(br.capacity >= 0.0) || !std::isfinite(br.capacity)) out.push_back({name, "capacity < 0"});
    if (!(br.reactance > 0.0) || !std::isfinite(br.reactance)) out.push_back({name, "reactance <= 0"});
  }

  std::set<std::string> ctg_ids;
  for (const auto& k : c.contingencies) {
    const std::string name = "contingency " + k.id;
    if (!ctg_ids.insert(k.id).second) out.push_back({name, "duplicate contingency id"});
    if (!branch_ids.count(k.outaged_branch))
      out.push_back({name, "unknown branch " + k.outaged_branch});
  }

  if (!dangling && !c.buses.empty() && !is_connected(c)) out.push_back({"", "network not connected"});
  return out;
}

std::vector<std::string> islanding_contingencies(const Case& c) {
  std::vector<std::string> out;
  for (const auto& k : c.contingencies) {
    auto b = c.branch_index(k.outaged_branch);
    if (b && !is_connected(c, *b)) out.push_back(k.id);
  }
  return out;
}

Case parse_case(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw CaseError(std::string("syntax error: ") + e.what());
  }

  Reader top(root, "");
  Case c;
  c.base_mva = top.number("base_mva");
  if (!(c.base_mva > 0.0)) Reader::fail("/base_mva", "must be > 0");
  const double base = c.base_mva;

  const json& buses = top.array("buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    Reader r(buses[i], "/buses/" + std::to_string(i));
    c.buses.push_back({r.bus_id("id"), r.number("load_mw") / base});
  }

  const json& gens = top.array("generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Reader r(gens[i], "/generators/" + std::to_string(i));
    Generator g;
    g.id = r.identifier("id");
    g.bus = r.bus_id("bus");
    g.a = r.number("a") * base * base;
    g.b = r.number("b") * base;
    g.c = r.number("c");
    g.p_min = r.number("pmin_mw") / base;
    g.p_max = r.number("pmax_mw") / base;
    c.generators.push_back(std::move(g));
  }

  const json& branches = top.array("branches");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    Reader r(branches[i], "/branches/" + std::to_string(i));
    Branch br;
    br.id = r.identifier("id");
    br.from = r.bus_id("from");
    br.to = r.bus_id("to");
    br.capacity = r.number("capacity_mw") / base;
    br.reactance = r.number("reactance_pu");
    c.branches.push_back(std::move(br));
  }

  if (root.contains("contingencies")) {
    const json& ctgs = top.array("contingencies");
    for (std::size_t i = 0; i < ctgs.size(); ++i) {
      Reader r(ctgs[i], "/contingencies/" + std::to_string(i));
      c.contingencies.push_back({r.identifier("id"), r.identifier("branch")});
    }
  }

  auto violations = validate_case(c);
  if (!violations.empty()) throw CaseError(std::move(violations));
  return c;
}

std::string serialize_case(const Case& c) {
  const double base = c.base_mva;
  nlohmann::ordered_json root;
  root["base_mva"] = base;
  auto& buses = root["buses"] = nlohmann::ordered_json::array();
  for (const auto& b : c.buses) buses.push_back({{"id", b.id}, {"load_mw", b.load * base}});
  auto& gens = root["generators"] = nlohmann::ordered_json::array();
  for (const auto& g : c.generators)
    gens.push_back({{"id", g.id},
                    {"bus", g.bus},
                    {"a", g.a / (base * base)},
                    {"b", g.b / base},
                    {"c", g.c},
                    {"pmin_mw", g.p_min * base},
                    {"pmax_mw", g.p_max * base}});
  auto& branches = root["branches"] = nlohmann::ordered_json::array();
  for (const auto& br : c.branches)
    branches.push_back({{"id", br.id},
                        {"from", br.from},
                        {"to", br.to},
                        {"capacity_mw", br.capacity * base},
                        {"reactance_pu", br.reactance}});
  auto& ctgs = root["contingencies"] = nlohmann::ordered_json::array();
  for (const auto& k : c.contingencies) ctgs.push_back({{"id", k.id}, {"branch", k.outaged_branch}});
  return root.dump(2) + "\n";
}

Case load_case_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaseError("cannot open case file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.size() >= 2 && path.compare(path.size() - 2, 2, ".m") == 0) return import_matpower(text);
  return parse_case(text);
}

}  // namespace dscopf
