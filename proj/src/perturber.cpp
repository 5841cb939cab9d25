#include "twinworld/perturber.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "twinworld/errors.hpp"
#include "twinworld/hashing.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;

std::vector<DependencyEdge> DependencyGraph::parents_of(const EntityId& id) const {
  std::vector<DependencyEdge> out;
  for (const auto& e : edges) {
    if (e.child == id) out.push_back(e);
  }
  return out;
}

std::vector<std::vector<EntityId>> DependencyGraph::levels() const {
  std::map<EntityId, std::vector<EntityId>> parents;
  for (const auto& e : edges) parents[e.child].push_back(e.parent);
  std::map<EntityId, int> level;
  std::function<int(const EntityId&)> depth = [&](const EntityId& id) -> int {
    auto it = level.find(id);
    if (it != level.end()) return it->second;
    int d = 0;
    for (const auto& p : parents[id]) d = std::max(d, depth(p) + 1);
    level[id] = d;
    return d;
  };
  std::vector<std::vector<EntityId>> out;
  for (const auto& id : nodes) {
    int d = depth(id);
    if (static_cast<int>(out.size()) <= d) out.resize(d + 1);
    out[d].push_back(id);
  }
  for (auto& l : out) std::sort(l.begin(), l.end());
  return out;
}

DependencyGraph build_dependency_graph(const Universe& universe) {
  const KnowledgeGraph& g = universe.graph;
  DependencyGraph dep;
  for (const auto& [id, e] : g.entities()) {
    if (e.is_named) dep.nodes.push_back(id);
  }
  // One edge per ordered pair; the relation of the first connecting fact in
  // canonical order is recorded.
  std::map<std::pair<EntityId, EntityId>, std::string> found;
  for (const auto& f : g.facts()) {
    if (!f.links_entities() || f.subject == f.object.entity) continue;
    const Entity& a = g.at(f.subject);
    const Entity& b = g.at(f.object.entity);
    if (!a.is_named || !b.is_named) continue;
    for (auto [u, v] : {std::pair{&a, &b}, std::pair{&b, &a}}) {
      if (!contains_whole_word(u->label, v->label)) continue;
      // Equal labels would form a 2-cycle; keep only smaller id -> larger id.
      if (u->label == v->label && u->id > v->id) continue;
      found.emplace(std::pair{u->id, v->id}, f.property_label);
    }
  }
  for (const auto& [pair, rel] : found) dep.edges.push_back({pair.first, rel, pair.second});
  return dep;
}

json RenamePlan::to_json() const {
  json rows = json::array();
  for (const auto& [id, synth] : mapping) {
    rows.push_back({{"id", id}, {"real_label", real_labels.count(id) ? real_labels.at(id) : ""}, {"synth_label", synth}});
  }
  return json{{"order", order}, {"delta_years", delta_years}, {"retries", retries}, {"mapping", rows}};
}

RenamePlan RenamePlan::from_json(const json& j) {
  RenamePlan p;
  p.order = j.value("order", p.order);
  p.delta_years = j.value("delta_years", 0);
  p.retries = j.value("retries", p.retries);
  for (const auto& row : j.value("mapping", json::array())) {
    auto id = row.at("id").get<std::string>();
    p.mapping[id] = row.at("synth_label").get<std::string>();
    p.real_labels[id] = row.at("real_label").get<std::string>();
  }
  return p;
}

std::string RenamePlan::mapping_jsonl() const {
  std::string out;
  for (const auto& [id, synth] : mapping) {
    out += json{{"id", id}, {"real_label", real_labels.count(id) ? real_labels.at(id) : ""}, {"synth_label", synth}}
               .dump() +
           "\n";
  }
  return out;
}

void save_plan(const RenamePlan& plan, const std::string& directory) {
  std::filesystem::create_directories(directory);
  std::ofstream(directory + "/mapping.jsonl", std::ios::binary) << plan.mapping_jsonl();
  std::ofstream(directory + "/plan.json", std::ios::binary) << plan.to_json().dump(2) << "\n";
}

RenamePlan load_plan(const std::string& directory) {
  std::ifstream in(directory + "/plan.json");
  if (!in) throw InputError("cannot open rename plan in " + directory);
  return RenamePlan::from_json(json::parse(in));
}

namespace {

std::vector<std::string> parse_candidates(const std::string& response) {
  std::vector<std::string> out;
  for (const auto& line : split_lines(response)) {
    std::string s = trim(line);
    // Tolerate list markers some generators add.
    while (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == ' ')) s.erase(0, 1);
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

std::string type_label_or_partial(const TypeResolver& resolver, const EntityId& id) {
  try {
    return resolver.resolve(id);
  } catch (const UnresolvedTypeError& e) {
    return e.partial_label();
  }
}

}  // namespace

RenamePlan plan_renames(const DependencyGraph& dep, const Universe& universe, GenerationClient& names,
                        const RenameOptions& options) {
  if (options.retry_cap < 0) throw ConfigError("retry_cap must be >= 0");
  if (options.delta_years < 0) throw ConfigError("delta_years must be >= 0");
  RenamePlan plan;
  plan.delta_years = options.delta_years;
  plan.order = dep.levels();

  const KnowledgeGraph& g = universe.graph;
  TypeResolver resolver(g);
  std::set<std::string> real_labels;
  for (const auto& [id, e] : g.entities()) real_labels.insert(universe.label(id));
  std::vector<std::string> renamed_real;
  for (const auto& id : dep.nodes) {
    plan.real_labels[id] = universe.label(id);
    renamed_real.push_back(universe.label(id));
  }
  std::set<std::string> assigned;
  std::map<EntityId, std::vector<DependencyEdge>> parents;
  for (const auto& e : dep.edges) parents[e.child].push_back(e);

  auto acceptable = [&](const EntityId& id, const std::string& c) {
    if (c.empty() || !is_named_entity(c)) return false;
    if (real_labels.count(c) || assigned.count(c)) return false;
    for (const auto& r : renamed_real) {
      if (contains_whole_word(c, r)) return false;
    }
    for (const auto& p : parents[id]) {
      if (!contains_whole_word(c, plan.mapping.at(p.parent))) return false;
    }
    return true;
  };

  for (const auto& level : plan.order) {
    std::map<EntityId, std::vector<std::string>> avoid;
    std::vector<EntityId> pending = level;
    while (!pending.empty()) {
      std::vector<GenerationRequest> requests;
      for (std::size_t slot = 0; slot < pending.size(); ++slot) {
        const EntityId& id = pending[slot];
        json ps = json::array();
        for (const auto& p : parents[id]) {
          ps.push_back({{"new_label", plan.mapping.at(p.parent)},
                        {"type_label", type_label_or_partial(resolver, p.parent)},
                        {"relation", p.relation}});
        }
        requests.push_back({"name_generation",
                            json{{"entity_type_label", type_label_or_partial(resolver, id)},
                                 {"parents", ps},
                                 {"n_candidates", options.n_candidates},
                                 {"avoid", avoid[id]},
                                 {"slot", slot}},
                            256});
      }
      auto responses = parallel_map<std::string>(pending.size(), names.options().in_flight, [&](std::size_t i) {
        try {
          return names.call(requests[i]);
        } catch (const TransportError& e) {
          throw TransportError("renaming " + pending[i] + ": " + e.what());
        }
      });
      std::vector<EntityId> still;
      for (std::size_t i = 0; i < pending.size(); ++i) {
        const EntityId& id = pending[i];
        bool done = false;
        for (const auto& c : parse_candidates(responses[i])) {
          if (acceptable(id, c)) {
            plan.mapping[id] = c;
            assigned.insert(c);
            done = true;
            break;
          }
          avoid[id].push_back(c);
        }
        if (done) continue;
        int& r = plan.retries[id];
        if (++r > options.retry_cap) {
          throw RenameFailure(id, "no acceptable name after " + std::to_string(options.retry_cap) + " retries");
        }
        still.push_back(id);
      }
      pending = std::move(still);
    }
  }
  for (auto it = plan.retries.begin(); it != plan.retries.end();) {
    it = it->second == 0 ? plan.retries.erase(it) : std::next(it);
  }
  return plan;
}

namespace {

bool is_leap(long long y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string shift_timestamp(const std::string& value, int delta_years) {
  if (delta_years < 0) throw PerturbationError("negative offset " + std::to_string(delta_years));
  auto fail = [&] { return PerturbationError("unparsable timestamp '" + value + "'"); };
  std::string_view s = value;
  std::string sign;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    sign = std::string(1, s[0]);
    s.remove_prefix(1);
  }
  std::string_view rest;
  std::size_t t = s.find('T');
  if (t != std::string_view::npos) {
    rest = s.substr(t);
    s = s.substr(0, t);
  }
  std::size_t dash1 = s.find('-');
  std::string_view year = s.substr(0, dash1);
  std::string_view month, day;
  if (dash1 != std::string_view::npos) {
    std::string_view md = s.substr(dash1 + 1);
    std::size_t dash2 = md.find('-');
    month = md.substr(0, dash2);
    if (dash2 != std::string_view::npos) {
      day = md.substr(dash2 + 1);
      if (!all_digits(day) || day.size() != 2) throw fail();
    }
    if (!all_digits(month) || month.size() != 2) throw fail();
  }
  if (!all_digits(year) || year.size() > 12) throw fail();
  long long y = 0;
  std::from_chars(year.data(), year.data() + year.size(), y);
  if (sign == "-") y = -y;
  int mm = month.empty() ? 0 : std::stoi(std::string(month));
  int dd = day.empty() ? 0 : std::stoi(std::string(day));
  if (mm > 12 || dd > 31) throw fail();

  long long ny = y + delta_years;
  std::string new_day(day);
  if (mm == 2 && dd == 29 && !is_leap(ny)) new_day = "28";

  std::string digits = std::to_string(ny < 0 ? -ny : ny);
  if (digits.size() < year.size()) digits.insert(0, year.size() - digits.size(), '0');
  std::string out = ny < 0 ? "-" : (sign == "+" ? "+" : "");
  out += digits;
  if (!month.empty()) out += "-" + std::string(month);
  if (!day.empty()) out += "-" + new_day;
  out += rest;
  return out;
}

Fact shift_fact(Fact f, int delta_years) {
  try {
    if (f.object.literal && f.object.literal->kind == LiteralKind::timestamp) {
      f.object.literal->value = shift_timestamp(f.object.literal->value, delta_years);
    }
    for (auto& q : f.qualifiers) {
      if (q.value.kind == LiteralKind::timestamp) q.value.value = shift_timestamp(q.value.value, delta_years);
    }
  } catch (const PerturbationError& e) {
    throw PerturbationError("fact " + f.key() + ": " + e.what());
  }
  return f;
}

Universe shift_timestamps(const Universe& universe, int delta_years) {
  if (delta_years < 0) throw PerturbationError("negative offset " + std::to_string(delta_years));
  std::vector<Fact> facts;
  facts.reserve(universe.graph.facts().size());
  for (const Fact& f : universe.graph.facts()) facts.push_back(shift_fact(f, delta_years));
  Universe out = universe;
  out.graph = universe.graph.with_facts(std::move(facts));
  return out;
}

Universe make_synth_universe(const Universe& universe, const RenamePlan& plan) {
  std::vector<std::string> missing;
  std::vector<Entity> ents;
  for (const auto& [id, e] : universe.graph.entities()) {
    Entity copy = e;
    if (e.is_named) {
      auto it = plan.mapping.find(id);
      if (it == plan.mapping.end()) {
        missing.push_back(id);
        continue;
      }
      copy.label = it->second;
      copy.aliases.clear();
    }
    ents.push_back(std::move(copy));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += " " + m;
    throw CompletenessError("no synthetic label for" + list);
  }
  Universe relabeled = make_universe(universe.graph.with_entities(std::move(ents)),
                                     json{{"base", universe.provenance},
                                          {"delta_years", plan.delta_years},
                                          {"plan_hash", sha256_hex(plan.mapping_jsonl())}});
  return shift_timestamps(relabeled, plan.delta_years);
}

}  // namespace twinworld
