#include "twinworld/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <filesystem>
#include <istream>
#include <sstream>

#include "twinworld/assets.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/hashing.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;

std::string_view to_string(LiteralKind kind) noexcept {
  switch (kind) {
    case LiteralKind::timestamp: return "timestamp";
    case LiteralKind::quantity: return "quantity";
    case LiteralKind::string: return "string";
  }
  return "string";
}

LiteralKind literal_kind_from(std::string_view s) {
  if (s == "timestamp") return LiteralKind::timestamp;
  if (s == "quantity") return LiteralKind::quantity;
  if (s == "string") return LiteralKind::string;
  throw InputError("unknown literal kind '" + std::string(s) + "'");
}

std::string display_literal(const Literal& l) {
  if (l.kind != LiteralKind::timestamp) return l.value;
  std::string v = l.value;
  if (!v.empty() && v[0] == '+') v.erase(0, 1);
  if (auto t = v.find('T'); t != std::string::npos) v.resize(t);
  auto drop_zero_field = [&v] {
    if (v.size() >= 3 && v.compare(v.size() - 3, 3, "-00") == 0) {
      v.resize(v.size() - 3);
      return true;
    }
    return false;
  };
  while (drop_zero_field()) {
  }
  return v;
}

void to_json(json& j, const Literal& l) { j = json{{"kind", to_string(l.kind)}, {"value", l.value}}; }

void from_json(const json& j, Literal& l) {
  l.kind = literal_kind_from(j.at("kind").get<std::string>());
  const auto& v = j.at("value");
  l.value = v.is_string() ? v.get<std::string>() : v.dump();
}

void to_json(json& j, const Qualifier& q) {
  j = json{{"property", q.property}, {"property_label", q.property_label}, {"value", q.value}};
}

void from_json(const json& j, Qualifier& q) {
  q.property = j.at("property").get<std::string>();
  q.property_label = j.value("property_label", q.property);
  q.value = j.at("value").get<Literal>();
}

void to_json(json& j, const Fact& f) {
  json object = f.object.is_entity() ? json{{"entity", f.object.entity}} : json{{"literal", *f.object.literal}};
  j = json{{"subject", f.subject},
           {"property", f.property},
           {"property_label", f.property_label},
           {"object", std::move(object)},
           {"qualifiers", f.qualifiers}};
}

void from_json(const json& j, Fact& f) {
  f.subject = j.at("subject").get<std::string>();
  f.property = j.at("property").get<std::string>();
  f.property_label = j.value("property_label", f.property);
  const auto& obj = j.at("object");
  if (obj.contains("entity")) {
    f.object.entity = obj.at("entity").get<std::string>();
    f.object.literal.reset();
  } else if (obj.contains("literal")) {
    f.object.entity.clear();
    f.object.literal = obj.at("literal").get<Literal>();
  } else {
    throw InputError("fact object needs 'entity' or 'literal'");
  }
  f.qualifiers = j.value("qualifiers", std::vector<Qualifier>{});
}

void to_json(json& j, const Entity& e) {
  j = json{{"id", e.id},
           {"label", e.label},
           {"aliases", e.aliases},
           {"instance_of", e.type_ids},
           {"flags", e.flags}};
}

void from_json(const json& j, Entity& e) {
  e.id = j.at("id").get<std::string>();
  if (e.id.empty()) throw InputError("entity id must be non-empty");
  const auto& label = j.at("label");
  e.label = label.is_null() ? std::string() : label.get<std::string>();
  e.aliases = j.value("aliases", std::vector<std::string>{});
  e.type_ids = j.value("instance_of", std::vector<std::string>{});
  e.flags = j.value("flags", std::vector<std::string>{});
  e.is_named = !e.label.empty() && is_named_entity(e.label);
}

std::string Fact::key() const {
  std::string k = subject + "|" + property + "|";
  if (object.is_entity()) {
    k += object.entity;
  } else {
    k += "#";
    k += to_string(object.literal->kind);
    k += ":" + object.literal->value;
  }
  for (const auto& q : qualifiers) {
    k += "|" + q.property + "=" + q.value.value;
  }
  return k;
}

KnowledgeGraph KnowledgeGraph::build(std::vector<Entity> entities, std::vector<Fact> facts,
                                     std::map<std::string, std::string> relation_defs) {
  KnowledgeGraph kg;
  for (auto& e : entities) {
    EntityId id = e.id;
    if (!kg.entities_.emplace(id, std::move(e)).second) {
      throw InputError("duplicate entity id " + id);
    }
  }
  std::sort(facts.begin(), facts.end());
  facts.erase(std::unique(facts.begin(), facts.end()), facts.end());

  std::set<EntityId> missing;
  for (const auto& f : facts) {
    if (!kg.contains(f.subject)) missing.insert(f.subject);
    if (f.object.is_entity() && !kg.contains(f.object.entity)) missing.insert(f.object.entity);
  }
  if (!missing.empty()) throw ReferentialError({missing.begin(), missing.end()});

  kg.facts_ = std::move(facts);
  kg.relation_defs_ = std::move(relation_defs);
  for (std::size_t i = 0; i < kg.facts_.size(); ++i) {
    const auto& f = kg.facts_[i];
    kg.incident_[f.subject].push_back(i);
    if (f.object.is_entity() && f.object.entity != f.subject) kg.incident_[f.object.entity].push_back(i);
  }
  return kg;
}

const Entity* KnowledgeGraph::find(const EntityId& id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const Entity& KnowledgeGraph::at(const EntityId& id) const {
  const Entity* e = find(id);
  if (!e) throw InputError("unknown entity " + id);
  return *e;
}

const std::vector<std::size_t>& KnowledgeGraph::incident(const EntityId& id) const {
  static const std::vector<std::size_t> none;
  auto it = incident_.find(id);
  return it == incident_.end() ? none : it->second;
}

std::map<EntityId, std::set<EntityId>> KnowledgeGraph::undirected_adjacency() const {
  std::map<EntityId, std::set<EntityId>> adj;
  for (const auto& [id, e] : entities_) adj[id];
  for (const auto& f : facts_) {
    if (!f.object.is_entity() || f.subject == f.object.entity) continue;
    adj[f.subject].insert(f.object.entity);
    adj[f.object.entity].insert(f.subject);
  }
  return adj;
}

KnowledgeGraph KnowledgeGraph::induced(const std::set<EntityId>& ids, bool keep_literal_facts) const {
  std::vector<Entity> ents;
  for (const auto& id : ids) {
    if (const Entity* e = find(id)) ents.push_back(*e);
  }
  std::vector<Fact> kept;
  for (const auto& f : facts_) {
    if (!ids.count(f.subject)) continue;
    if (f.object.is_entity() ? ids.count(f.object.entity) > 0 : keep_literal_facts) kept.push_back(f);
  }
  return build(std::move(ents), std::move(kept), relation_defs_);
}

KnowledgeGraph KnowledgeGraph::with_facts(std::vector<Fact> facts) const {
  std::vector<Entity> ents;
  for (const auto& [id, e] : entities_) ents.push_back(e);
  return build(std::move(ents), std::move(facts), relation_defs_);
}

KnowledgeGraph KnowledgeGraph::with_entities(std::vector<Entity> entities) const {
  return build(std::move(entities), facts_, relation_defs_);
}

std::string KnowledgeGraph::canonical_entities_jsonl() const {
  std::string out;
  for (const auto& [id, e] : entities_) out += json(e).dump() + "\n";
  return out;
}

std::string KnowledgeGraph::canonical_facts_jsonl() const {
  std::string out;
  for (const auto& f : facts_) out += json(f).dump() + "\n";
  return out;
}

std::string KnowledgeGraph::fingerprint() const {
  return sha256_hex(canonical_entities_jsonl() + "\x1e" + canonical_facts_jsonl() + "\x1e" +
                    json(relation_defs_).dump());
}

namespace {

// Case class of a code point: +1 upper, -1 lower, 0 uncased.
int letter_case(char32_t c) {
  if (c >= U'A' && c <= U'Z') return 1;
  if (c >= U'a' && c <= U'z') return -1;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return 1;
  if (c >= 0xDF && c <= 0xFF && c != 0xF7) return -1;
  if (c >= 0x100 && c <= 0x17F) {
    // Latin Extended-A alternates upper/lower with a parity shift in two runs.
    bool shifted = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    bool even = (c % 2) == 0;
    return (even != shifted) ? 1 : -1;
  }
  if (c >= 0x391 && c <= 0x3A9) return 1;
  if (c >= 0x3B1 && c <= 0x3C9) return -1;
  if (c >= 0x410 && c <= 0x42F) return 1;
  if (c >= 0x430 && c <= 0x44F) return -1;
  return 0;
}

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ParseError(lineno, "expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(lineno, e.what());
  }
}

template <typename T>
std::vector<T> read_records(std::istream& in) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    json j = parse_line(line, lineno);
    try {
      out.push_back(j.get<T>());
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

bool has_ascii_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

bool is_named_entity(std::string_view label, const std::vector<std::string>&) {
  for (char32_t c : utf8_decode(label)) {
    int cls = letter_case(c);
    if (cls != 0) return cls > 0;
  }
  return false;
}

KnowledgeGraph ingest_kg(std::istream& entities_stream, std::istream& facts_stream,
                         std::map<std::string, std::string> relation_defs) {
  auto entities = read_records<Entity>(entities_stream);
  auto facts = read_records<Fact>(facts_stream);
  return KnowledgeGraph::build(std::move(entities), std::move(facts), std::move(relation_defs));
}

std::map<std::string, std::string> read_relation_defs(std::istream& in) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (trim(content).empty()) return {};
  try {
    return json::parse(content).get<std::map<std::string, std::string>>();
  } catch (const std::exception& e) {
    throw InputError(std::string("relation definitions: ") + e.what());
  }
}

KnowledgeGraph load_kg(const KgPaths& paths) {
  std::ifstream ents(paths.entities);
  if (!ents) throw InputError("cannot open entities file " + paths.entities);
  std::ifstream facts(paths.facts);
  if (!facts) throw InputError("cannot open facts file " + paths.facts);
  std::map<std::string, std::string> defs;
  if (!paths.relations.empty()) {
    std::ifstream rel(paths.relations);
    if (!rel) throw InputError("cannot open relations file " + paths.relations);
    defs = read_relation_defs(rel);
  }
  return ingest_kg(ents, facts, std::move(defs));
}

void save_kg(const KnowledgeGraph& kg, const std::string& directory) {
  std::filesystem::create_directories(directory);
  std::ofstream(directory + "/entities.jsonl", std::ios::binary) << kg.canonical_entities_jsonl();
  std::ofstream(directory + "/facts.jsonl", std::ios::binary) << kg.canonical_facts_jsonl();
  std::ofstream(directory + "/relations.json", std::ios::binary) << json(kg.relation_defs()).dump(2) << "\n";
}

FilterConfig FilterConfig::defaults() { return from_json(json::parse(assets::get("config/filter.json"))); }

FilterConfig FilterConfig::from_json(const json& j) {
  FilterConfig c;
  c.time_types = j.value("time_types", std::set<EntityId>{});
  c.bookkeeping_types = j.value("bookkeeping_types", std::set<EntityId>{});
  c.bookkeeping_flags = j.value("bookkeeping_flags", std::set<std::string>{});
  c.chain_depth = j.value("chain_depth", 8);
  return c;
}

namespace {

bool chain_reaches(const KnowledgeGraph& kg, const Entity& e, const std::set<EntityId>& targets, int depth) {
  if (targets.empty()) return false;
  if (targets.count(e.id)) return true;
  std::set<EntityId> seen{e.id};
  std::vector<EntityId> layer(e.type_ids.begin(), e.type_ids.end());
  for (int d = 0; d < depth && !layer.empty(); ++d) {
    std::vector<EntityId> next;
    for (const auto& id : layer) {
      if (targets.count(id)) return true;
      if (!seen.insert(id).second) continue;
      if (const Entity* t = kg.find(id)) next.insert(next.end(), t->type_ids.begin(), t->type_ids.end());
    }
    layer = std::move(next);
  }
  return false;
}

}  // namespace

KnowledgeGraph filter_entities(const KnowledgeGraph& kg, const FilterConfig& config) {
  std::set<EntityId> keep;
  for (const auto& [id, e] : kg.entities()) {
    if (e.label.empty() || has_ascii_digit(e.label)) continue;
    bool flagged = std::any_of(e.flags.begin(), e.flags.end(),
                               [&](const std::string& f) { return config.bookkeeping_flags.count(f) > 0; });
    if (flagged) continue;
    if (chain_reaches(kg, e, config.time_types, config.chain_depth)) continue;
    if (chain_reaches(kg, e, config.bookkeeping_types, config.chain_depth)) continue;
    keep.insert(id);
  }
  std::vector<Entity> ents;
  for (const auto& id : keep) {
    Entity e = kg.at(id);
    std::erase_if(e.type_ids, [&](const EntityId& t) { return !keep.count(t); });
    ents.push_back(std::move(e));
  }
  std::vector<Fact> facts;
  for (const auto& f : kg.facts()) {
    if (!keep.count(f.subject)) continue;
    if (f.object.is_entity() && !keep.count(f.object.entity)) continue;
    facts.push_back(f);
  }
  return KnowledgeGraph::build(std::move(ents), std::move(facts), kg.relation_defs());
}

std::string join_with_and(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

namespace {

std::string first_word(std::string_view s) {
  std::size_t end = 0;
  while (end < s.size() && is_word_byte(s[end])) ++end;
  return std::string(s.substr(0, end));
}

}  // namespace

TypeResolver::TypeResolver(const KnowledgeGraph& kg, int depth_cap) : kg_(kg), depth_cap_(depth_cap) {
  std::map<std::string, EntityId> by_label;  // smallest id wins on label clashes
  for (const auto& [id, e] : kg.entities()) {
    if (e.is_named) by_label.emplace(e.label, id);
  }
  for (const auto& [label, id] : by_label) {
    std::string fw = first_word(label);
    if (fw.empty()) continue;
    named_by_first_word_[fw].emplace_back(label, id);
  }
  for (auto& [fw, list] : named_by_first_word_) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  }
}

std::string TypeResolver::resolve(const EntityId& entity) const {
  kg_.at(entity);
  return resolve_entity(entity, 0, entity);
}

std::string TypeResolver::resolve_text(std::string_view text) const { return resolve_text_at(text, 0, ""); }

std::string TypeResolver::resolve_entity(const EntityId& id, int depth, const EntityId& origin) const {
  const Entity& e = kg_.at(id);
  std::vector<std::string> parts;
  for (const auto& t : e.type_ids) {
    const Entity* type = kg_.find(t);
    if (!type || type->label.empty()) continue;
    std::string resolved = resolve_text_at(type->label, depth, origin);
    if (std::find(parts.begin(), parts.end(), resolved) == parts.end()) parts.push_back(std::move(resolved));
  }
  return join_with_and(parts);
}

std::string TypeResolver::resolve_text_at(std::string_view text, int depth, const EntityId& origin) const {
  std::string out;
  bool substituted = false;
  std::size_t i = 0;
  while (i < text.size()) {
    bool at_word_start = is_word_byte(text[i]) && (i == 0 || !is_word_byte(text[i - 1]));
    if (at_word_start) {
      auto it = named_by_first_word_.find(first_word(text.substr(i)));
      if (it != named_by_first_word_.end()) {
        for (const auto& [label, id] : it->second) {
          if (text.compare(i, label.size(), label) != 0) continue;
          std::size_t end = i + label.size();
          if (end < text.size() && is_word_byte(text[end]) && is_word_byte(text[end - 1])) continue;
          if (depth >= depth_cap_) throw UnresolvedTypeError(origin, std::string(text));
          out += resolve_entity(id, depth + 1, origin);
          i = end;
          substituted = true;
          goto next;
        }
      }
    }
    out.push_back(text[i++]);
  next:;
  }
  (void)substituted;
  return out;
}

std::string resolve_type_label(const EntityId& entity, const KnowledgeGraph& kg, int depth_cap) {
  return TypeResolver(kg, depth_cap).resolve(entity);
}

}  // namespace twinworld
