#pragma once
// Knowledge-graph substrate: entities with instance-of typing, directed facts
// with qualifiers, and relation descriptions.
//
// Files (UTF-8, LF):
//   entities.jsonl  {"id","label","aliases":[..],"instance_of":[ids],"flags":[..]}
//   facts.jsonl     {"subject","property","property_label",
//                    "object":{"entity":id} | {"literal":{"kind","value"}},
//                    "qualifiers":[{"property","property_label","value":{"kind","value"}}]}
//   relations.json  {"P19": "description text", ...}

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace twinworld {

using EntityId = std::string;

enum class LiteralKind { timestamp, quantity, string };

std::string_view to_string(LiteralKind kind) noexcept;
LiteralKind literal_kind_from(std::string_view s);

struct Literal {
  LiteralKind kind = LiteralKind::string;
  std::string value;

  auto operator<=>(const Literal&) const = default;
};

// Text form used in documents: timestamps lose a leading '+', any time part
// and zero month/day fields ("+1864-00-00T00:00:00Z" -> "1864").
std::string display_literal(const Literal& l);

struct Qualifier {
  std::string property;
  std::string property_label;
  Literal value;

  auto operator<=>(const Qualifier&) const = default;
};

struct FactObject {
  EntityId entity;                 // set when the object is an entity
  std::optional<Literal> literal;  // set when the object is a literal

  bool is_entity() const noexcept { return !literal.has_value(); }
  auto operator<=>(const FactObject&) const = default;
};

struct Fact {
  EntityId subject;
  std::string property;
  std::string property_label;
  FactObject object;
  std::vector<Qualifier> qualifiers;

  auto operator<=>(const Fact&) const = default;
  bool operator==(const Fact&) const = default;

  bool links_entities() const noexcept { return object.is_entity(); }
  // Stable textual identity of the fact, used for reuse counting and logs.
  std::string key() const;
};

struct Entity {
  EntityId id;
  std::string label;
  std::vector<EntityId> type_ids;
  std::vector<std::string> aliases;
  std::vector<std::string> flags;
  bool is_named = false;

  bool operator==(const Entity&) const = default;
};

void to_json(nlohmann::json& j, const Literal& l);
void from_json(const nlohmann::json& j, Literal& l);
void to_json(nlohmann::json& j, const Qualifier& q);
void from_json(const nlohmann::json& j, Qualifier& q);
void to_json(nlohmann::json& j, const Fact& f);
void from_json(const nlohmann::json& j, Fact& f);
void to_json(nlohmann::json& j, const Entity& e);
void from_json(const nlohmann::json& j, Entity& e);

// Immutable after construction; safe to share read-only across threads.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Deduplicates facts and checks that every fact endpoint resolves.
  // Throws ReferentialError naming the missing ids.
  static KnowledgeGraph build(std::vector<Entity> entities, std::vector<Fact> facts,
                              std::map<std::string, std::string> relation_defs = {});

  const std::map<EntityId, Entity>& entities() const noexcept { return entities_; }
  const std::vector<Fact>& facts() const noexcept { return facts_; }
  const std::map<std::string, std::string>& relation_defs() const noexcept { return relation_defs_; }

  const Entity* find(const EntityId& id) const;
  const Entity& at(const EntityId& id) const;
  bool contains(const EntityId& id) const { return entities_.count(id) > 0; }

  // Indices into facts() of every fact touching `id` as subject or entity object.
  const std::vector<std::size_t>& incident(const EntityId& id) const;

  // Undirected neighbor sets over entity-valued facts; self-loops omitted.
  std::map<EntityId, std::set<EntityId>> undirected_adjacency() const;

  // Entities in `ids` plus the facts among them. Literal-valued facts are kept
  // when their subject is retained and `keep_literal_facts` is set.
  KnowledgeGraph induced(const std::set<EntityId>& ids, bool keep_literal_facts = true) const;

  // Same entities and relation definitions with a replaced fact list.
  KnowledgeGraph with_facts(std::vector<Fact> facts) const;
  KnowledgeGraph with_entities(std::vector<Entity> entities) const;

  std::string canonical_entities_jsonl() const;
  std::string canonical_facts_jsonl() const;
  // SHA-256 over the canonical serialization.
  std::string fingerprint() const;

 private:
  std::map<EntityId, Entity> entities_;
  std::vector<Fact> facts_;
  std::map<std::string, std::string> relation_defs_;
  std::map<EntityId, std::vector<std::size_t>> incident_;
};

// True iff the first cased letter of `label` is uppercase. Type labels are
// accepted for interface parity with NER-backed classifiers but not consulted.
bool is_named_entity(std::string_view label, const std::vector<std::string>& type_labels = {});

// Parses the line-delimited formats above. Malformed lines raise ParseError
// with a 1-based line number; dangling fact endpoints raise ReferentialError.
KnowledgeGraph ingest_kg(std::istream& entities_stream, std::istream& facts_stream,
                         std::map<std::string, std::string> relation_defs = {});
std::map<std::string, std::string> read_relation_defs(std::istream& in);

struct KgPaths {
  std::string entities;
  std::string facts;
  std::string relations;  // optional
};
KnowledgeGraph load_kg(const KgPaths& paths);
void save_kg(const KnowledgeGraph& kg, const std::string& directory);

struct FilterConfig {
  std::set<EntityId> time_types;         // calendar types: an entity typed into these is a time term
  std::set<EntityId> bookkeeping_types;  // wiki-maintenance classes
  std::set<std::string> bookkeeping_flags;
  int chain_depth = 8;

  // Loaded from the embedded config/filter.json.
  static FilterConfig defaults();
  static FilterConfig from_json(const nlohmann::json& j);
};

// Drops time terms, bookkeeping entities, unlabeled entities and labels with
// ASCII digits, plus every fact touching a dropped entity. Idempotent.
KnowledgeGraph filter_entities(const KnowledgeGraph& kg, const FilterConfig& config = FilterConfig::defaults());

// Resolves instance-of labels, substituting every named entity mentioned in a
// type label by that entity's own resolved type label.
class TypeResolver {
 public:
  static constexpr int kDefaultDepthCap = 5;

  explicit TypeResolver(const KnowledgeGraph& kg, int depth_cap = kDefaultDepthCap);

  // Throws UnresolvedTypeError when recursion passes the depth cap.
  std::string resolve(const EntityId& entity) const;
  // Resolves named mentions inside an arbitrary type description.
  std::string resolve_text(std::string_view text) const;

 private:
  std::string resolve_entity(const EntityId& id, int depth, const EntityId& origin) const;
  std::string resolve_text_at(std::string_view text, int depth, const EntityId& origin) const;

  const KnowledgeGraph& kg_;
  int depth_cap_;
  // first word -> (label, id), longest labels first
  std::map<std::string, std::vector<std::pair<std::string, EntityId>>> named_by_first_word_;
};

std::string resolve_type_label(const EntityId& entity, const KnowledgeGraph& kg,
                               int depth_cap = TypeResolver::kDefaultDepthCap);

// "a", "a and b", "a, b and c"
std::string join_with_and(const std::vector<std::string>& parts);

}  // namespace twinworld
