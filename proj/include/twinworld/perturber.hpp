#pragma once
// Surface-form perturbation: dependency-ordered renaming of named entities and
// a fixed year offset for every timestamp.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinworld/generation.hpp"
#include "twinworld/universe_sampler.hpp"

namespace twinworld {

// `child` is name-related to `parent`: the parent's label occurs inside the
// child's label and a fact connects the two.
struct DependencyEdge {
  EntityId child;
  std::string relation;
  EntityId parent;

  auto operator<=>(const DependencyEdge&) const = default;
};

struct DependencyGraph {
  std::vector<EntityId> nodes;  // every named entity, sorted
  std::vector<DependencyEdge> edges;

  std::vector<DependencyEdge> parents_of(const EntityId& id) const;
  // Level 0 holds entities without parents; every other entity sits one level
  // above its deepest parent.
  std::vector<std::vector<EntityId>> levels() const;
};

DependencyGraph build_dependency_graph(const Universe& universe);

struct RenamePlan {
  std::vector<std::vector<EntityId>> order;
  std::map<EntityId, std::string> mapping;  // real-named id -> synthetic label
  std::map<EntityId, std::string> real_labels;
  int delta_years = 0;
  std::map<EntityId, int> retries;  // rejected candidates per entity

  nlohmann::json to_json() const;
  static RenamePlan from_json(const nlohmann::json& j);
  // mapping.jsonl rows: {"id","real_label","synth_label"}
  std::string mapping_jsonl() const;
};

void save_plan(const RenamePlan& plan, const std::string& directory);
RenamePlan load_plan(const std::string& directory);

struct RenameOptions {
  int retry_cap = 5;
  int n_candidates = 1;
  int delta_years = 39;
};

// Renames level by level through the name_generation template; each request
// carries its slot in the batch so that look-alike entities get distinct
// prompts. A candidate is
// rejected when it is not capitalised, equals any label in the universe or an
// already assigned synthetic label, contains the real label of a renamed
// entity, or omits a parent's new label.
RenamePlan plan_renames(const DependencyGraph& dep, const Universe& universe, GenerationClient& names,
                        const RenameOptions& options = {});

// Adds `delta_years` to the year of a timestamp literal ("1935-01-15",
// "+1935-01-15T00:00:00Z", "1955"). February 29 moved into a common year
// becomes February 28. Throws PerturbationError on malformed input.
std::string shift_timestamp(const std::string& value, int delta_years);

// Shifts the timestamp object and timestamp qualifiers of one fact.
Fact shift_fact(Fact fact, int delta_years);
Universe shift_timestamps(const Universe& universe, int delta_years);

// U' = identical facts over ids, synthetic labels on named entities, shifted
// timestamps. Throws CompletenessError when a named entity has no mapping.
Universe make_synth_universe(const Universe& universe, const RenamePlan& plan);

}  // namespace twinworld
