#pragma once
// Frontier expansion over a knowledge graph followed by k-core peeling and
// largest-component selection.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinworld/kg_store.hpp"

namespace twinworld {

struct SamplerConfig {
  std::vector<EntityId> seeds;
  int iterations = 11;
  double uniformity = 0.6;
  int k = 19;
  int per_node_cap = 32;
  std::uint64_t rng_seed = 0;

  // Throws ConfigError describing the first violated bound.
  void validate() const;
};

void to_json(nlohmann::json& j, const SamplerConfig& c);
void from_json(const nlohmann::json& j, SamplerConfig& c);

// A labeled subgraph. `labeling` maps every entity id to its surface form.
struct Universe {
  KnowledgeGraph graph;
  std::map<EntityId, std::string> labeling;
  nlohmann::json provenance;

  std::string label(const EntityId& id) const;
};

Universe make_universe(KnowledgeGraph graph, nlohmann::json provenance = nlohmann::json::object());
void save_universe(const Universe& u, const std::string& directory);
Universe load_universe(const std::string& directory);

// P(r) = |G(r)|^a / sum_k |G(k)|^a with a = 1 - uniformity. Empty groups are
// ignored; an empty result means the node has nothing left to expand.
std::map<std::string, double> relation_distribution(const std::map<std::string, std::size_t>& group_sizes,
                                                    double uniformity);

// Samples relation groups then facts without replacement, up to
// per_node_cap facts per frontier node per iteration. Literal-valued facts are
// not expanded; they are reattached by sample_universe.
KnowledgeGraph expand_frontier(const KnowledgeGraph& kg, const SamplerConfig& config);

// Peels vertices of undirected degree < k until none remain.
KnowledgeGraph k_core(const KnowledgeGraph& graph, int k);

// Largest weakly connected component; ties go to the component whose smallest
// id sorts first.
KnowledgeGraph largest_connected_component(const KnowledgeGraph& graph);

// expand_frontier -> k_core -> largest_connected_component, then attaches the
// literal-valued facts of the surviving entities from `kg`.
Universe sample_universe(const KnowledgeGraph& kg, const SamplerConfig& config);

}  // namespace twinworld
