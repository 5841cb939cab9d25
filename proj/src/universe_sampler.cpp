#include "twinworld/universe_sampler.hpp"

#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>

#include "twinworld/errors.hpp"
#include "twinworld/hashing.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;

void SamplerConfig::validate() const {
  if (seeds.empty()) throw ConfigError("sampler: at least one seed is required");
  if (iterations < 1) throw ConfigError("sampler: iterations must be >= 1");
  if (k < 1) throw ConfigError("sampler: k must be >= 1");
  if (!(uniformity >= 0.0 && uniformity <= 1.0)) throw ConfigError("sampler: uniformity must lie in [0, 1]");
  if (per_node_cap < 1) throw ConfigError("sampler: per_node_cap must be >= 1");
}

void to_json(json& j, const SamplerConfig& c) {
  j = json{{"seeds", c.seeds},
           {"iterations", c.iterations},
           {"uniformity", c.uniformity},
           {"k", c.k},
           {"per_node_cap", c.per_node_cap},
           {"rng_seed", c.rng_seed}};
}

void from_json(const json& j, SamplerConfig& c) {
  c.seeds = j.value("seeds", c.seeds);
  c.iterations = j.value("iterations", c.iterations);
  c.uniformity = j.value("uniformity", c.uniformity);
  c.k = j.value("k", c.k);
  c.per_node_cap = j.value("per_node_cap", c.per_node_cap);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
}

std::string Universe::label(const EntityId& id) const {
  auto it = labeling.find(id);
  if (it == labeling.end()) throw InputError("entity " + id + " is not in the universe");
  return it->second;
}

Universe make_universe(KnowledgeGraph graph, json provenance) {
  Universe u;
  for (const auto& [id, e] : graph.entities()) u.labeling[id] = e.label;
  u.graph = std::move(graph);
  u.provenance = std::move(provenance);
  return u;
}

void save_universe(const Universe& u, const std::string& directory) {
  save_kg(u.graph, directory);
  std::ofstream(directory + "/provenance.json", std::ios::binary) << u.provenance.dump(2) << "\n";
}

Universe load_universe(const std::string& directory) {
  KnowledgeGraph kg = load_kg({directory + "/entities.jsonl", directory + "/facts.jsonl", directory + "/relations.json"});
  json prov = json::object();
  std::ifstream in(directory + "/provenance.json");
  if (in) prov = json::parse(in);
  return make_universe(std::move(kg), std::move(prov));
}

std::map<std::string, double> relation_distribution(const std::map<std::string, std::size_t>& group_sizes,
                                                    double uniformity) {
  const double alpha = 1.0 - uniformity;
  std::map<std::string, double> p;
  double total = 0.0;
  for (const auto& [r, n] : group_sizes) {
    if (n == 0) continue;
    double w = std::pow(static_cast<double>(n), alpha);
    p[r] = w;
    total += w;
  }
  for (auto& [r, w] : p) w /= total;
  return p;
}

namespace {

// Facts drawn for one frontier node. Pure function of its inputs so nodes can
// be processed in any order or in parallel.
std::vector<std::size_t> sample_node(const KnowledgeGraph& kg, const EntityId& node, int iteration,
                                     const std::set<std::size_t>& already, const SamplerConfig& config) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t fi : kg.incident(node)) {
    const Fact& f = kg.facts()[fi];
    if (!f.links_entities() || already.count(fi)) continue;
    groups[f.property].push_back(fi);
  }
  Rng rng(mix_seed(config.rng_seed, node, static_cast<std::uint64_t>(iteration)));
  std::vector<std::size_t> picked;
  while (static_cast<int>(picked.size()) < config.per_node_cap && !groups.empty()) {
    std::map<std::string, std::size_t> sizes;
    for (const auto& [r, fs] : groups) sizes[r] = fs.size();
    auto dist = relation_distribution(sizes, config.uniformity);
    double u = rng.uniform01();
    auto chosen = std::prev(groups.end());
    double acc = 0.0;
    for (auto it = groups.begin(); it != groups.end(); ++it) {
      acc += dist[it->first];
      if (u < acc) {
        chosen = it;
        break;
      }
    }
    auto& members = chosen->second;
    std::size_t pos = rng.index(members.size());
    picked.push_back(members[pos]);
    members.erase(members.begin() + static_cast<std::ptrdiff_t>(pos));
    if (members.empty()) groups.erase(chosen);
  }
  return picked;
}

}  // namespace

KnowledgeGraph expand_frontier(const KnowledgeGraph& kg, const SamplerConfig& config) {
  config.validate();
  for (const auto& s : config.seeds) {
    if (!kg.contains(s)) throw ConfigError("sampler: seed " + s + " is not in the knowledge graph");
  }
  std::set<EntityId> reached(config.seeds.begin(), config.seeds.end());
  std::set<EntityId> expanded;
  std::set<std::size_t> sampled;
  std::set<EntityId> frontier = reached;

  for (int t = 0; t < config.iterations && !frontier.empty(); ++t) {
    std::vector<std::size_t> drawn;
    for (const auto& node : frontier) {
      auto picks = sample_node(kg, node, t, sampled, config);
      drawn.insert(drawn.end(), picks.begin(), picks.end());
      expanded.insert(node);
    }
    std::set<EntityId> next;
    for (std::size_t fi : drawn) {
      if (!sampled.insert(fi).second) continue;
      const Fact& f = kg.facts()[fi];
      for (const EntityId* end : {&f.subject, &f.object.entity}) {
        if (reached.insert(*end).second && !expanded.count(*end)) next.insert(*end);
      }
    }
    frontier = std::move(next);
  }

  std::vector<Entity> ents;
  for (const auto& id : reached) ents.push_back(kg.at(id));
  std::vector<Fact> facts;
  for (std::size_t fi : sampled) facts.push_back(kg.facts()[fi]);
  return KnowledgeGraph::build(std::move(ents), std::move(facts), kg.relation_defs());
}

KnowledgeGraph k_core(const KnowledgeGraph& graph, int k) {
  if (k < 1) throw ConfigError("k_core: k must be >= 1");
  auto adj = graph.undirected_adjacency();
  std::map<EntityId, std::size_t> degree;
  std::deque<EntityId> queue;
  std::set<EntityId> removed;
  for (const auto& [id, nbrs] : adj) {
    degree[id] = nbrs.size();
    if (nbrs.size() < static_cast<std::size_t>(k)) {
      queue.push_back(id);
      removed.insert(id);
    }
  }
  while (!queue.empty()) {
    EntityId v = queue.front();
    queue.pop_front();
    for (const auto& w : adj[v]) {
      if (removed.count(w)) continue;
      if (--degree[w] < static_cast<std::size_t>(k)) {
        removed.insert(w);
        queue.push_back(w);
      }
    }
  }
  std::set<EntityId> keep;
  for (const auto& [id, nbrs] : adj) {
    if (!removed.count(id)) keep.insert(id);
  }
  return graph.induced(keep);
}

KnowledgeGraph largest_connected_component(const KnowledgeGraph& graph) {
  auto adj = graph.undirected_adjacency();
  std::set<EntityId> seen;
  std::set<EntityId> best;
  for (const auto& [start, unused] : adj) {
    if (seen.count(start)) continue;
    std::set<EntityId> comp{start};
    std::deque<EntityId> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      EntityId v = queue.front();
      queue.pop_front();
      for (const auto& w : adj[v]) {
        if (seen.insert(w).second) {
          comp.insert(w);
          queue.push_back(w);
        }
      }
    }
    // Components are discovered in order of their smallest id, so strict
    // comparison keeps the tie-break.
    if (comp.size() > best.size()) best = std::move(comp);
  }
  return graph.induced(best);
}

Universe sample_universe(const KnowledgeGraph& kg, const SamplerConfig& config) {
  KnowledgeGraph expansion = expand_frontier(kg, config);
  KnowledgeGraph core = largest_connected_component(k_core(expansion, config.k));
  if (core.entities().empty()) {
    throw SamplingFailure("sampled universe is empty after " + std::to_string(config.k) +
                          "-core extraction; try a smaller k or more iterations");
  }
  std::vector<Fact> facts = core.facts();
  for (const auto& [id, e] : core.entities()) {
    for (std::size_t fi : kg.incident(id)) {
      const Fact& f = kg.facts()[fi];
      if (!f.links_entities() && f.subject == id) facts.push_back(f);
    }
  }
  json prov{{"sampler", config},
            {"parent_fingerprint", kg.fingerprint()},
            {"expansion_entities", expansion.entities().size()},
            {"expansion_facts", expansion.facts().size()}};
  return make_universe(core.with_facts(std::move(facts)), std::move(prov));
}

}  // namespace twinworld
