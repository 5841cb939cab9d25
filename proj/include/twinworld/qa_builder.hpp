#pragma once
// Multi-hop QA over the parallel corpora: which facts each page states, the
// fact graph they form, motif sampling on that graph, and question
// composition in synthetic names followed by remapping to real names.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinworld/corpus_builder.hpp"
#include "twinworld/generation.hpp"
#include "twinworld/perturber.hpp"

namespace twinworld {

// Labels of fact-graph nodes for one variant. Literal nodes are written
// "lit:<kind>:<real value>"; the synth-mapped variant shows shifted dates.
class NodeLabels {
 public:
  NodeLabels(const Universe& universe, int delta_years) : universe_(universe), delta_years_(delta_years) {}
  std::string node(const std::string& id) const;
  std::string literal(const Literal& real) const;
  const Universe& universe() const { return universe_; }
  int delta_years() const { return delta_years_; }

 private:
  const Universe& universe_;
  int delta_years_;
};

std::string literal_node_id(const Literal& l);
bool is_literal_node(const std::string& id);

struct FactTemplate {
  Fact fact;  // real values
  bool outgoing = true;  // the page entity is the subject
  std::string known;
  std::string relation;
  std::string answer;
  std::string qualifier;  // time qualifier label, empty when unqualified
  std::string qualifier_answer;
};

// One template per source fact of the page, in the variant's labels.
std::vector<FactTemplate> fact_templates(const PagePair& page, const NodeLabels& labels);

struct PresentFact {
  Fact fact;
  bool qualifier = false;  // the time qualifier was also stated
};

// Asks the extractor to fill every template and keeps the facts whose
// normalized answers match. Transport failures propagate.
std::vector<PresentFact> extract_present_facts(const SymbolicPage& page, const std::vector<FactTemplate>& templates,
                                               GenerationClient& extractor);

struct FactEdge {
  std::string id;  // "<page>#<n>"
  std::string source;
  std::string target;
  std::string relation;  // property id; qualifier edges use "<qualifier>@<property>:<object>"
  std::string page;
  Fact fact;
  bool qualifier_edge = false;

  // (source, relation, target); equal for the same fact on different pages.
  std::string triple() const { return source + "|" + relation + "|" + target; }
  std::string fact_key() const { return fact.key() + (qualifier_edge ? "#q" : ""); }
  std::string relation_label(const NodeLabels& labels) const;
};

class FactGraph {
 public:
  FactGraph() = default;
  explicit FactGraph(std::vector<FactEdge> edges);
  const std::vector<FactEdge>& edges() const { return edges_; }
  const std::set<std::string>& nodes() const { return nodes_; }
  const std::vector<std::size_t>& out(const std::string& node) const;
  const std::vector<std::size_t>& in(const std::string& node) const;
  // Canonical JSON lines: ids only, or with the variant's labels.
  std::string to_jsonl(const NodeLabels* labels = nullptr) const;

 private:
  std::vector<FactEdge> edges_;
  std::set<std::string> nodes_;
  std::map<std::string, std::vector<std::size_t>> out_, in_;
  std::vector<std::size_t> none_;
};

// One edge per validated fact and page, plus one qualifier edge from the
// subject to the time literal when the qualifier was validated too.
FactGraph build_fact_graph(const Corpus& corpus, const std::map<EntityId, std::vector<PresentFact>>& validated);

struct MotifEdge {
  std::string source;
  std::string target;
};

struct Motif {
  std::string name;
  std::vector<MotifEdge> edges;

  std::vector<std::string> nodes() const;
  std::vector<std::string> roots() const;    // no incoming edge
  std::string answer() const;                // the single node without outgoing edges
  std::vector<std::string> bridges() const;  // everything else
  std::size_t hop_count() const { return edges.size(); }
  // Throws ConfigError unless weakly connected with exactly one sink.
  void validate() const;
};

std::vector<Motif> motifs_from_json(const nlohmann::json& j);
const std::vector<Motif>& default_motifs();

struct MotifMatch {
  std::string motif;
  std::map<std::string, std::string> binding;  // motif node -> graph node
  std::vector<std::size_t> edges;              // graph edge per motif edge
};

// Roots' graph nodes followed by the relation of every edge, in motif order.
std::string reasoning_key(const Motif& motif, const MotifMatch& match, const FactGraph& graph);

struct MotifSample {
  std::vector<MotifMatch> matches;
  nlohmann::json report;  // requested, found, attempts, rejections
};

// Random extension from a random first edge. Accepted matches have distinct
// nodes, one page per edge, a fresh reasoning key, and keep every fact and
// bridge node at or under `reuse_cap` uses.
MotifSample sample_motifs(const FactGraph& graph, const Motif& motif, int budget, std::uint64_t rng_seed,
                          int reuse_cap = 5);

// Drops every match whose fact triples are a subset of a match with more
// hops. Order of survivors is kept.
std::vector<MotifMatch> dedupe_submotifs(const std::vector<MotifMatch>& matches, const FactGraph& graph);

struct SingleHop {
  std::string edge_id;
  std::string question;
  std::string answer;
};

// Throws GateFailure "single hop" once `retry_cap` extra attempts fail the
// subject and answer checks.
std::string compose_single_hop(const FactEdge& edge, const NodeLabels& labels, GenerationClient& qgen,
                               int retry_cap = 2);

// Throws GateFailure "no composition" or "mention rule".
std::string compose_multi_hop(const Motif& motif, const MotifMatch& match, const FactGraph& graph,
                              const std::vector<SingleHop>& hops, const NodeLabels& labels, GenerationClient& qgen,
                              int retry_cap = 2);

struct QaEdge {
  std::string source;
  std::string relation;
  std::string target;
  std::string page;
  std::string fact;  // fact key
  std::string source_label;
  std::string relation_label;
  std::string target_label;
};

struct QaInstance {
  std::string pair_id;
  std::string motif;
  Variant variant = Variant::sm;
  std::vector<QaEdge> subgraph;
  std::vector<SingleHop> single_hops;
  std::string question;
  std::string answer;
  std::vector<std::string> roots;    // graph nodes
  std::vector<std::string> bridges;  // graph nodes
  std::string answer_node;
  std::vector<std::string> gold_page_ids;
};

void to_json(nlohmann::json& j, const QaInstance& q);
void from_json(const nlohmann::json& j, QaInstance& q);

// Real-mapped twin of a synth-mapped instance. Throws RemapError when a
// synthetic label survives in the question or the answer does not map to the
// real label of the answer node.
QaInstance remap_question(const QaInstance& synth, const RenamePlan& plan, const NodeLabels& real_labels);

struct QaOptions {
  int per_motif = 20;
  int reuse_cap = 5;
  int retry_cap = 2;
  std::uint64_t rng_seed = 7;
  int in_flight = 4;
  std::vector<Motif> motifs = default_motifs();
};

struct QaDataset {
  std::vector<QaInstance> rm;
  std::vector<QaInstance> sm;
  FactGraph fact_graph;
  nlohmann::json report;  // per motif shortfall and validation counts
};

QaDataset build_qa(const Corpus& corpus, const Universe& real, const Universe& synth, const RenamePlan& plan,
                   GenerationClient& extractor, GenerationClient& qgen, const QaOptions& options = {});

// qa_rm.jsonl, qa_sm.jsonl, qa_shortfall.json, fact_graph.jsonl
void save_qa(const QaDataset& qa, const std::string& directory);
std::vector<QaInstance> load_qa_file(const std::string& path);

}  // namespace twinworld
