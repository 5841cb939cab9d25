#pragma once
// Parallel document generation: a synthetic-name draft, symbolic references,
// then the real-name rendering, with every validation gate applied per page
// and corpus-wide filtering passes afterwards.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinworld/generation.hpp"
#include "twinworld/perturber.hpp"
#include "twinworld/text.hpp"
#include "twinworld/universe_sampler.hpp"

namespace twinworld {

enum class Variant { rm, sm };
std::string_view to_string(Variant v) noexcept;
Variant variant_from(std::string_view s);

struct SymbolicPage {
  EntityId entity;
  std::string text;
  std::vector<LinkSpan> refs;

  static SymbolicPage parse(EntityId entity, std::string text);
  // Sorted multiset of referenced ids.
  std::vector<EntityId> ref_ids() const;
};

struct PagePair {
  EntityId entity;
  std::string sm_title;
  std::string rm_title;
  std::vector<Fact> facts;  // source facts over real values
  std::string draft;
  SymbolicPage synth;
  SymbolicPage real;
  double draft_similarity = 0.0;
  double pair_similarity = 0.0;      // after label/date normalisation; gated
  double pair_similarity_raw = 0.0;  // plain annotated texts; recorded only
  bool retained = false;
  std::string drop_reason;
  std::string drop_detail;
  int attempts = 0;
};

struct Corpus {
  std::map<EntityId, PagePair> pages;  // retained and dropped
  nlohmann::json manifest = nlohmann::json::object();

  std::vector<EntityId> retained_ids() const;
  const PagePair* retained(const EntityId& id) const;
  // Directed hyperlinks between retained pages of one variant; self-links and
  // links to non-retained pages are omitted.
  std::map<EntityId, std::set<EntityId>> hyperlinks(Variant v) const;
  const SymbolicPage& page(const EntityId& id, Variant v) const;
  std::string title(const EntityId& id, Variant v) const;
};

// 1 - OSA(a, b) / max(|a|, |b|) over code points; two empty strings give 1.
std::size_t dl_distance(std::string_view a, std::string_view b);
double dl_similarity(std::string_view a, std::string_view b);

struct GateThresholds {
  double draft = 0.95;  // strictly greater passes
  double pair = 0.85;
};

// Majority orientation of the entity's incident facts; ties keep outgoing.
std::vector<Fact> select_fact_orientation(const EntityId& entity, const Universe& universe);

// Facts rendered for prompts: subject/relation/object/qualifier display strings.
nlohmann::json facts_for_prompt(const std::vector<Fact>& facts, const Universe& labels);

std::string generate_page(const EntityId& entity, const std::vector<Fact>& facts, const Universe& labels,
                          GenerationClient& text_gen);

// Throws GateFailure "invented reference", "display mismatch" or "draft drift".
SymbolicPage insert_symbolic_refs(const EntityId& entity, const std::string& draft,
                                  const std::map<EntityId, std::string>& id_to_label, GenerationClient& text_gen,
                                  const GateThresholds& gates = {}, double* similarity = nullptr);

struct RealizeResult {
  SymbolicPage page;
  double pair_similarity = 0.0;
  double pair_similarity_raw = 0.0;
};

// `dates` maps shifted date strings on the page to the originals. Throws
// GateFailure "structure drift", "leakage", "shifted date" or "pair drift".
RealizeResult realize_real_mapped(const SymbolicPage& synth, const RenamePlan& plan,
                                  const std::map<std::string, std::string>& dates, GenerationClient& text_gen,
                                  const GateThresholds& gates = {});

// Pair similarity after replacing labels of the page's entities (and their
// last words) by id placeholders and dates by slot placeholders.
double normalized_pair_similarity(const SymbolicPage& synth, const SymbolicPage& real, const RenamePlan& plan,
                                  const std::map<std::string, std::string>& dates);

// True when the judge's guess names the real entity (label or any alias).
bool novelty_filter(const SymbolicPage& synth, GenerationClient& judge, const std::string& real_label,
                    const std::vector<std::string>& aliases);

// Drops every retained page outside the largest weakly connected component
// of the hyperlink graph. Both variants are pruned together.
Corpus prune_to_lcc(Corpus corpus);

struct CorpusOptions {
  GateThresholds gates;
  int page_attempts = 2;  // quarantine: transport failures get one more try
  int in_flight = 4;
};

Corpus build_corpus(const Universe& real, const Universe& synth, const RenamePlan& plan, GenerationClient& text_gen,
                    GenerationClient& judge, const CorpusOptions& options = {});

// pages/rm/<id>.md, pages/sm/<id>.md, pages.jsonl, manifest.json
void save_corpus(const Corpus& corpus, const std::string& directory);
Corpus load_corpus(const std::string& directory);

}  // namespace twinworld
