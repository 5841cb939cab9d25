#include "twinworld/qa_builder.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twinworld/assets.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/evaluator.hpp"
#include "twinworld/hashing.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;
namespace fs = std::filesystem;

std::string literal_node_id(const Literal& l) { return "lit:" + std::string(to_string(l.kind)) + ":" + l.value; }

bool is_literal_node(const std::string& id) { return starts_with(id, "lit:"); }

namespace {

Literal literal_from_node(const std::string& id) {
  std::size_t colon = id.find(':', 4);
  if (!is_literal_node(id) || colon == std::string::npos) throw InputError("not a literal node: " + id);
  return Literal{literal_kind_from(id.substr(4, colon - 4)), id.substr(colon + 1)};
}

const Qualifier* time_qualifier(const Fact& f) {
  for (const auto& q : f.qualifiers) {
    if (q.value.kind == LiteralKind::timestamp) return &q;
  }
  return nullptr;
}

std::string object_node(const Fact& f) { return f.object.is_entity() ? f.object.entity : literal_node_id(*f.object.literal); }

}  // namespace

std::string NodeLabels::literal(const Literal& real) const {
  if (real.kind == LiteralKind::timestamp && delta_years_ != 0) {
    return display_literal(Literal{real.kind, shift_timestamp(real.value, delta_years_)});
  }
  return display_literal(real);
}

std::string NodeLabels::node(const std::string& id) const {
  if (is_literal_node(id)) return literal(literal_from_node(id));
  return universe_.label(id);
}

std::vector<FactTemplate> fact_templates(const PagePair& page, const NodeLabels& labels) {
  std::vector<FactTemplate> out;
  for (const auto& f : page.facts) {
    FactTemplate t;
    t.fact = f;
    t.outgoing = f.subject == page.entity;
    t.relation = f.property_label;
    if (t.outgoing) {
      t.known = labels.node(f.subject);
      t.answer = labels.node(object_node(f));
    } else {
      t.known = labels.node(page.entity);
      t.answer = labels.node(f.subject);
    }
    if (const Qualifier* q = time_qualifier(f)) {
      t.qualifier = q->property_label;
      t.qualifier_answer = labels.literal(q->value);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PresentFact> extract_present_facts(const SymbolicPage& page, const std::vector<FactTemplate>& templates,
                                               GenerationClient& extractor) {
  if (templates.empty()) return {};
  json tj = json::array();
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& t = templates[i];
    json row{{"n", static_cast<int>(i + 1)},
             {"known", t.known},
             {"relation", t.relation},
             {"direction", t.outgoing ? "out" : "in"}};
    if (!t.qualifier.empty()) row["qualifier"] = t.qualifier;
    tj.push_back(row);
  }
  std::string reply = extractor.call(GenerationRequest{"fact_extraction", json{{"templates", tj}, {"page", page.text}}});

  std::map<std::size_t, std::vector<std::string>> answers;
  for (const auto& raw : split_lines(reply)) {
    std::string line = trim(raw);
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::size_t n = 0;
    try {
      n = std::stoul(line.substr(0, colon));
    } catch (const std::exception&) {
      continue;
    }
    std::string rest = line.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t bar = rest.find("||", pos);
      std::string part = trim(rest.substr(pos, bar == std::string::npos ? std::string::npos : bar - pos));
      if (!part.empty() && part != "none") answers[n].push_back(part);
      if (bar == std::string::npos) break;
      pos = bar + 2;
    }
  }

  std::vector<PresentFact> out;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& t = templates[i];
    bool plain = false;
    bool qualified = false;
    const std::string want = normalized_text(t.answer);
    const std::string want_q = normalized_text(t.qualifier_answer);
    for (const auto& a : answers[i + 1]) {
      std::string obj = a;
      std::string when;
      std::size_t sep = a.find(";;");
      if (sep != std::string::npos) {
        obj = trim(a.substr(0, sep));
        when = trim(a.substr(sep + 2));
      }
      if (normalized_text(obj) != want) continue;
      plain = true;
      if (!t.qualifier.empty() && !want_q.empty() && normalized_text(when) == want_q) qualified = true;
    }
    if (plain) out.push_back({t.fact, qualified});
  }
  return out;
}

std::string FactEdge::relation_label(const NodeLabels& labels) const {
  if (!qualifier_edge) return fact.property_label;
  const Qualifier* q = time_qualifier(fact);
  return (q ? q->property_label : std::string("time")) + " of " + fact.property_label + " " +
         labels.node(object_node(fact));
}

FactGraph::FactGraph(std::vector<FactEdge> edges) : edges_(std::move(edges)) {
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    nodes_.insert(edges_[i].source);
    nodes_.insert(edges_[i].target);
    out_[edges_[i].source].push_back(i);
    in_[edges_[i].target].push_back(i);
  }
}

const std::vector<std::size_t>& FactGraph::out(const std::string& node) const {
  auto it = out_.find(node);
  return it == out_.end() ? none_ : it->second;
}

const std::vector<std::size_t>& FactGraph::in(const std::string& node) const {
  auto it = in_.find(node);
  return it == in_.end() ? none_ : it->second;
}

std::string FactGraph::to_jsonl(const NodeLabels* labels) const {
  std::string out;
  for (const auto& e : edges_) {
    json j{{"id", e.id}, {"source", e.source}, {"relation", e.relation}, {"target", e.target}, {"page", e.page}};
    if (labels) {
      j["source_label"] = labels->node(e.source);
      j["relation_label"] = e.relation_label(*labels);
      j["target_label"] = labels->node(e.target);
    }
    out += j.dump() + "\n";
  }
  return out;
}

FactGraph build_fact_graph(const Corpus& corpus, const std::map<EntityId, std::vector<PresentFact>>& validated) {
  std::vector<FactEdge> edges;
  for (const auto& [page, facts] : validated) {
    if (!corpus.retained(page)) throw InputError("validated facts for page " + page + " which is not in the corpus");
    std::size_t n = 0;
    for (const auto& pf : facts) {
      const Fact& f = pf.fact;
      std::string target = object_node(f);
      if (target == f.subject) continue;
      edges.push_back({page + "#" + std::to_string(n++), f.subject, target, f.property, page, f, false});
      if (pf.qualifier) {
        const Qualifier* q = time_qualifier(f);
        if (!q) continue;
        edges.push_back({page + "#" + std::to_string(n++), f.subject, literal_node_id(q->value),
                         q->property + "@" + f.property + ":" + target, page, f, true});
      }
    }
  }
  return FactGraph(std::move(edges));
}

std::vector<std::string> Motif::nodes() const {
  std::vector<std::string> out;
  for (const auto& e : edges) {
    for (const auto* n : {&e.source, &e.target}) {
      if (std::find(out.begin(), out.end(), *n) == out.end()) out.push_back(*n);
    }
  }
  return out;
}

std::vector<std::string> Motif::roots() const {
  std::vector<std::string> out;
  for (const auto& n : nodes()) {
    bool has_in = std::any_of(edges.begin(), edges.end(), [&](const MotifEdge& e) { return e.target == n; });
    if (!has_in) out.push_back(n);
  }
  return out;
}

std::string Motif::answer() const {
  for (const auto& n : nodes()) {
    bool has_out = std::any_of(edges.begin(), edges.end(), [&](const MotifEdge& e) { return e.source == n; });
    if (!has_out) return n;
  }
  return "";
}

std::vector<std::string> Motif::bridges() const {
  auto r = roots();
  auto a = answer();
  std::vector<std::string> out;
  for (const auto& n : nodes()) {
    if (n != a && std::find(r.begin(), r.end(), n) == r.end()) out.push_back(n);
  }
  return out;
}

void Motif::validate() const {
  if (name.empty()) throw ConfigError("motif without a name");
  if (edges.empty()) throw ConfigError("motif " + name + " has no edges");
  auto ns = nodes();
  std::size_t sinks = 0;
  for (const auto& n : ns) {
    if (std::none_of(edges.begin(), edges.end(), [&](const MotifEdge& e) { return e.source == n; })) ++sinks;
  }
  if (sinks != 1) throw ConfigError("motif " + name + " must have exactly one answer node");
  for (const auto& e : edges) {
    if (e.source == e.target) throw ConfigError("motif " + name + " has a self-loop");
  }
  std::set<std::string> seen{ns.front()};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& e : edges) {
      if (seen.count(e.source) != seen.count(e.target)) {
        seen.insert(e.source);
        seen.insert(e.target);
        grew = true;
      }
    }
  }
  if (seen.size() != ns.size()) throw ConfigError("motif " + name + " is not connected");
}

std::vector<Motif> motifs_from_json(const json& j) {
  std::vector<Motif> out;
  for (const auto& m : j.at("motifs")) {
    Motif motif;
    motif.name = m.at("name").get<std::string>();
    for (const auto& e : m.at("edges")) motif.edges.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    motif.validate();
    out.push_back(std::move(motif));
  }
  return out;
}

const std::vector<Motif>& default_motifs() {
  static const std::vector<Motif> motifs = motifs_from_json(json::parse(assets::get("config/motifs.json")));
  return motifs;
}

std::string reasoning_key(const Motif& motif, const MotifMatch& match, const FactGraph& graph) {
  std::string key;
  for (const auto& r : motif.roots()) key += match.binding.at(r) + ";";
  key += "|";
  for (std::size_t i : match.edges) key += graph.edges()[i].relation + ";";
  return key;
}

namespace {

// Edge order in which every edge after the first touches an earlier one.
std::vector<std::size_t> extension_order(const Motif& motif) {
  std::vector<std::size_t> order{0};
  std::set<std::string> bound{motif.edges[0].source, motif.edges[0].target};
  std::vector<bool> placed(motif.edges.size(), false);
  placed[0] = true;
  while (order.size() < motif.edges.size()) {
    for (std::size_t i = 0; i < motif.edges.size(); ++i) {
      if (placed[i]) continue;
      if (bound.count(motif.edges[i].source) || bound.count(motif.edges[i].target)) {
        placed[i] = true;
        order.push_back(i);
        bound.insert(motif.edges[i].source);
        bound.insert(motif.edges[i].target);
      }
    }
  }
  return order;
}

}  // namespace

MotifSample sample_motifs(const FactGraph& graph, const Motif& motif, int budget, std::uint64_t rng_seed,
                          int reuse_cap) {
  motif.validate();
  MotifSample result;
  const auto& edges = graph.edges();
  const std::string answer = motif.answer();
  const auto bridges = motif.bridges();
  const auto order = extension_order(motif);
  const std::size_t max_attempts = static_cast<std::size_t>(std::max(budget, 0)) * 200;

  std::set<std::string> keys;
  std::map<std::string, int> fact_uses;
  std::map<std::string, int> bridge_uses;
  std::map<std::string, int> rejected{{"dead_end", 0}, {"duplicate_key", 0}, {"reuse", 0}};
  Rng rng(rng_seed);
  std::size_t attempts = 0;

  auto literal_ok = [&](const MotifEdge& me, const FactEdge& ge) {
    return !is_literal_node(ge.target) || me.target == answer;
  };

  while (!edges.empty() && static_cast<int>(result.matches.size()) < budget && attempts < max_attempts) {
    ++attempts;
    MotifMatch m;
    m.motif = motif.name;
    m.edges.assign(motif.edges.size(), 0);
    std::set<std::string> used_nodes;
    std::set<std::string> used_pages;
    bool ok = true;
    for (std::size_t step = 0; step < order.size() && ok; ++step) {
      const MotifEdge& me = motif.edges[order[step]];
      auto sb = m.binding.find(me.source);
      auto tb = m.binding.find(me.target);
      std::vector<std::size_t> cands;
      auto consider = [&](std::size_t gi) {
        const FactEdge& ge = edges[gi];
        if (!literal_ok(me, ge) || used_pages.count(ge.page)) return;
        if (sb != m.binding.end() ? ge.source != sb->second : used_nodes.count(ge.source) > 0) return;
        if (tb != m.binding.end() ? ge.target != tb->second : used_nodes.count(ge.target) > 0) return;
        if (ge.source == ge.target) return;
        cands.push_back(gi);
      };
      if (step == 0) {
        consider(rng.index(edges.size()));
      } else if (sb != m.binding.end()) {
        for (std::size_t gi : graph.out(sb->second)) consider(gi);
      } else {
        for (std::size_t gi : graph.in(tb->second)) consider(gi);
      }
      if (cands.empty()) {
        ok = false;
        break;
      }
      std::size_t gi = cands.size() == 1 ? cands[0] : cands[rng.index(cands.size())];
      const FactEdge& ge = edges[gi];
      m.edges[order[step]] = gi;
      m.binding[me.source] = ge.source;
      m.binding[me.target] = ge.target;
      used_nodes.insert(ge.source);
      used_nodes.insert(ge.target);
      used_pages.insert(ge.page);
    }
    if (!ok) {
      ++rejected["dead_end"];
      continue;
    }
    std::string key = reasoning_key(motif, m, graph);
    if (keys.count(key)) {
      ++rejected["duplicate_key"];
      continue;
    }
    bool over = false;
    for (std::size_t gi : m.edges) over = over || fact_uses[edges[gi].fact_key()] >= reuse_cap;
    for (const auto& b : bridges) over = over || bridge_uses[m.binding.at(b)] >= reuse_cap;
    if (over) {
      ++rejected["reuse"];
      continue;
    }
    keys.insert(key);
    for (std::size_t gi : m.edges) ++fact_uses[edges[gi].fact_key()];
    for (const auto& b : bridges) ++bridge_uses[m.binding.at(b)];
    result.matches.push_back(std::move(m));
  }
  result.report = {{"requested", budget},
                   {"found", result.matches.size()},
                   {"attempts", attempts},
                   {"rejected", rejected}};
  return result;
}

std::vector<MotifMatch> dedupe_submotifs(const std::vector<MotifMatch>& matches, const FactGraph& graph) {
  std::vector<std::vector<std::string>> triples;
  for (const auto& m : matches) {
    std::vector<std::string> t;
    for (std::size_t gi : m.edges) t.push_back(graph.edges()[gi].triple());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    triples.push_back(std::move(t));
  }
  std::vector<MotifMatch> out;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    bool contained = false;
    for (std::size_t j = 0; j < matches.size() && !contained; ++j) {
      if (matches[j].edges.size() <= matches[i].edges.size()) continue;
      contained = std::includes(triples[j].begin(), triples[j].end(), triples[i].begin(), triples[i].end());
    }
    if (!contained) out.push_back(matches[i]);
  }
  return out;
}

std::string compose_single_hop(const FactEdge& edge, const NodeLabels& labels, GenerationClient& qgen, int retry_cap) {
  const std::string subject = labels.node(edge.source);
  const std::string answer = labels.node(edge.target);
  std::string relation = edge.fact.property_label;
  std::string via;
  if (edge.qualifier_edge) {
    const Qualifier* q = time_qualifier(edge.fact);
    relation = q ? q->property_label : "time";
    via = "for " + edge.fact.property_label + " " + labels.node(object_node(edge.fact));
  }
  GenerationRequest req{"single_hop_question",
                        json{{"answer", answer}, {"subject", subject}, {"relation", relation}, {"via", via}}, 256};
  std::string last;
  for (int attempt = 0; attempt <= retry_cap; ++attempt) {
    last = trim(qgen.call(req));
    if (!last.empty() && contains_whole_word(last, subject) && !contains_whole_word(last, answer)) return last;
  }
  throw GateFailure("single hop", edge.id + ": '" + last + "'");
}

std::string compose_multi_hop(const Motif& motif, const MotifMatch& match, const FactGraph& graph,
                              const std::vector<SingleHop>& hops, const NodeLabels& labels, GenerationClient& qgen,
                              int retry_cap) {
  json structure = json::array();
  for (std::size_t gi : match.edges) {
    const FactEdge& e = graph.edges()[gi];
    structure.push_back(
        {{"source", labels.node(e.source)}, {"relation", e.relation_label(labels)}, {"target", labels.node(e.target)}});
  }
  std::vector<std::string> hop_lines;
  for (const auto& h : hops) hop_lines.push_back(h.question + " -> " + h.answer);
  std::vector<std::string> roots, bridges;
  for (const auto& r : motif.roots()) roots.push_back(labels.node(match.binding.at(r)));
  for (const auto& b : motif.bridges()) bridges.push_back(labels.node(match.binding.at(b)));
  const std::string answer = labels.node(match.binding.at(motif.answer()));
  GenerationRequest req{"compose_question",
                        json{{"answer", answer},
                             {"answer_node", answer},
                             {"structure", structure},
                             {"hops", hop_lines},
                             {"roots", roots},
                             {"bridges", bridges}},
                        512};
  std::string why;
  for (int attempt = 0; attempt <= retry_cap; ++attempt) {
    std::string reply = qgen.call(req);
    if (reply.find("No composition") != std::string::npos) throw GateFailure("no composition", motif.name);
    std::string question, stated;
    for (const auto& raw : split_lines(reply)) {
      std::string line = trim(raw);
      if (starts_with(line, "Question:")) question = trim(line.substr(9));
      if (starts_with(line, "Answer:")) stated = trim(line.substr(7));
    }
    if (question.empty()) {
      why = "no question in reply";
      continue;
    }
    auto missing = std::find_if(roots.begin(), roots.end(), [&](const std::string& r) { return !contains_whole_word(question, r); });
    if (missing != roots.end()) {
      why = "root '" + *missing + "' not mentioned";
      continue;
    }
    auto leaked = std::find_if(bridges.begin(), bridges.end(), [&](const std::string& b) { return contains_whole_word(question, b); });
    if (leaked != bridges.end()) {
      why = "bridge '" + *leaked + "' mentioned";
      continue;
    }
    if (normalized_text(stated) != normalized_text(answer)) {
      why = "stated answer '" + stated + "' differs";
      continue;
    }
    return question;
  }
  throw GateFailure("mention rule", why);
}

void to_json(json& j, const QaInstance& q) {
  json sub = json::array();
  for (const auto& e : q.subgraph) {
    sub.push_back({{"source", e.source},
                   {"relation", e.relation},
                   {"target", e.target},
                   {"page", e.page},
                   {"fact", e.fact},
                   {"source_label", e.source_label},
                   {"relation_label", e.relation_label},
                   {"target_label", e.target_label}});
  }
  json hops = json::array();
  for (const auto& h : q.single_hops) hops.push_back({{"edge", h.edge_id}, {"question", h.question}, {"answer", h.answer}});
  j = json{{"pair_id", q.pair_id},
           {"motif", q.motif},
           {"variant", to_string(q.variant)},
           {"question", q.question},
           {"answer", q.answer},
           {"gold_page_ids", q.gold_page_ids},
           {"subgraph", sub},
           {"single_hops", hops},
           {"roots", q.roots},
           {"bridges", q.bridges},
           {"answer_node", q.answer_node}};
}

void from_json(const json& j, QaInstance& q) {
  q.pair_id = j.at("pair_id").get<std::string>();
  q.motif = j.at("motif").get<std::string>();
  q.variant = variant_from(j.at("variant").get<std::string>());
  q.question = j.at("question").get<std::string>();
  q.answer = j.at("answer").get<std::string>();
  q.gold_page_ids = j.at("gold_page_ids").get<std::vector<std::string>>();
  q.subgraph.clear();
  for (const auto& e : j.at("subgraph")) {
    q.subgraph.push_back({e.at("source").get<std::string>(), e.at("relation").get<std::string>(),
                          e.at("target").get<std::string>(), e.at("page").get<std::string>(),
                          e.value("fact", ""), e.value("source_label", ""), e.value("relation_label", ""),
                          e.value("target_label", "")});
  }
  q.single_hops.clear();
  for (const auto& h : j.value("single_hops", json::array())) {
    q.single_hops.push_back({h.value("edge", ""), h.at("question").get<std::string>(), h.at("answer").get<std::string>()});
  }
  q.roots = j.value("roots", std::vector<std::string>{});
  q.bridges = j.value("bridges", std::vector<std::string>{});
  q.answer_node = j.value("answer_node", "");
}

QaInstance remap_question(const QaInstance& synth, const RenamePlan& plan, const NodeLabels& real_labels) {
  std::map<std::string, std::string> mapping;
  std::vector<std::string> synthetic;
  for (const auto& [id, label] : plan.mapping) {
    auto it = plan.real_labels.find(id);
    if (it == plan.real_labels.end()) throw RemapError("no real label for " + id);
    if (label == it->second) continue;
    mapping[label] = it->second;
    synthetic.push_back(label);
  }
  NodeLabels synth_dates(real_labels.universe(), plan.delta_years);
  for (const auto& e : synth.subgraph) {
    for (const auto* n : {&e.source, &e.target}) {
      if (!is_literal_node(*n)) continue;
      Literal l = literal_from_node(*n);
      std::string shifted = synth_dates.literal(l);
      std::string original = real_labels.literal(l);
      if (shifted != original) mapping[shifted] = original;
    }
  }

  QaInstance rm = synth;
  rm.variant = Variant::rm;
  rm.question = replace_whole_words(synth.question, mapping);
  rm.answer = replace_whole_words(synth.answer, mapping);
  for (auto& h : rm.single_hops) {
    h.question = replace_whole_words(h.question, mapping);
    h.answer = replace_whole_words(h.answer, mapping);
  }
  for (auto& e : rm.subgraph) {
    e.source_label = real_labels.node(e.source);
    e.target_label = real_labels.node(e.target);
    e.relation_label = replace_whole_words(e.relation_label, mapping);
  }
  const std::string expected = real_labels.node(synth.answer_node);
  if (normalized_text(rm.answer) != normalized_text(expected)) {
    throw RemapError(synth.pair_id + ": answer '" + rm.answer + "' does not match '" + expected + "'");
  }
  for (const auto& s : synthetic) {
    if (contains_whole_word(rm.question, s)) throw RemapError(synth.pair_id + ": unmapped label '" + s + "'");
  }
  return rm;
}

QaDataset build_qa(const Corpus& corpus, const Universe& real, const Universe& synth, const RenamePlan& plan,
                   GenerationClient& extractor, GenerationClient& qgen, const QaOptions& options) {
  NodeLabels sm_labels(synth, plan.delta_years);
  NodeLabels rm_labels(real, 0);
  QaDataset out;

  const auto ids = corpus.retained_ids();
  using Extracted = std::optional<std::vector<PresentFact>>;
  auto extracted = parallel_map<Extracted>(ids.size(), options.in_flight, [&](std::size_t i) -> Extracted {
    const PagePair& p = *corpus.retained(ids[i]);
    try {
      return extract_present_facts(p.synth, fact_templates(p, sm_labels), extractor);
    } catch (const TransportError&) {
      return std::nullopt;
    }
  });
  std::map<EntityId, std::vector<PresentFact>> validated;
  std::size_t unvalidated = 0, templates = 0, present = 0, qualified = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    templates += corpus.retained(ids[i])->facts.size();
    if (!extracted[i]) {
      ++unvalidated;
      continue;
    }
    for (const auto& pf : *extracted[i]) qualified += pf.qualifier ? 1 : 0;
    present += extracted[i]->size();
    validated[ids[i]] = std::move(*extracted[i]);
  }
  out.fact_graph = build_fact_graph(corpus, validated);
  const FactGraph& graph = out.fact_graph;

  json motifs_report = json::object();
  std::vector<MotifMatch> sampled;
  std::map<std::string, const Motif*> by_name;
  for (const auto& motif : options.motifs) {
    by_name[motif.name] = &motif;
    auto s = sample_motifs(graph, motif, options.per_motif, mix_seed(options.rng_seed, motif.name, 0), options.reuse_cap);
    motifs_report[motif.name] = {{"requested", options.per_motif}, {"sampled", s.matches.size()}, {"sampling", s.report}};
    sampled.insert(sampled.end(), s.matches.begin(), s.matches.end());
  }
  auto kept = dedupe_submotifs(sampled, graph);
  for (const auto& motif : options.motifs) motifs_report[motif.name]["after_dedupe"] = 0;
  for (const auto& m : kept) motifs_report[m.motif]["after_dedupe"] = motifs_report[m.motif]["after_dedupe"].get<int>() + 1;

  struct Composed {
    std::optional<QaInstance> sm;
    std::string reason;
  };
  auto composed = parallel_map<Composed>(kept.size(), options.in_flight, [&](std::size_t i) -> Composed {
    const MotifMatch& m = kept[i];
    const Motif& motif = *by_name.at(m.motif);
    QaInstance q;
    q.motif = m.motif;
    q.variant = Variant::sm;
    try {
      for (std::size_t gi : m.edges) {
        const FactEdge& e = graph.edges()[gi];
        q.single_hops.push_back({e.id, compose_single_hop(e, sm_labels, qgen, options.retry_cap), sm_labels.node(e.target)});
      }
      q.question = compose_multi_hop(motif, m, graph, q.single_hops, sm_labels, qgen, options.retry_cap);
    } catch (const GateFailure& g) {
      return {std::nullopt, g.reason()};
    } catch (const TransportError&) {
      return {std::nullopt, "transport"};
    }
    std::set<std::string> pages;
    for (std::size_t gi : m.edges) {
      const FactEdge& e = graph.edges()[gi];
      q.subgraph.push_back({e.source, e.relation, e.target, e.page, e.fact_key(), sm_labels.node(e.source),
                            e.relation_label(sm_labels), sm_labels.node(e.target)});
      pages.insert(e.page);
    }
    q.gold_page_ids.assign(pages.begin(), pages.end());
    for (const auto& r : motif.roots()) q.roots.push_back(m.binding.at(r));
    for (const auto& b : motif.bridges()) q.bridges.push_back(m.binding.at(b));
    q.answer_node = m.binding.at(motif.answer());
    q.answer = sm_labels.node(q.answer_node);
    for (const auto& [id, real_label] : plan.real_labels) {
      auto s = plan.mapping.find(id);
      if (s == plan.mapping.end() || s->second == real_label) continue;
      if (contains_whole_word(q.question, real_label)) return {std::nullopt, "leakage"};
    }
    return {std::move(q), ""};
  });

  std::map<std::string, std::map<std::string, int>> discarded;
  std::map<std::string, int> fact_uses, bridge_uses;
  std::set<std::string> keys;
  std::size_t next = 0;
  for (std::size_t i = 0; i < composed.size(); ++i) {
    auto& c = composed[i];
    const std::string& motif = kept[i].motif;
    if (!c.sm) {
      ++discarded[motif][c.reason];
      continue;
    }
    // The per-motif caps of the sampler do not bound reuse across motifs.
    bool over = false;
    for (const auto& e : c.sm->subgraph) over = over || fact_uses[e.fact] >= options.reuse_cap;
    for (const auto& b : c.sm->bridges) over = over || bridge_uses[b] >= options.reuse_cap;
    if (over) {
      ++discarded[motif]["reuse"];
      continue;
    }
    if (keys.count(reasoning_key(*by_name.at(motif), kept[i], graph))) {
      ++discarded[motif]["duplicate_key"];
      continue;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "qa-%05zu", next);
    c.sm->pair_id = buf;
    QaInstance rm;
    try {
      rm = remap_question(*c.sm, plan, rm_labels);
    } catch (const RemapError&) {
      ++discarded[motif]["remap"];
      continue;
    }
    ++next;
    for (const auto& e : c.sm->subgraph) ++fact_uses[e.fact];
    for (const auto& b : c.sm->bridges) ++bridge_uses[b];
    keys.insert(reasoning_key(*by_name.at(motif), kept[i], graph));
    out.sm.push_back(std::move(*c.sm));
    out.rm.push_back(std::move(rm));
  }
  for (const auto& motif : options.motifs) {
    int emitted = static_cast<int>(std::count_if(out.sm.begin(), out.sm.end(), [&](const QaInstance& q) { return q.motif == motif.name; }));
    motifs_report[motif.name]["emitted"] = emitted;
    motifs_report[motif.name]["shortfall"] = std::max(0, options.per_motif - emitted);
    motifs_report[motif.name]["discarded"] = discarded[motif.name];
  }
  out.report = {{"motifs", motifs_report},
                {"validation",
                 {{"pages", ids.size()},
                  {"pages_unvalidated", unvalidated},
                  {"templates", templates},
                  {"present", present},
                  {"qualifier_present", qualified}}},
                {"fact_graph", {{"nodes", graph.nodes().size()}, {"edges", graph.edges().size()}}},
                {"options",
                 {{"per_motif", options.per_motif},
                  {"reuse_cap", options.reuse_cap},
                  {"retry_cap", options.retry_cap},
                  {"rng_seed", options.rng_seed}}},
                {"calls", {{"extractor", extractor.calls()}, {"qgen", qgen.calls()}}}};
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

}  // namespace

void save_qa(const QaDataset& qa, const std::string& directory) {
  fs::create_directories(directory);
  for (const auto* set : {&qa.rm, &qa.sm}) {
    std::string body;
    for (const auto& q : *set) body += json(q).dump() + "\n";
    write_file(fs::path(directory) / (set == &qa.rm ? "qa_rm.jsonl" : "qa_sm.jsonl"), body);
  }
  write_file(fs::path(directory) / "qa_shortfall.json", qa.report.dump(2) + "\n");
  write_file(fs::path(directory) / "fact_graph.jsonl", qa.fact_graph.to_jsonl());
}

std::vector<QaInstance> load_qa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<QaInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<QaInstance>());
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

}  // namespace twinworld
