#include "twinworld/corpus_builder.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twinworld/errors.hpp"
#include "twinworld/evaluator.hpp"
#include "twinworld/hashing.hpp"

namespace twinworld {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Variant v) noexcept { return v == Variant::rm ? "rm" : "sm"; }

Variant variant_from(std::string_view s) {
  if (s == "rm") return Variant::rm;
  if (s == "sm") return Variant::sm;
  throw ConfigError("variant must be 'rm' or 'sm', got '" + std::string(s) + "'");
}

SymbolicPage SymbolicPage::parse(EntityId entity, std::string text) {
  SymbolicPage p;
  p.entity = std::move(entity);
  p.refs = parse_links(text);
  p.text = std::move(text);
  return p;
}

std::vector<EntityId> SymbolicPage::ref_ids() const {
  std::vector<EntityId> ids;
  for (const auto& r : refs) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<EntityId> Corpus::retained_ids() const {
  std::vector<EntityId> out;
  for (const auto& [id, p] : pages) {
    if (p.retained) out.push_back(id);
  }
  return out;
}

const PagePair* Corpus::retained(const EntityId& id) const {
  auto it = pages.find(id);
  return it != pages.end() && it->second.retained ? &it->second : nullptr;
}

std::map<EntityId, std::set<EntityId>> Corpus::hyperlinks(Variant v) const {
  std::map<EntityId, std::set<EntityId>> out;
  for (const auto& [id, p] : pages) {
    if (!p.retained) continue;
    auto& targets = out[id];
    for (const auto& r : (v == Variant::rm ? p.real : p.synth).refs) {
      if (r.id != id && retained(r.id)) targets.insert(r.id);
    }
  }
  return out;
}

const SymbolicPage& Corpus::page(const EntityId& id, Variant v) const {
  const PagePair* p = retained(id);
  if (!p) throw InputError("page " + id + " is not in the corpus");
  return v == Variant::rm ? p->real : p->synth;
}

std::string Corpus::title(const EntityId& id, Variant v) const {
  const PagePair* p = retained(id);
  if (!p) throw InputError("page " + id + " is not in the corpus");
  return v == Variant::rm ? p->rm_title : p->sm_title;
}

std::size_t dl_distance(std::string_view a8, std::string_view b8) {
  std::u32string a = utf8_decode(a8);
  std::u32string b = utf8_decode(b8);
  // Common prefix and suffix never take part in an optimal alignment.
  std::size_t pre = 0;
  while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
  std::size_t suf = 0;
  while (suf < a.size() - pre && suf < b.size() - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;
  std::u32string_view x(a.data() + pre, a.size() - pre - suf);
  std::u32string_view y(b.data() + pre, b.size() - pre - suf);
  if (x.empty()) return y.size();
  if (y.empty()) return x.size();

  const std::size_t m = y.size();
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t cost = x[i - 1] == y[j - 1] ? 0 : 1;
      std::size_t best = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && x[i - 1] == y[j - 2] && x[i - 2] == y[j - 1]) best = std::min(best, prev2[j - 2] + 1);
      cur[j] = best;
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

double dl_similarity(std::string_view a, std::string_view b) {
  std::size_t la = utf8_decode(a).size();
  std::size_t lb = utf8_decode(b).size();
  std::size_t longest = std::max(la, lb);
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(dl_distance(a, b)) / static_cast<double>(longest);
}

std::vector<Fact> select_fact_orientation(const EntityId& entity, const Universe& universe) {
  const KnowledgeGraph& g = universe.graph;
  g.at(entity);
  std::vector<Fact> out_facts, in_facts;
  for (std::size_t fi : g.incident(entity)) {
    const Fact& f = g.facts()[fi];
    if (f.subject == entity) {
      out_facts.push_back(f);
    } else {
      in_facts.push_back(f);
    }
  }
  return in_facts.size() > out_facts.size() ? in_facts : out_facts;
}

json facts_for_prompt(const std::vector<Fact>& facts, const Universe& labels) {
  json out = json::array();
  for (const auto& f : facts) {
    json quals = json::array();
    for (const auto& q : f.qualifiers) {
      quals.push_back({{"relation", q.property_label}, {"kind", to_string(q.value.kind)}, {"value", display_literal(q.value)}});
    }
    out.push_back({{"subject", labels.label(f.subject)},
                   {"relation", f.property_label},
                   {"object", f.object.is_entity() ? labels.label(f.object.entity) : display_literal(*f.object.literal)},
                   {"qualifiers", quals}});
  }
  return out;
}

std::string generate_page(const EntityId& entity, const std::vector<Fact>& facts, const Universe& labels,
                          GenerationClient& text_gen) {
  if (facts.empty()) throw InputError("generate_page: no facts for " + entity);
  std::map<std::string, std::string> defs;
  for (const auto& f : facts) {
    auto it = labels.graph.relation_defs().find(f.property);
    defs[f.property_label] = it == labels.graph.relation_defs().end() ? "" : it->second;
    for (const auto& q : f.qualifiers) {
      auto qi = labels.graph.relation_defs().find(q.property);
      if (qi != labels.graph.relation_defs().end()) defs[q.property_label] = qi->second;
    }
  }
  std::string type;
  try {
    type = resolve_type_label(entity, labels.graph);
  } catch (const UnresolvedTypeError& e) {
    type = e.partial_label();
  }
  GenerationRequest req{"page_generation",
                        json{{"entity_label", labels.label(entity)},
                             {"entity_type", type},
                             {"facts", facts_for_prompt(facts, labels)},
                             {"relation_definitions", defs}}};
  try {
    return text_gen.call(req);
  } catch (const TransportError& e) {
    throw TransportError("page " + entity + ": " + e.what());
  }
}

namespace {

std::string last_word(const std::string& label) {
  std::size_t sp = label.rfind(' ');
  return sp == std::string::npos ? "" : label.substr(sp + 1);
}

bool display_allowed(const std::string& display, const std::string& label) {
  if (display == label) return true;
  std::string lw = last_word(label);
  if (!lw.empty() && display == lw) return true;
  for (const char* article : {"The ", "the "}) {
    if (starts_with(label, article) && display == label.substr(4)) return true;
  }
  return false;
}

std::map<std::string, std::string> placeholder_map(const std::vector<EntityId>& ids,
                                                   const std::map<EntityId, std::string>& labels) {
  std::map<std::string, std::string> m;
  for (const auto& id : ids) {
    auto it = labels.find(id);
    if (it != labels.end()) m.emplace(it->second, "@" + id);
  }
  for (const auto& id : ids) {
    auto it = labels.find(id);
    if (it == labels.end()) continue;
    std::string lw = last_word(it->second);
    if (!lw.empty()) m.emplace(lw, "@" + id);
  }
  return m;
}

std::vector<EntityId> page_entities(const SymbolicPage& p) {
  std::vector<EntityId> ids{p.entity};
  for (const auto& r : p.refs) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

SymbolicPage insert_symbolic_refs(const EntityId& entity, const std::string& draft,
                                  const std::map<EntityId, std::string>& id_to_label, GenerationClient& text_gen,
                                  const GateThresholds& gates, double* similarity) {
  json table = json::array();
  for (const auto& [id, label] : id_to_label) table.push_back({{"id", id}, {"label", label}});
  std::string response;
  try {
    response = text_gen.call({"insert_references", json{{"draft", draft}, {"entity_map", table}}});
  } catch (const TransportError& e) {
    throw TransportError("references for " + entity + ": " + e.what());
  }
  SymbolicPage page = SymbolicPage::parse(entity, response);
  for (const auto& r : page.refs) {
    auto it = id_to_label.find(r.id);
    if (it == id_to_label.end()) throw GateFailure("invented reference", r.id + " is not in the entity table");
    if (!display_allowed(r.display, it->second)) {
      throw GateFailure("display mismatch", "'" + r.display + "' links " + r.id + " (" + it->second + ")");
    }
  }
  double sim = dl_similarity(strip_links(page.text), draft);
  if (similarity) *similarity = sim;
  if (!(sim > gates.draft)) throw GateFailure("draft drift", "similarity " + std::to_string(sim));
  return page;
}

double normalized_pair_similarity(const SymbolicPage& synth, const SymbolicPage& real, const RenamePlan& plan,
                                  const std::map<std::string, std::string>& dates) {
  auto ids = page_entities(synth);
  auto sm_map = placeholder_map(ids, plan.mapping);
  auto rm_map = placeholder_map(ids, plan.real_labels);
  std::size_t k = 0;
  for (const auto& [shifted, original] : dates) {
    std::string slot = "@t" + std::to_string(k++);
    sm_map.emplace(shifted, slot);
    rm_map.emplace(original, slot);
  }
  return dl_similarity(replace_whole_words(synth.text, sm_map), replace_whole_words(real.text, rm_map));
}

RealizeResult realize_real_mapped(const SymbolicPage& synth, const RenamePlan& plan,
                                  const std::map<std::string, std::string>& dates, GenerationClient& text_gen,
                                  const GateThresholds& gates) {
  json names = json::array();
  std::set<std::string> keys;
  auto ids = page_entities(synth);
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& id : ids) {
      auto s = plan.mapping.find(id);
      if (s == plan.mapping.end()) continue;
      const std::string& real_label = plan.real_labels.at(id);
      std::string from = pass == 0 ? s->second : last_word(s->second);
      std::string to = pass == 0 ? real_label : last_word(real_label);
      if (from.empty() || to.empty() || !keys.insert(from).second) continue;
      names.push_back({{"from", from}, {"to", to}});
    }
  }
  json date_rows = json::array();
  for (const auto& [shifted, original] : dates) {
    if (shifted != original) date_rows.push_back({{"from", shifted}, {"to", original}});
  }
  std::string response;
  try {
    response = text_gen.call({"restore_real_names", json{{"page", synth.text}, {"name_mapping", names}, {"date_mapping", date_rows}}});
  } catch (const TransportError& e) {
    throw TransportError("real rendering of " + synth.entity + ": " + e.what());
  }
  RealizeResult r;
  r.page = SymbolicPage::parse(synth.entity, response);
  if (r.page.ref_ids() != synth.ref_ids()) throw GateFailure("structure drift", "reference ids differ for " + synth.entity);
  for (const auto& [id, label] : plan.mapping) {
    if (contains_whole_word(r.page.text, label)) throw GateFailure("leakage", "synthetic label '" + label + "' remains");
  }
  std::set<std::string> originals;
  for (const auto& [shifted, original] : dates) originals.insert(original);
  for (const auto& [shifted, original] : dates) {
    if (shifted == original || originals.count(shifted)) continue;
    if (contains_whole_word(r.page.text, shifted)) throw GateFailure("shifted date", "'" + shifted + "' remains");
  }
  r.pair_similarity = normalized_pair_similarity(synth, r.page, plan, dates);
  r.pair_similarity_raw = dl_similarity(synth.text, r.page.text);
  if (!(r.pair_similarity > gates.pair)) {
    throw GateFailure("pair drift", "similarity " + std::to_string(r.pair_similarity));
  }
  return r;
}

bool novelty_filter(const SymbolicPage& synth, GenerationClient& judge, const std::string& real_label,
                    const std::vector<std::string>& aliases) {
  std::string response = judge.call({"entity_guess", json{{"page", strip_links(synth.text)}}});
  std::string guess = trim(response);
  for (const auto& line : split_lines(response)) {
    std::string t = trim(line);
    if (starts_with(t, "Answer:")) {
      guess = trim(t.substr(7));
      break;
    }
  }
  std::string g = normalized_text(guess);
  if (g.empty()) return false;
  if (g == normalized_text(real_label)) return true;
  return std::any_of(aliases.begin(), aliases.end(), [&](const std::string& a) { return g == normalized_text(a); });
}

Corpus prune_to_lcc(Corpus corpus) {
  std::map<EntityId, std::set<EntityId>> adj;
  for (Variant v : {Variant::sm, Variant::rm}) {
    for (const auto& [u, targets] : corpus.hyperlinks(v)) {
      adj[u];
      for (const auto& w : targets) {
        adj[u].insert(w);
        adj[w].insert(u);
      }
    }
  }
  std::set<EntityId> seen, best;
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
    if (comp.size() > best.size()) best = std::move(comp);
  }
  for (auto& [id, p] : corpus.pages) {
    if (p.retained && !best.count(id)) {
      p.retained = false;
      p.drop_reason = "outside largest component";
    }
  }
  return corpus;
}

namespace {

std::map<std::string, std::string> date_pairs(const std::vector<Fact>& real_facts, int delta) {
  std::map<std::string, std::string> dates;
  for (const auto& f : real_facts) {
    Fact s = shift_fact(f, delta);
    if (f.object.literal && f.object.literal->kind == LiteralKind::timestamp) {
      dates.emplace(display_literal(*s.object.literal), display_literal(*f.object.literal));
    }
    for (std::size_t i = 0; i < f.qualifiers.size(); ++i) {
      if (f.qualifiers[i].value.kind == LiteralKind::timestamp) {
        dates.emplace(display_literal(s.qualifiers[i].value), display_literal(f.qualifiers[i].value));
      }
    }
  }
  return dates;
}

void drop(PagePair& p, const std::string& reason, const std::string& detail) {
  p.retained = false;
  p.drop_reason = reason;
  p.drop_detail = detail;
}

std::size_t count_retained(const Corpus& c) {
  std::size_t n = 0;
  for (const auto& [id, p] : c.pages) n += p.retained ? 1 : 0;
  return n;
}

}  // namespace

Corpus build_corpus(const Universe& real, const Universe& synth, const RenamePlan& plan, GenerationClient& text_gen,
                    GenerationClient& judge, const CorpusOptions& options) {
  std::vector<EntityId> ids;
  for (const auto& [id, e] : real.graph.entities()) ids.push_back(id);

  auto build_page = [&](std::size_t i) {
    const EntityId& id = ids[i];
    PagePair p;
    p.entity = id;
    p.rm_title = real.label(id);
    p.sm_title = synth.label(id);
    p.facts = select_fact_orientation(id, real);
    if (p.facts.empty()) {
      drop(p, "isolated", "no incident facts");
      return p;
    }
    std::vector<Fact> sm_facts;
    std::map<EntityId, std::string> id_to_label;
    for (const auto& f : p.facts) {
      sm_facts.push_back(shift_fact(f, plan.delta_years));
      for (const EntityId* e : {&f.subject, &f.object.entity}) {
        if (e->empty() || *e == id) continue;
        if (synth.graph.at(*e).is_named) id_to_label[*e] = synth.label(*e);
      }
    }
    auto dates = date_pairs(p.facts, plan.delta_years);
    for (p.attempts = 1; p.attempts <= options.page_attempts; ++p.attempts) {
      try {
        p.draft = generate_page(id, sm_facts, synth, text_gen);
        p.synth = insert_symbolic_refs(id, p.draft, id_to_label, text_gen, options.gates, &p.draft_similarity);
        RealizeResult r = realize_real_mapped(p.synth, plan, dates, text_gen, options.gates);
        p.real = std::move(r.page);
        p.pair_similarity = r.pair_similarity;
        p.pair_similarity_raw = r.pair_similarity_raw;
        p.retained = true;
        p.drop_reason.clear();
        p.drop_detail.clear();
        return p;
      } catch (const GateFailure& e) {
        drop(p, e.reason(), e.what());
        return p;
      } catch (const TransportError& e) {
        drop(p, "transport failure", e.what());
      }
    }
    p.attempts = options.page_attempts;
    return p;
  };

  auto built = parallel_map<PagePair>(ids.size(), options.in_flight, build_page);
  Corpus corpus;
  for (auto& p : built) corpus.pages.emplace(p.entity, std::move(p));
  json passes = json::array();
  auto record_pass = [&](const std::string& name, std::size_t before) {
    passes.push_back({{"pass", name}, {"retained_before", before}, {"retained_after", count_retained(corpus)}});
  };

  std::size_t before = count_retained(corpus);
  corpus = prune_to_lcc(std::move(corpus));
  record_pass("generation gates", before);

  // Novelty: pages whose real entity the judge recognises are dropped.
  before = count_retained(corpus);
  auto kept = corpus.retained_ids();
  auto verdicts = parallel_map<std::string>(kept.size(), options.in_flight, [&](std::size_t i) -> std::string {
    const PagePair& p = corpus.pages.at(kept[i]);
    const Entity& e = real.graph.at(p.entity);
    std::string last_error;
    for (int a = 0; a < options.page_attempts; ++a) {
      try {
        return novelty_filter(p.synth, judge, p.rm_title, e.aliases) ? "recognised" : "";
      } catch (const TransportError& err) {
        last_error = err.what();
      }
    }
    return "judge unavailable: " + last_error;
  });
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (verdicts[i].empty()) continue;
    PagePair& p = corpus.pages.at(kept[i]);
    if (verdicts[i] == "recognised") {
      drop(p, "novelty", "judge named the real entity");
    } else {
      drop(p, "judge unavailable", verdicts[i]);
    }
  }
  corpus = prune_to_lcc(std::move(corpus));
  record_pass("novelty", before);

  // Real names of renamed entities must not surface in synthetic pages, e.g.
  // through lowercase labels derived from a person's name.
  before = count_retained(corpus);
  for (auto& [id, p] : corpus.pages) {
    if (!p.retained) continue;
    for (const auto& [eid, label] : plan.real_labels) {
      if (contains_whole_word(p.synth.text, label)) {
        drop(p, "real name in synthetic page", "'" + label + "' (" + eid + ")");
        break;
      }
    }
  }
  corpus = prune_to_lcc(std::move(corpus));
  record_pass("synthetic leakage", before);

  std::map<std::string, std::size_t> reasons;
  double min_pair = 1.0, min_raw = 1.0, min_draft = 1.0;
  for (const auto& [id, p] : corpus.pages) {
    if (!p.retained) {
      ++reasons[p.drop_reason];
      continue;
    }
    min_pair = std::min(min_pair, p.pair_similarity);
    min_raw = std::min(min_raw, p.pair_similarity_raw);
    min_draft = std::min(min_draft, p.draft_similarity);
  }
  corpus.manifest = json{{"thresholds", {{"draft_similarity", options.gates.draft}, {"pair_similarity", options.gates.pair}}},
                         {"pair_similarity_gate", "normalized"},
                         {"counts", {{"entities", ids.size()}, {"retained", count_retained(corpus)}, {"dropped", ids.size() - count_retained(corpus)}}},
                         {"drop_reasons", reasons},
                         {"passes", passes},
                         {"min_similarity", {{"draft", min_draft}, {"pair", min_pair}, {"pair_raw", min_raw}}},
                         {"generator_calls", text_gen.calls()},
                         {"judge_calls", judge.calls()}};
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& directory) {
  fs::create_directories(directory + "/pages/rm");
  fs::create_directories(directory + "/pages/sm");
  std::ofstream meta(directory + "/pages.jsonl", std::ios::binary);
  for (const auto& [id, p] : corpus.pages) {
    meta << json{{"entity", id},
                 {"rm_title", p.rm_title},
                 {"sm_title", p.sm_title},
                 {"retained", p.retained},
                 {"drop_reason", p.drop_reason},
                 {"drop_detail", p.drop_detail},
                 {"draft_similarity", p.draft_similarity},
                 {"pair_similarity", p.pair_similarity},
                 {"pair_similarity_raw", p.pair_similarity_raw},
                 {"attempts", p.attempts},
                 {"facts", p.facts},
                 {"ref_ids", p.synth.ref_ids()}}
                .dump()
         << "\n";
    if (!p.retained) continue;
    std::ofstream(directory + "/pages/rm/" + id + ".md", std::ios::binary) << p.real.text;
    std::ofstream(directory + "/pages/sm/" + id + ".md", std::ios::binary) << p.synth.text;
  }
  std::ofstream(directory + "/manifest.json", std::ios::binary) << corpus.manifest.dump(2) << "\n";
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Corpus load_corpus(const std::string& directory) {
  Corpus c;
  std::ifstream meta(directory + "/pages.jsonl");
  if (!meta) throw InputError("cannot open " + directory + "/pages.jsonl");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(meta, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    PagePair p;
    p.entity = j.at("entity").get<std::string>();
    p.rm_title = j.at("rm_title").get<std::string>();
    p.sm_title = j.at("sm_title").get<std::string>();
    p.retained = j.at("retained").get<bool>();
    p.drop_reason = j.value("drop_reason", "");
    p.drop_detail = j.value("drop_detail", "");
    p.draft_similarity = j.value("draft_similarity", 0.0);
    p.pair_similarity = j.value("pair_similarity", 0.0);
    p.pair_similarity_raw = j.value("pair_similarity_raw", 0.0);
    p.attempts = j.value("attempts", 0);
    p.facts = j.value("facts", std::vector<Fact>{});
    if (p.retained) {
      p.real = SymbolicPage::parse(p.entity, slurp(directory + "/pages/rm/" + p.entity + ".md"));
      p.synth = SymbolicPage::parse(p.entity, slurp(directory + "/pages/sm/" + p.entity + ".md"));
    }
    c.pages.emplace(p.entity, std::move(p));
  }
  std::ifstream man(directory + "/manifest.json");
  if (man) c.manifest = json::parse(man);
  return c;
}

}  // namespace twinworld
