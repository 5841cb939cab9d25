#include <doctest.h>

#include "../support/mock_client.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/qa_builder.hpp"
#include "twinworld/text.hpp"
#include "twinworld/universe_sampler.hpp"

using namespace twinworld;

namespace {

std::string qid(int i) { return "Q" + std::to_string(100 + i); }

Universe ring_universe(int n) {
  std::vector<Entity> ents;
  std::vector<Fact> facts;
  static const char* names[] = {"Arlo", "Bexa", "Cirro", "Dune", "Elvo", "Fenna", "Gavo", "Hesk", "Ivra", "Jolt",
                                "Kesta", "Lumo", "Marn", "Nolo", "Orsk", "Pella", "Quil", "Rusk", "Sova", "Tirn"};
  for (int i = 0; i < n; ++i) {
    Entity e;
    e.id = qid(i);
    e.label = names[i % 20];
    e.is_named = true;
    ents.push_back(e);
  }
  for (int i = 0; i < n; ++i) {
    for (int d : {1, 3}) {
      Fact f;
      f.subject = qid(i);
      f.property = d == 1 ? "P1" : "P2";
      f.property_label = d == 1 ? "partner" : "rival";
      f.object.entity = qid((i + d) % n);
      facts.push_back(f);
    }
  }
  return make_universe(KnowledgeGraph::build(ents, facts));
}

// One edge per fact, each stated on its own page.
FactGraph graph_of(const Universe& u) {
  std::vector<FactEdge> edges;
  int k = 0;
  for (const auto& f : u.graph.facts()) {
    FactEdge e;
    e.page = "pg" + std::to_string(k);
    e.id = e.page + "#0";
    e.source = f.subject;
    e.target = f.object.entity;
    e.relation = f.property;
    e.fact = f;
    edges.push_back(e);
    ++k;
  }
  return FactGraph(edges);
}

const Motif& motif(const std::string& name) {
  for (const auto& m : default_motifs()) {
    if (m.name == name) return m;
  }
  throw std::runtime_error("no motif " + name);
}

}  // namespace

TEST_CASE("default motifs") {
  const auto& ms = default_motifs();
  REQUIRE(ms.size() == 6);
  std::map<std::string, std::size_t> hops;
  for (const auto& m : ms) {
    CHECK_NOTHROW(m.validate());
    hops[m.name] = m.hop_count();
  }
  CHECK(hops == std::map<std::string, std::size_t>{{"A", 2}, {"B", 3}, {"C", 4}, {"D", 3}, {"E", 5}, {"F", 4}});
  CHECK(motif("D").roots() == std::vector<std::string>{"e1", "e2"});
  CHECK(motif("D").answer() == "e4");
  CHECK(motif("D").bridges() == std::vector<std::string>{"e3"});
}

TEST_CASE("motif validation") {
  auto two_sinks = nlohmann::json::parse(R"({"motifs":[{"name":"X","edges":[["a","b"],["a","c"]]}]})");
  CHECK_THROWS_AS(motifs_from_json(two_sinks), ConfigError);
  auto split = nlohmann::json::parse(R"({"motifs":[{"name":"X","edges":[["a","b"],["c","d"],["b","d"],["e","f"]]}]})");
  CHECK_THROWS_AS(motifs_from_json(split), ConfigError);
}

TEST_CASE("sampled matches respect structure, distinctness and reuse caps") {
  auto u = ring_universe(20);
  auto g = graph_of(u);
  for (const auto& m : default_motifs()) {
    auto s = sample_motifs(g, m, 15, 3, 2);
    std::map<std::string, int> fact_uses, bridge_uses;
    std::set<std::string> keys;
    for (const auto& match : s.matches) {
      REQUIRE(match.edges.size() == m.edges.size());
      std::set<std::string> nodes, pages;
      for (std::size_t i = 0; i < m.edges.size(); ++i) {
        const auto& e = g.edges()[match.edges[i]];
        CHECK(e.source == match.binding.at(m.edges[i].source));
        CHECK(e.target == match.binding.at(m.edges[i].target));
        pages.insert(e.page);
        ++fact_uses[e.fact_key()];
      }
      for (const auto& [k, v] : match.binding) nodes.insert(v);
      CHECK(nodes.size() == m.nodes().size());
      CHECK(pages.size() == m.edges.size());
      for (const auto& b : m.bridges()) ++bridge_uses[match.binding.at(b)];
      CHECK(keys.insert(reasoning_key(m, match, g)).second);
    }
    for (const auto& [k, v] : fact_uses) CHECK(v <= 2);
    for (const auto& [k, v] : bridge_uses) CHECK(v <= 2);
    CHECK(s.report.at("found").get<std::size_t>() == s.matches.size());
  }
}

TEST_CASE("sampling is deterministic per seed") {
  auto u = ring_universe(20);
  auto g = graph_of(u);
  auto a = sample_motifs(g, motif("B"), 10, 5);
  auto b = sample_motifs(g, motif("B"), 10, 5);
  REQUIRE(a.matches.size() == b.matches.size());
  for (std::size_t i = 0; i < a.matches.size(); ++i) CHECK(a.matches[i].edges == b.matches[i].edges);
}

TEST_CASE("sub-motif matches are removed") {
  auto u = ring_universe(12);
  auto g = graph_of(u);
  // Q100 -P1-> Q101 -P1-> Q102 -P1-> Q103
  auto edge = [&](int s, const std::string& p) {
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
      if (g.edges()[i].source == qid(s) && g.edges()[i].relation == p) return i;
    }
    throw std::runtime_error("edge");
  };
  MotifMatch a{"A", {{"e1", qid(0)}, {"e2", qid(1)}, {"e3", qid(2)}}, {edge(0, "P1"), edge(1, "P1")}};
  MotifMatch b{"B", {{"e1", qid(0)}, {"e2", qid(1)}, {"e3", qid(2)}, {"e4", qid(3)}},
               {edge(0, "P1"), edge(1, "P1"), edge(2, "P1")}};
  MotifMatch other{"A", {{"e1", qid(5)}, {"e2", qid(6)}, {"e3", qid(7)}}, {edge(5, "P1"), edge(6, "P1")}};
  auto kept = dedupe_submotifs({a, b, other}, g);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].motif == "B");
  CHECK(kept[1].binding.at("e1") == qid(5));
}

TEST_CASE("composition gates") {
  auto u = ring_universe(12);
  auto g = graph_of(u);
  NodeLabels labels(u, 0);
  const Motif& m = motif("A");
  auto s = sample_motifs(g, m, 1, 9);
  REQUIRE(s.matches.size() == 1);
  const auto& match = s.matches[0];
  auto q = fixture::mock_client();
  std::vector<SingleHop> hops;
  for (std::size_t gi : match.edges) {
    const auto& e = g.edges()[gi];
    auto text = compose_single_hop(e, labels, q);
    CHECK(contains_whole_word(text, labels.node(e.source)));
    CHECK_FALSE(contains_whole_word(text, labels.node(e.target)));
    hops.push_back({e.id, text, labels.node(e.target)});
  }
  auto question = compose_multi_hop(m, match, g, hops, labels, q);
  CHECK(contains_whole_word(question, labels.node(match.binding.at("e1"))));
  CHECK_FALSE(contains_whole_word(question, labels.node(match.binding.at("e2"))));

  MockProfile refuse;
  refuse.composer = "no_composition";
  auto r = fixture::mock_client(refuse);
  try {
    compose_multi_hop(m, match, g, hops, labels, r);
    FAIL("expected GateFailure");
  } catch (const GateFailure& e) {
    CHECK(e.reason() == "no composition");
  }
  std::string bridge = labels.node(match.binding.at("e2"));
  std::string leaky = "Question: Who is " + bridge + "?\nAnswer: " + labels.node(match.binding.at("e3"));
  auto l = fixture::mock_client(fixture::scripted("compose_question", {leaky, leaky, leaky}));
  try {
    compose_multi_hop(m, match, g, hops, labels, l);
    FAIL("expected GateFailure");
  } catch (const GateFailure& e) {
    CHECK(e.reason() == "mention rule");
  }
}

TEST_CASE("remapping replaces synthetic names and checks the answer") {
  auto u = ring_universe(6);
  RenamePlan plan;
  plan.delta_years = 0;
  for (const auto& [id, e] : u.graph.entities()) {
    plan.real_labels[id] = e.label;
    plan.mapping[id] = "Zz" + e.label;
  }
  NodeLabels real(u, 0);
  QaInstance sm;
  sm.pair_id = "qa-00000";
  sm.motif = "A";
  sm.question = "What is the rival of the partner of ZzArlo?";
  sm.answer = "ZzElvo";
  sm.answer_node = qid(4);
  sm.roots = {qid(0)};
  auto rm = remap_question(sm, plan, real);
  CHECK(rm.variant == Variant::rm);
  CHECK(rm.question == "What is the rival of the partner of Arlo?");
  CHECK(rm.answer == "Elvo");
  CHECK(rm.pair_id == sm.pair_id);
  auto wrong = sm;
  wrong.answer = "ZzArlo";
  CHECK_THROWS_AS(remap_question(wrong, plan, real), RemapError);
  sm.question += " Also ZzUnknown.";
  plan.mapping["Q999"] = "ZzUnknown";
  CHECK_THROWS_AS(remap_question(sm, plan, real), RemapError);
}

TEST_CASE("instances round-trip through json") {
  QaInstance q;
  q.pair_id = "qa-00001";
  q.motif = "B";
  q.question = "Q?";
  q.answer = "A";
  q.subgraph.push_back({"Q1", "P1", "Q2", "Q1", "Q1|P1|Q2", "a", "r", "b"});
  q.single_hops.push_back({"Q1#0", "What?", "b"});
  q.gold_page_ids = {"Q1"};
  nlohmann::json j = q;
  QaInstance back = j.get<QaInstance>();
  CHECK(nlohmann::json(back) == j);
}
