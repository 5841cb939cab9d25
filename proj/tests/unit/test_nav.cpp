#include <doctest.h>

#include "../support/corpus_fixture.hpp"
#include "twinworld/agents.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/nav_builder.hpp"
#include "twinworld/nav_env.hpp"

using namespace twinworld;

namespace {

std::map<std::string, std::set<std::string>> small_links() {
  return {{"A", {"B", "C"}}, {"B", {"D"}}, {"C", {"D"}}, {"D", {"E"}}, {"E", {}}, {"F", {"A"}}};
}

NavTask task(const std::string& s, const std::string& t) {
  NavTask k;
  k.pair_id = "nav-" + s + t;
  k.source = s;
  k.target = t;
  return k;
}

}  // namespace

TEST_CASE("doc graph drops self loops and answers BFS queries") {
  DocGraph g({{"A", {"A", "B"}}, {"B", {"C"}}, {"C", {}}});
  CHECK(g.edge_count() == 2);
  CHECK(g.shortest_path(*g.index("A"), *g.index("C")) == 2);
  CHECK_FALSE(g.shortest_path(*g.index("C"), *g.index("A")));
  CHECK(g.bfs_path(*g.index("A"), *g.index("C")).size() == 3);
}

TEST_CASE("doc graph from a corpus matches its hyperlinks") {
  auto corpus = fixture::corpus_from_links(small_links());
  auto g = build_doc_graph(corpus, Variant::rm);
  CHECK(g.size() == 6);
  CHECK(g.edges() == build_doc_graph(corpus, Variant::sm).edges());
}

TEST_CASE("nav pair sampling is deterministic and within buckets") {
  std::map<std::string, std::set<std::string>> links;
  for (int i = 0; i < 60; ++i) {
    auto& l = links["P" + std::to_string(i)];
    l.insert("P" + std::to_string((i + 1) % 60));
    if (i % 7 == 0) l.insert("P" + std::to_string((i + 13) % 60));
  }
  DocGraph g(links);
  auto a = sample_nav_pairs(g, 5, 3);
  auto b = sample_nav_pairs(g, 5, 3);
  REQUIRE(a.tasks.size() == b.tasks.size());
  for (std::size_t i = 0; i < a.tasks.size(); ++i) {
    CHECK(a.tasks[i].source == b.tasks[i].source);
    CHECK(a.tasks[i].target == b.tasks[i].target);
    const auto& t = a.tasks[i];
    auto bi = bucket_of(t.expected_rw_distance);
    REQUIRE(bi);
    CHECK(difficulty_buckets()[*bi].name == t.bucket);
    CHECK(t.shortest_path_len >= 1);
    CHECK(t.shortest_path_len <= kStepCap);
  }
  CHECK(a.shortfall.contains("50-1K"));
}

TEST_CASE("tool call parsing") {
  auto a = parse_tool_call("I think B.\nclick_link_to_page(B)");
  REQUIRE(a);
  CHECK(a->kind == AgentAction::Kind::click);
  CHECK(a->page_id == "B");
  CHECK(a->reasoning == "I think B.");
  auto b = parse_tool_call("click_link_to_page(B) no wait backtrack_to_page_in_history( A )");
  REQUIRE(b);
  CHECK(b->kind == AgentAction::Kind::backtrack);
  CHECK(b->page_id == "A");
  CHECK_FALSE(parse_tool_call("just text"));
  CHECK(format_tool_call({AgentAction::Kind::click, "Q1", ""}) == "click_link_to_page(Q1)");
}

TEST_CASE("episode mechanics") {
  auto corpus = fixture::corpus_from_links(small_links());
  NavWorld world(corpus, Variant::sm);
  Episode ep(world, task("A", "E"), ObservationMode::links_only, 5);
  auto obs = ep.observe();
  CHECK(obs.links.size() == 2);
  CHECK_FALSE(obs.content);
  CHECK(obs.steps_remaining == 5);
  CHECK(obs.target_title == world.title("E"));

  auto bad = ep.click_link("E");
  CHECK_FALSE(bad.valid);
  CHECK(ep.current() == "A");
  CHECK(ep.steps_used() == 1);

  CHECK(ep.click_link("B").valid);
  CHECK(ep.history() == std::vector<std::string>{"A", "B"});
  CHECK(ep.backtrack("A").valid);
  CHECK(ep.current() == "A");
  CHECK(ep.history() == std::vector<std::string>{"A", "B"});
  CHECK_FALSE(ep.backtrack("F").valid);
  CHECK(ep.status() == EpisodeStatus::ongoing);
  CHECK(ep.steps_used() == 4);
  CHECK_FALSE(ep.click_link("Z").valid);
  CHECK(ep.steps_used() == 5);
  CHECK(ep.status() == EpisodeStatus::failure);
  CHECK(ep.failure_reason() == "step_cap");
  CHECK_THROWS_AS(ep.click_link("B"), InputError);
}

TEST_CASE("content mode shows page and target text") {
  auto corpus = fixture::corpus_from_links(small_links());
  NavWorld world(corpus, Variant::rm);
  Episode ep(world, task("A", "E"), ObservationMode::content_links);
  auto obs = ep.observe();
  REQUIRE(obs.content);
  REQUIRE(obs.target_content);
  CHECK(obs.content->find("Real") != std::string::npos);
  CHECK(obs.digest().size() == 64);
}

TEST_CASE("missing task pages are rejected") {
  auto corpus = fixture::corpus_from_links(small_links());
  NavWorld world(corpus, Variant::sm);
  CHECK_THROWS_AS(Episode(world, task("A", "Z"), ObservationMode::links_only), InputError);
}

TEST_CASE("oracle agent succeeds and scripted agent can fail") {
  auto links = small_links();
  auto corpus = fixture::corpus_from_links(links);
  NavWorld world(corpus, Variant::sm);
  auto g = build_doc_graph(corpus, Variant::sm);
  std::vector<NavTask> tasks{task("A", "E"), task("F", "D"), task("B", "E")};
  auto ts = run_agent(tasks, [&] { return std::make_unique<OracleAgent>(g); }, world, ObservationMode::links_only, 2);
  for (const auto& t : ts) CHECK(t.status == EpisodeStatus::success);
  CHECK(ts[0].steps_used == 3);
  CHECK(ts[0].visited == std::vector<std::string>{"A", "B", "D", "E"});

  std::vector<AgentAction> loop{{AgentAction::Kind::click, "B", ""}, {AgentAction::Kind::backtrack, "A", ""}};
  auto fail = run_agent({task("A", "E")}, [&] { return std::make_unique<ScriptedAgent>(loop); }, world,
                        ObservationMode::links_only);
  CHECK(fail[0].status == EpisodeStatus::failure);
  CHECK(fail[0].steps_used == kStepCap);
}

TEST_CASE("transport failures end the episode as agent_error") {
  struct Broken : Agent {
    AgentAction decide(const Observation&) override { throw TransportError("down"); }
    std::string name() const override { return "broken"; }
  };
  auto corpus = fixture::corpus_from_links(small_links());
  NavWorld world(corpus, Variant::sm);
  auto ts = run_agent({task("A", "E")}, [] { return std::make_unique<Broken>(); }, world, ObservationMode::links_only);
  CHECK(ts[0].status == EpisodeStatus::failure);
  CHECK(ts[0].failure_reason == "agent_error");
}
