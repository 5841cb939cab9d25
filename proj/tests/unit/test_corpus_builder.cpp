#include <doctest.h>

#include "../support/mock_client.hpp"
#include "twinworld/corpus_builder.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/text.hpp"

using namespace twinworld;

namespace {

std::string drifted(std::string base, int edits) {
  for (int i = 0; i < edits; ++i) base[static_cast<std::size_t>(2 * i)] = 'Z';
  return base;
}

std::string gate_reason(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const GateFailure& g) {
    return g.reason();
  }
  return "";
}

}  // namespace

TEST_CASE("draft gate is strict and brackets the threshold") {
  for (int len : {40, 100, 137, 400}) {
    std::string draft(static_cast<std::size_t>(len), 'a');
    for (int e = 0; e <= len / 10; ++e) {
      double sim = 1.0 - static_cast<double>(e) / len;
      auto client = fixture::mock_client(fixture::scripted("insert_references", {drifted(draft, e)}));
      std::string r = gate_reason([&] { insert_symbolic_refs("Q1", draft, {}, client); });
      CHECK_MESSAGE((r.empty() == (sim > 0.95)), "len " << len << " edits " << e);
      if (!r.empty()) CHECK(r == "draft drift");
    }
  }
}

TEST_CASE("pair gate is strict and brackets the threshold") {
  RenamePlan plan;
  for (int len : {40, 100, 137, 400}) {
    SymbolicPage synth = SymbolicPage::parse("Q1", std::string(static_cast<std::size_t>(len), 'b'));
    for (int e = 0; e <= len / 4; ++e) {
      double sim = 1.0 - static_cast<double>(e) / len;
      auto client = fixture::mock_client(fixture::scripted("restore_real_names", {drifted(synth.text, e)}));
      std::string r = gate_reason([&] { realize_real_mapped(synth, plan, {}, client); });
      CHECK_MESSAGE((r.empty() == (sim > 0.85)), "len " << len << " edits " << e);
      if (!r.empty()) CHECK(r == "pair drift");
    }
  }
}

TEST_CASE("reference gates") {
  std::map<EntityId, std::string> table{{"Q2", "Upper Vardia"}};
  std::string draft = "It borders Upper Vardia.";
  auto ok = fixture::mock_client(fixture::scripted("insert_references", {"It borders [Upper Vardia](<ref:Q2>)."}));
  auto page = insert_symbolic_refs("Q1", draft, table, ok);
  CHECK(page.ref_ids() == std::vector<EntityId>{"Q2"});
  auto short_form = fixture::mock_client(fixture::scripted("insert_references", {"It borders Upper [Vardia](<ref:Q2>)."}));
  CHECK_NOTHROW(insert_symbolic_refs("Q1", draft, table, short_form));
  auto invented = fixture::mock_client(fixture::scripted("insert_references", {"It borders [Upper Vardia](<ref:Q9>)."}));
  CHECK(gate_reason([&] { insert_symbolic_refs("Q1", draft, table, invented); }) == "invented reference");
  auto wrong = fixture::mock_client(fixture::scripted("insert_references", {"It [borders](<ref:Q2>) Upper Vardia."}));
  CHECK(gate_reason([&] { insert_symbolic_refs("Q1", draft, table, wrong); }) == "display mismatch");
}

TEST_CASE("real rendering gates") {
  RenamePlan plan;
  plan.mapping = {{"Q2", "Upper Vardia"}};
  plan.real_labels = {{"Q2", "Upper Kenya"}};
  SymbolicPage synth = SymbolicPage::parse("Q1", "It borders [Upper Vardia](<ref:Q2>) since 1974.");
  std::map<std::string, std::string> dates{{"1974", "1935"}};
  auto ok = fixture::mock_client(fixture::scripted("restore_real_names", {"It borders [Upper Kenya](<ref:Q2>) since 1935."}));
  auto r = realize_real_mapped(synth, plan, dates, ok);
  CHECK(r.pair_similarity == 1.0);
  CHECK(r.pair_similarity_raw < 1.0);
  auto dropped = fixture::mock_client(fixture::scripted("restore_real_names", {"It borders Upper Kenya since 1935."}));
  CHECK(gate_reason([&] { realize_real_mapped(synth, plan, dates, dropped); }) == "structure drift");
  auto leak = fixture::mock_client(fixture::scripted("restore_real_names", {"It borders [Upper Vardia](<ref:Q2>) since 1935."}));
  CHECK(gate_reason([&] { realize_real_mapped(synth, plan, dates, leak); }) == "leakage");
  auto stale = fixture::mock_client(fixture::scripted("restore_real_names", {"It borders [Upper Kenya](<ref:Q2>) since 1974."}));
  CHECK(gate_reason([&] { realize_real_mapped(synth, plan, dates, stale); }) == "shifted date");
}

TEST_CASE("novelty filter matches label and aliases after normalisation") {
  SymbolicPage p = SymbolicPage::parse("Q1", "A city.");
  auto hit = fixture::mock_client(fixture::scripted("entity_guess", {"Reasoning.\nAnswer: the Nairobi"}));
  CHECK(novelty_filter(p, hit, "Nairobi", {}));
  auto alias = fixture::mock_client(fixture::scripted("entity_guess", {"Answer: Nai."}));
  CHECK(novelty_filter(p, alias, "Nairobi", {"Nai"}));
  auto miss = fixture::mock_client(fixture::scripted("entity_guess", {"Answer: Lagos"}));
  CHECK_FALSE(novelty_filter(p, miss, "Nairobi", {"Nai"}));
}

TEST_CASE("pruning keeps the largest linked component in both variants") {
  Corpus c;
  auto add = [&](const std::string& id, const std::string& text) {
    PagePair p;
    p.entity = id;
    p.sm_title = p.rm_title = id;
    p.synth = p.real = SymbolicPage::parse(id, text);
    p.retained = true;
    c.pages[id] = p;
  };
  add("Q1", "[b](<ref:Q2>)");
  add("Q2", "[c](<ref:Q3>)");
  add("Q3", "none");
  add("Q4", "[e](<ref:Q5>)");
  add("Q5", "none");
  auto pruned = prune_to_lcc(c);
  CHECK(pruned.retained_ids() == std::vector<EntityId>{"Q1", "Q2", "Q3"});
  CHECK(pruned.hyperlinks(Variant::rm) == pruned.hyperlinks(Variant::sm));
}

TEST_CASE("variant names") {
  CHECK(to_string(Variant::rm) == "rm");
  CHECK(variant_from("sm") == Variant::sm);
  CHECK_THROWS_AS(variant_from("xx"), ConfigError);
}
