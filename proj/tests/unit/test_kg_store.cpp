#include <doctest.h>

#include <sstream>

#include "twinworld/errors.hpp"
#include "twinworld/kg_store.hpp"

using namespace twinworld;

namespace {

const char* kEntities =
    R"({"id":"Q1","label":"Kenya","instance_of":["Q6256"]}
{"id":"Q2","label":"Nairobi","instance_of":["Q515"],"aliases":["Nai"]}
{"id":"Q6256","label":"country"}
{"id":"Q515","label":"city"}
{"id":"Q3","label":"2019","instance_of":["Q577"]}
{"id":"Q577","label":"year"}
)";

const char* kFacts =
    R"({"subject":"Q2","property":"P17","property_label":"country","object":{"entity":"Q1"}}
{"subject":"Q2","property":"P17","property_label":"country","object":{"entity":"Q1"}}
{"subject":"Q1","property":"P571","property_label":"inception","object":{"literal":{"kind":"timestamp","value":"+1963-12-12T00:00:00Z"}}}
{"subject":"Q2","property":"P585","property_label":"point in time","object":{"entity":"Q3"}}
)";

KnowledgeGraph load(const std::string& e, const std::string& f) {
  std::istringstream es(e), fs(f);
  return ingest_kg(es, fs);
}

}  // namespace

TEST_CASE("ingest deduplicates facts and indexes incidence") {
  auto kg = load(kEntities, kFacts);
  CHECK(kg.entities().size() == 6);
  CHECK(kg.facts().size() == 3);
  CHECK(kg.incident("Q1").size() == 2);
  CHECK(kg.at("Q2").aliases == std::vector<std::string>{"Nai"});
  CHECK(kg.at("Q1").is_named);
  CHECK_FALSE(kg.at("Q6256").is_named);
}

TEST_CASE("malformed lines report their line number") {
  std::string bad = std::string(kEntities) + "{\"id\": \n";
  try {
    load(bad, kFacts);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
}

TEST_CASE("dangling endpoints raise ReferentialError") {
  std::string facts = R"({"subject":"Q1","property":"P1","property_label":"x","object":{"entity":"Q99"}})";
  try {
    load(kEntities, facts);
    FAIL("expected ReferentialError");
  } catch (const ReferentialError& e) {
    CHECK(e.missing() == std::vector<std::string>{"Q99"});
  }
}

TEST_CASE("filter drops time terms and is idempotent") {
  auto kg = load(kEntities, kFacts);
  FilterConfig cfg;
  cfg.time_types = {"Q577"};
  auto once = filter_entities(kg, cfg);
  CHECK_FALSE(once.contains("Q3"));
  CHECK(once.contains("Q1"));
  for (const auto& f : once.facts()) CHECK(f.object.entity != "Q3");
  auto twice = filter_entities(once, cfg);
  CHECK(twice.fingerprint() == once.fingerprint());
}

TEST_CASE("default filter drops digit labels and empty labels") {
  std::string ents = R"({"id":"Q1","label":"Alpha"}
{"id":"Q2","label":"Route 66"}
{"id":"Q3","label":""}
)";
  auto kg = load(ents, "");
  auto f = filter_entities(kg);
  CHECK(f.contains("Q1"));
  CHECK_FALSE(f.contains("Q2"));
  CHECK_FALSE(f.contains("Q3"));
}

TEST_CASE("named entity rule uses the first cased letter") {
  CHECK(is_named_entity("Kenya"));
  CHECK(is_named_entity("'Ndrangheta"));
  CHECK_FALSE(is_named_entity("'s-Hertogenbosch"));
  CHECK_FALSE(is_named_entity("city"));
  CHECK_FALSE(is_named_entity("eBay"));
  CHECK_FALSE(is_named_entity("1999"));
}

TEST_CASE("timestamps display without sign, time or zero fields") {
  CHECK(display_literal({LiteralKind::timestamp, "+1864-00-00T00:00:00Z"}) == "1864");
  CHECK(display_literal({LiteralKind::timestamp, "+1963-12-12T00:00:00Z"}) == "1963-12-12");
  CHECK(display_literal({LiteralKind::quantity, "42"}) == "42");
}

TEST_CASE("type resolution substitutes named mentions") {
  std::string ents = R"({"id":"Q1","label":"Kenya","instance_of":["Q10"]}
{"id":"Q10","label":"country"}
{"id":"Q2","label":"Kenyan shilling","instance_of":["Q11"]}
{"id":"Q11","label":"currency of Kenya"}
)";
  auto kg = load(ents, "");
  CHECK(resolve_type_label("Q1", kg) == "country");
  CHECK(resolve_type_label("Q2", kg) == "currency of country");
}

TEST_CASE("type resolution past the depth cap throws") {
  std::string ents = R"({"id":"Q1","label":"Alpha","instance_of":["Q10"]}
{"id":"Q10","label":"thing of Alpha"}
)";
  auto kg = load(ents, "");
  CHECK_THROWS_AS(resolve_type_label("Q1", kg, 3), UnresolvedTypeError);
}

TEST_CASE("fingerprint is stable under input order") {
  auto a = load(kEntities, kFacts);
  std::string shuffled_e = R"({"id":"Q577","label":"year"}
{"id":"Q515","label":"city"}
{"id":"Q3","label":"2019","instance_of":["Q577"]}
{"id":"Q6256","label":"country"}
{"id":"Q2","label":"Nairobi","instance_of":["Q515"],"aliases":["Nai"]}
{"id":"Q1","label":"Kenya","instance_of":["Q6256"]}
)";
  std::string shuffled_f = R"({"subject":"Q2","property":"P585","property_label":"point in time","object":{"entity":"Q3"}}
{"subject":"Q1","property":"P571","property_label":"inception","object":{"literal":{"kind":"timestamp","value":"+1963-12-12T00:00:00Z"}}}
{"subject":"Q2","property":"P17","property_label":"country","object":{"entity":"Q1"}}
)";
  auto b = load(shuffled_e, shuffled_f);
  CHECK(a.fingerprint() == b.fingerprint());
}

TEST_CASE("join_with_and") {
  CHECK(join_with_and({}) == "");
  CHECK(join_with_and({"a"}) == "a");
  CHECK(join_with_and({"a", "b"}) == "a and b");
  CHECK(join_with_and({"a", "b", "c"}) == "a, b and c");
}
