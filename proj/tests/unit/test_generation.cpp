#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "../support/mock_client.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/generation.hpp"
#include "twinworld/mock_generation.hpp"

using namespace twinworld;
using nlohmann::json;

namespace {

GenerationRequest name_request(int slot) {
  return {"name_generation",
          json{{"entity_type_label", "city"},
               {"parents", json::array()},
               {"n_candidates", 1},
               {"avoid", json::array()},
               {"slot", slot}}};
}

}  // namespace

TEST_CASE("builtin templates cover every generation step") {
  const auto& t = TemplateStore::builtin();
  for (const char* id : {"page_generation", "insert_references", "restore_real_names", "entity_guess", "name_generation",
                         "fact_extraction", "single_hop_question", "compose_question", "navigation_step"}) {
    CHECK_MESSAGE(t.contains(id), id);
  }
}

TEST_CASE("rendering rejects unknown templates and unbound variables") {
  TemplateStore t(std::map<std::string, std::string>{{"greet", "Hello {{name}}."}});
  CHECK(t.render({"greet", json{{"name", "Ada"}}}) == "Hello Ada.");
  CHECK_THROWS_AS(t.render({"greet", json::object()}), RequestError);
  CHECK_THROWS_AS(t.render({"missing", json::object()}), RequestError);
  CHECK(t.variables("greet") == std::vector<std::string>{"name"});
}

TEST_CASE("request hashes depend on template and variables only") {
  CHECK(name_request(0).hash() == name_request(0).hash());
  CHECK(name_request(0).hash() != name_request(1).hash());
  GenerationRequest a = name_request(0);
  a.max_tokens = 10;
  CHECK(a.hash() == name_request(0).hash());
}

TEST_CASE("transient failures are retried and logged") {
  MockProfile p;
  p.failures.push_back({1, 2, ""});
  auto c = fixture::mock_client(p, 2);
  auto first = c.call(name_request(0));
  CHECK_FALSE(first.empty());
  CHECK(c.retries() == 2);
  auto log = c.log();
  REQUIRE(log.size() == 1);
  CHECK(log[0]["attempts"].size() == 3);
  CHECK(log[0]["response"] == first);
}

TEST_CASE("exhausted retries raise TransportError") {
  MockProfile p;
  p.failures.push_back({1, 5, "name_generation"});
  auto c = fixture::mock_client(p, 2);
  CHECK_THROWS_AS(c.call(name_request(0)), TransportError);
  CHECK(c.log()[0]["response"].is_null());
  CHECK_NOTHROW(c.call(name_request(1)));
}

TEST_CASE("mock responses are deterministic") {
  auto a = fixture::mock_client();
  auto b = fixture::mock_client();
  CHECK(a.call(name_request(3)) == b.call(name_request(3)));
}

TEST_CASE("replay returns recorded responses in order") {
  auto live = fixture::mock_client();
  std::string r0 = live.call(name_request(0));
  std::string r1 = live.call(name_request(1));
  auto replay = std::make_shared<ReplayPort>(live.log());
  GenerationClient c(replay);
  CHECK(c.call(name_request(1)) == r1);
  CHECK(c.call(name_request(0)) == r0);
  CHECK_THROWS_AS(c.call(name_request(2)), TransportError);
}

TEST_CASE("closed network guard stops live requests before any socket") {
  network_guard::reset();
  network_guard::deny(true);
  auto port = std::make_shared<ChatCompletionPort>("http://127.0.0.1:9/v1/chat/completions", "m", "k", 1);
  GenerationClient c(port, {0, 1, ""});
  CHECK_THROWS_AS(c.call(name_request(0)), TransportError);
  CHECK(network_guard::attempts() == 1);
  network_guard::deny(false);
  network_guard::reset();
  CHECK(network_guard::attempts() == 0);
}

TEST_CASE("client options are validated") {
  auto port = std::make_shared<MockGenerationPort>();
  CHECK_THROWS_AS(GenerationClient(port, {-1, 1, ""}), ConfigError);
  CHECK_THROWS_AS(GenerationClient(port, {0, 0, ""}), ConfigError);
  CHECK_THROWS_AS(GenerationClient(nullptr), ConfigError);
}

TEST_CASE("parallel_map keeps index order and bounds concurrency") {
  std::atomic<int> active{0}, peak{0};
  auto out = parallel_map<int>(40, 3, [&](std::size_t i) {
    int now = ++active;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::microseconds(200));
    --active;
    return static_cast<int>(i) * 2;
  });
  for (int i = 0; i < 40; ++i) CHECK(out[static_cast<std::size_t>(i)] == 2 * i);
  CHECK(peak.load() <= 3);
  CHECK_THROWS_AS(parallel_map<int>(5, 2, [](std::size_t i) -> int {
                    if (i == 3) throw InputError("boom");
                    return 0;
                  }),
                  InputError);
}

TEST_CASE("mock page renderer") {
  json facts = json::array({json{{"subject", "Kenya"}, {"relation", "capital"}, {"object", "Nairobi"}}});
  CHECK(render_mock_page(facts) == "Kenya capital Nairobi.\n");
  CHECK_THROWS_AS(render_mock_page(json::array()), InputError);
  CHECK(mock_insert_links("Kenya capital Nairobi.", json::array({json{{"id", "Q2"}, {"label", "Nairobi"}}})) ==
        "Kenya capital [Nairobi](<ref:Q2>).");
}
