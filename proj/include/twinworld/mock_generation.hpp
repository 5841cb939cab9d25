#pragma once
// Deterministic stand-in for every generation template, so that the whole
// pipeline runs offline. Output depends only on the profile and the request.

#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "twinworld/generation.hpp"

namespace twinworld {

struct ScheduledFailure {
  std::size_t call = 1;  // 1-based logical call index
  int times = 1;         // failing attempts before success
  std::string template_id;  // empty: count every template
};

struct MockProfile {
  std::string linker = "first_mention";  // first_mention | none
  std::string restorer = "replace";      // replace | keep_synthetic
  std::string guesser = "always_wrong";  // always_wrong
  std::string composer = "nested";       // nested | no_composition
  std::string navigator = "first_link";  // first_link
  std::map<std::string, std::deque<std::string>> scripted;  // consumed before strategies
  std::vector<ScheduledFailure> failures;

  static MockProfile from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

class MockGenerationPort : public GenerationPort {
 public:
  explicit MockGenerationPort(MockProfile profile = {});
  std::string complete(const GenerationRequest& request, const std::string& prompt, int attempt) override;
  std::string name() const override { return "mock"; }

 private:
  std::string respond(const GenerationRequest& request) const;

  MockProfile profile_;
  std::mutex mutex_;
  std::size_t logical_calls_ = 0;
  std::map<std::string, std::size_t> per_template_calls_;
  std::map<std::thread::id, std::pair<std::size_t, std::size_t>> current_;  // (global, per-template)
};

// One sentence per fact, in the given order:
//   "<subject> <relation> <object>." with " in <value>" for a time qualifier.
// `facts` entries carry subject, relation, object and optional qualifiers
// [{relation, kind, value}] as display strings.
std::string render_mock_page(const nlohmann::json& facts);

// Links the first whole-word mention of each label, longest labels first.
std::string mock_insert_links(const std::string& draft, const nlohmann::json& entity_map);

// Invents a capitalised name; parent names are carried into the result.
std::string mock_invent_name(std::uint64_t seed, const std::string& entity_type,
                             const std::vector<std::string>& parent_names);

}  // namespace twinworld
