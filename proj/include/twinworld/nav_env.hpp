#pragma once
// Page-navigation environment. An episode starts on the source page; the
// agent may follow an out-link of the current page or return to any page in
// its history. Every action, valid or not, costs one step.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinworld/corpus_builder.hpp"
#include "twinworld/nav_builder.hpp"

namespace twinworld {

enum class ObservationMode { links_only, content_links };
std::string_view to_string(ObservationMode m) noexcept;
ObservationMode observation_mode_from(std::string_view s);

inline constexpr int kStepCap = 30;

struct LinkView {
  std::string id;
  std::string text;
};

struct Observation {
  std::string page_id;
  std::string title;
  std::vector<LinkView> links;
  std::optional<std::string> content;  // content_links mode only
  std::string target_id;
  std::string target_title;
  std::optional<std::string> target_content;  // content_links mode only
  std::vector<std::string> history;
  int steps_remaining = 0;

  nlohmann::json to_json() const;
  // SHA-256 of the canonical JSON form.
  std::string digest() const;
};

enum class EpisodeStatus { ongoing, success, failure };

struct ActionOutcome {
  bool valid = true;
  std::string error;  // set when invalid
  Observation observation;
};

// Read-only view of one corpus variant: titles, page text, out-links.
class NavWorld {
 public:
  NavWorld(const Corpus& corpus, Variant variant);
  bool has_page(const std::string& id) const;
  const std::string& title(const std::string& id) const;
  const std::string& content(const std::string& id) const;
  // Out-links in order of first appearance, with their display text.
  const std::vector<LinkView>& links(const std::string& id) const;
  Variant variant() const { return variant_; }

 private:
  struct Page {
    std::string title;
    std::string content;
    std::vector<LinkView> links;
  };
  std::map<std::string, Page> pages_;
  Variant variant_;
};

class Episode {
 public:
  // Throws InputError when either task page is missing from the world.
  Episode(const NavWorld& world, NavTask task, ObservationMode mode, int step_cap = kStepCap);

  Observation observe() const;
  ActionOutcome click_link(const std::string& page_id);
  ActionOutcome backtrack(const std::string& page_id);
  // Ends the episode as a failure with the given reason (e.g. agent_error).
  void abort(const std::string& reason);

  EpisodeStatus status() const { return status_; }
  const std::string& failure_reason() const { return failure_reason_; }
  const std::string& current() const { return current_; }
  const std::vector<std::string>& history() const { return history_; }
  int steps_used() const { return steps_used_; }
  const NavTask& task() const { return task_; }
  ObservationMode mode() const { return mode_; }

 private:
  ActionOutcome finish_step(bool valid, std::string error);

  const NavWorld& world_;
  NavTask task_;
  ObservationMode mode_;
  int step_cap_;
  std::string current_;
  std::vector<std::string> history_;
  int steps_used_ = 0;
  EpisodeStatus status_ = EpisodeStatus::ongoing;
  std::string failure_reason_;
};

struct AgentAction {
  enum class Kind { click, backtrack } kind = Kind::click;
  std::string page_id;
  std::string reasoning;
};

// Parses "click_link_to_page(<id>)" or "backtrack_to_page_in_history(<id>)";
// the last tool call in the text wins and the text before it is the reasoning.
std::optional<AgentAction> parse_tool_call(const std::string& text);
std::string format_tool_call(const AgentAction& action);

class Agent {
 public:
  virtual ~Agent() = default;
  virtual void reset(const NavTask&) {}
  // Throws TransportError when the backing service fails.
  virtual AgentAction decide(const Observation& observation) = 0;
  virtual std::string name() const = 0;
};

struct TranscriptStep {
  int step = 0;
  std::string observation_digest;
  std::string action;  // formatted tool call
  std::string agent_text;
  bool valid = true;
  std::string error;
  std::string page_after;
};

struct Transcript {
  NavTask task;
  Variant variant = Variant::sm;
  ObservationMode mode = ObservationMode::links_only;
  std::string agent;
  std::vector<TranscriptStep> steps;
  std::vector<std::string> visited;  // pages in history order
  EpisodeStatus status = EpisodeStatus::ongoing;
  std::string failure_reason;
  int steps_used = 0;

  // header, one record per step, terminal record
  std::string to_jsonl() const;
  static Transcript from_jsonl(const std::string& text);
};

using AgentFactory = std::function<std::unique_ptr<Agent>()>;

// One fresh agent per task. Transport failures end the episode as
// failure(agent_error). Episodes are independent and may run concurrently.
std::vector<Transcript> run_agent(const std::vector<NavTask>& tasks, const AgentFactory& make_agent,
                                  const NavWorld& world, ObservationMode mode, int in_flight = 1);

void save_transcripts(const std::vector<Transcript>& transcripts, const std::string& path);
std::vector<Transcript> load_transcripts(const std::string& path);

}  // namespace twinworld
