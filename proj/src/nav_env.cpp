#include "twinworld/nav_env.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "twinworld/errors.hpp"
#include "twinworld/generation.hpp"
#include "twinworld/hashing.hpp"

namespace twinworld {

using nlohmann::json;

std::string_view to_string(ObservationMode m) noexcept {
  return m == ObservationMode::links_only ? "links_only" : "content_links";
}

ObservationMode observation_mode_from(std::string_view s) {
  if (s == "links_only") return ObservationMode::links_only;
  if (s == "content_links") return ObservationMode::content_links;
  throw ConfigError("mode must be 'links_only' or 'content_links', got '" + std::string(s) + "'");
}

namespace {

std::string_view status_name(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::ongoing: return "ongoing";
    case EpisodeStatus::success: return "success";
    case EpisodeStatus::failure: return "failure";
  }
  return "ongoing";
}

EpisodeStatus status_from(std::string_view s) {
  if (s == "success") return EpisodeStatus::success;
  if (s == "failure") return EpisodeStatus::failure;
  if (s == "ongoing") return EpisodeStatus::ongoing;
  throw InputError("unknown episode status '" + std::string(s) + "'");
}

}  // namespace

json Observation::to_json() const {
  json links_j = json::array();
  for (const auto& l : links) links_j.push_back({{"id", l.id}, {"text", l.text}});
  json j{{"page_id", page_id},
         {"title", title},
         {"links", links_j},
         {"target_id", target_id},
         {"target_title", target_title},
         {"history", history},
         {"steps_remaining", steps_remaining}};
  if (content) j["content"] = *content;
  if (target_content) j["target_content"] = *target_content;
  return j;
}

std::string Observation::digest() const { return sha256_hex(to_json().dump()); }

NavWorld::NavWorld(const Corpus& corpus, Variant variant) : variant_(variant) {
  for (const auto& id : corpus.retained_ids()) {
    const SymbolicPage& p = corpus.page(id, variant);
    Page page;
    page.title = corpus.title(id, variant);
    page.content = p.text;
    std::set<std::string> seen;
    for (const auto& r : p.refs) {
      if (r.id == id || !corpus.retained(r.id) || !seen.insert(r.id).second) continue;
      page.links.push_back({r.id, r.display});
    }
    pages_.emplace(id, std::move(page));
  }
}

bool NavWorld::has_page(const std::string& id) const { return pages_.count(id) > 0; }

const std::string& NavWorld::title(const std::string& id) const {
  auto it = pages_.find(id);
  if (it == pages_.end()) throw InputError("unknown page " + id);
  return it->second.title;
}

const std::string& NavWorld::content(const std::string& id) const {
  auto it = pages_.find(id);
  if (it == pages_.end()) throw InputError("unknown page " + id);
  return it->second.content;
}

const std::vector<LinkView>& NavWorld::links(const std::string& id) const {
  auto it = pages_.find(id);
  if (it == pages_.end()) throw InputError("unknown page " + id);
  return it->second.links;
}

Episode::Episode(const NavWorld& world, NavTask task, ObservationMode mode, int step_cap)
    : world_(world), task_(std::move(task)), mode_(mode), step_cap_(step_cap) {
  if (!world_.has_page(task_.source)) throw InputError("source page " + task_.source + " is not in the corpus");
  if (!world_.has_page(task_.target)) throw InputError("target page " + task_.target + " is not in the corpus");
  if (step_cap_ < 1) throw ConfigError("step cap must be >= 1");
  current_ = task_.source;
  history_.push_back(current_);
  if (current_ == task_.target) status_ = EpisodeStatus::success;
}

Observation Episode::observe() const {
  Observation o;
  o.page_id = current_;
  o.title = world_.title(current_);
  o.links = world_.links(current_);
  o.target_id = task_.target;
  o.target_title = world_.title(task_.target);
  if (mode_ == ObservationMode::content_links) {
    o.content = world_.content(current_);
    o.target_content = world_.content(task_.target);
  }
  o.history = history_;
  o.steps_remaining = step_cap_ - steps_used_;
  return o;
}

ActionOutcome Episode::finish_step(bool valid, std::string error) {
  ++steps_used_;
  if (current_ == task_.target) {
    status_ = EpisodeStatus::success;
  } else if (steps_used_ >= step_cap_) {
    status_ = EpisodeStatus::failure;
    failure_reason_ = "step_cap";
  }
  return {valid, std::move(error), observe()};
}

ActionOutcome Episode::click_link(const std::string& page_id) {
  if (status_ != EpisodeStatus::ongoing) throw InputError("episode already finished");
  const auto& links = world_.links(current_);
  bool ok = std::any_of(links.begin(), links.end(), [&](const LinkView& l) { return l.id == page_id; });
  if (!ok) return finish_step(false, "'" + page_id + "' is not a link on the current page");
  current_ = page_id;
  history_.push_back(page_id);
  return finish_step(true, "");
}

ActionOutcome Episode::backtrack(const std::string& page_id) {
  if (status_ != EpisodeStatus::ongoing) throw InputError("episode already finished");
  if (std::find(history_.begin(), history_.end(), page_id) == history_.end()) {
    return finish_step(false, "'" + page_id + "' has not been visited");
  }
  current_ = page_id;
  return finish_step(true, "");
}

void Episode::abort(const std::string& reason) {
  if (status_ != EpisodeStatus::ongoing) return;
  status_ = EpisodeStatus::failure;
  failure_reason_ = reason;
}

std::optional<AgentAction> parse_tool_call(const std::string& text) {
  static const std::regex call(R"((click_link_to_page|backtrack_to_page_in_history)\(\s*["']?([^"')\s]+)["']?\s*\))");
  std::optional<AgentAction> last;
  std::size_t last_pos = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), call); it != std::sregex_iterator(); ++it) {
    AgentAction a;
    a.kind = (*it)[1] == "click_link_to_page" ? AgentAction::Kind::click : AgentAction::Kind::backtrack;
    a.page_id = (*it)[2];
    last = a;
    last_pos = static_cast<std::size_t>(it->position());
  }
  if (last) last->reasoning = trim(text.substr(0, last_pos));
  return last;
}

std::string format_tool_call(const AgentAction& action) {
  return std::string(action.kind == AgentAction::Kind::click ? "click_link_to_page" : "backtrack_to_page_in_history") +
         "(" + action.page_id + ")";
}

std::string Transcript::to_jsonl() const {
  std::string out;
  out += json{{"type", "header"},
              {"pair_id", task.pair_id},
              {"task", task},
              {"variant", to_string(variant)},
              {"mode", to_string(mode)},
              {"agent", agent},
              {"policy", {{"step_cap", kStepCap}, {"invalid_action_costs_step", true}, {"history", "append-only"}}}}
             .dump() +
         "\n";
  for (const auto& s : steps) {
    out += json{{"type", "step"},
                {"step", s.step},
                {"observation_digest", s.observation_digest},
                {"action", s.action},
                {"agent_text", s.agent_text},
                {"valid", s.valid},
                {"error", s.error},
                {"page_after", s.page_after}}
               .dump() +
           "\n";
  }
  out += json{{"type", "terminal"},
              {"status", status_name(status)},
              {"reason", failure_reason},
              {"steps", steps_used},
              {"visited", visited}}
             .dump() +
         "\n";
  return out;
}

namespace {

std::vector<Transcript> parse_transcripts(std::istream& in) {
  std::vector<Transcript> out;
  std::string line;
  std::size_t lineno = 0;
  bool open = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    std::string type = j.value("type", "");
    if (type == "header") {
      Transcript t;
      t.task = j.at("task").get<NavTask>();
      t.variant = variant_from(j.at("variant").get<std::string>());
      t.mode = observation_mode_from(j.at("mode").get<std::string>());
      t.agent = j.value("agent", "");
      out.push_back(std::move(t));
      open = true;
    } else if (type == "step") {
      if (!open) throw ParseError(lineno, "step record outside an episode");
      TranscriptStep s;
      s.step = j.at("step").get<int>();
      s.observation_digest = j.value("observation_digest", "");
      s.action = j.value("action", "");
      s.agent_text = j.value("agent_text", "");
      s.valid = j.value("valid", true);
      s.error = j.value("error", "");
      s.page_after = j.value("page_after", "");
      out.back().steps.push_back(std::move(s));
    } else if (type == "terminal") {
      if (!open) throw ParseError(lineno, "terminal record outside an episode");
      Transcript& t = out.back();
      t.status = status_from(j.at("status").get<std::string>());
      t.failure_reason = j.value("reason", "");
      t.steps_used = j.at("steps").get<int>();
      t.visited = j.value("visited", std::vector<std::string>{});
      open = false;
    } else {
      throw ParseError(lineno, "unknown record type '" + type + "'");
    }
  }
  if (open) throw InputError("transcript stream ends inside an episode");
  return out;
}

}  // namespace

Transcript Transcript::from_jsonl(const std::string& text) {
  std::istringstream in(text);
  auto all = parse_transcripts(in);
  if (all.size() != 1) throw InputError("expected exactly one transcript");
  return all.front();
}

std::vector<Transcript> run_agent(const std::vector<NavTask>& tasks, const AgentFactory& make_agent,
                                  const NavWorld& world, ObservationMode mode, int in_flight) {
  return parallel_map<Transcript>(tasks.size(), in_flight, [&](std::size_t i) {
    const NavTask& task = tasks[i];
    auto agent = make_agent();
    agent->reset(task);
    Episode ep(world, task, mode);
    Transcript t;
    t.task = task;
    t.variant = world.variant();
    t.mode = mode;
    t.agent = agent->name();
    while (ep.status() == EpisodeStatus::ongoing) {
      Observation obs = ep.observe();
      AgentAction action;
      try {
        action = agent->decide(obs);
      } catch (const TransportError& e) {
        ep.abort("agent_error");
        break;
      }
      ActionOutcome out = action.kind == AgentAction::Kind::click ? ep.click_link(action.page_id)
                                                                  : ep.backtrack(action.page_id);
      TranscriptStep s;
      s.step = ep.steps_used();
      s.observation_digest = obs.digest();
      s.action = format_tool_call(action);
      s.agent_text = action.reasoning;
      s.valid = out.valid;
      s.error = out.error;
      s.page_after = ep.current();
      t.steps.push_back(std::move(s));
    }
    t.visited = ep.history();
    t.status = ep.status();
    t.failure_reason = ep.failure_reason();
    t.steps_used = ep.steps_used();
    return t;
  });
}

void save_transcripts(const std::vector<Transcript>& transcripts, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& t : transcripts) out << t.to_jsonl();
}

std::vector<Transcript> load_transcripts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_transcripts(in);
}

}  // namespace twinworld
