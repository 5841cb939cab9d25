#include "twinworld/agents.hpp"

#include <algorithm>

#include "twinworld/errors.hpp"
#include "twinworld/hashing.hpp"

namespace twinworld {

using nlohmann::json;

void RandomAgent::reset(const NavTask& task) { rng_ = Rng(mix_seed(seed_, task.pair_id, 0)); }

AgentAction RandomAgent::decide(const Observation& obs) {
  AgentAction a;
  if (obs.links.empty()) {
    a.kind = AgentAction::Kind::backtrack;
    a.page_id = obs.history.front();
    a.reasoning = "Dead end.";
    return a;
  }
  const LinkView& l = obs.links[rng_.index(obs.links.size())];
  a.page_id = l.id;
  a.reasoning = "Trying " + l.text + ".";
  return a;
}

AgentAction ScriptedAgent::decide(const Observation&) {
  if (actions_.empty()) throw InputError("scripted agent has no actions");
  const AgentAction& a = actions_[std::min(next_, actions_.size() - 1)];
  ++next_;
  return a;
}

AgentAction OracleAgent::decide(const Observation& obs) {
  AgentAction a;
  auto from = graph_.index(obs.page_id);
  auto to = graph_.index(obs.target_id);
  std::vector<std::size_t> path;
  if (from && to) path = graph_.bfs_path(*from, *to);
  if (path.size() < 2) {
    a.kind = AgentAction::Kind::backtrack;
    a.page_id = obs.history.front();
    a.reasoning = "No route from here.";
    return a;
  }
  a.page_id = graph_.ids()[path[1]];
  for (const auto& l : obs.links) {
    if (l.id == a.page_id) {
      a.reasoning = "Next: " + l.text + ".";
      break;
    }
  }
  return a;
}

GenerationRequest navigation_request(const Observation& obs) {
  json links = json::array();
  for (const auto& l : obs.links) links.push_back({{"id", l.id}, {"text", l.text}});
  return GenerationRequest{"navigation_step",
                           json{{"target", obs.target_title + " (" + obs.target_id + ")" +
                                               (obs.target_content ? "\n" + *obs.target_content : "")},
                                {"current", obs.title + " (" + obs.page_id + ")"},
                                {"steps_remaining", std::to_string(obs.steps_remaining)},
                                {"history", obs.history},
                                {"links", links},
                                {"content", obs.content.value_or("")}},
                           512};
}

AgentAction ModelAgent::decide(const Observation& obs) {
  std::string reply = client_.call(navigation_request(obs));
  if (auto a = parse_tool_call(reply)) return *a;
  AgentAction a;
  a.reasoning = trim(reply);
  return a;
}

std::string ModelAgent::name() const { return "model:" + client_.port().name(); }

}  // namespace twinworld
