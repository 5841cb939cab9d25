#pragma once
// Shortest-path agent built from its own copy of the link structure. It
// recomputes distances to the target at every step from the observation.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "twinworld/nav_env.hpp"

namespace oracle {

class BfsAgent : public twinworld::Agent {
 public:
  explicit BfsAgent(const std::map<std::string, std::set<std::string>>& links) {
    for (const auto& [id, unused] : links) {
      index_[id] = static_cast<int>(ids_.size());
      ids_.push_back(id);
    }
    out_.resize(ids_.size());
    for (const auto& [id, ts] : links) {
      for (const auto& t : ts) {
        if (t != id && index_.count(t)) out_[index_[id]].push_back(index_[t]);
      }
    }
  }

  twinworld::AgentAction decide(const twinworld::Observation& obs) override {
    using Kind = twinworld::AgentAction::Kind;
    int cur = index_.at(obs.page_id);
    int dst = index_.at(obs.target_id);
    std::vector<std::vector<int>> rev(out_.size());
    for (std::size_t v = 0; v < out_.size(); ++v) {
      for (int w : out_[v]) rev[w].push_back(static_cast<int>(v));
    }
    auto dist = bfs_distances(rev, dst);
    for (const auto& l : obs.links) {
      auto it = index_.find(l.id);
      if (it == index_.end()) continue;
      int w = it->second;
      if (dist[w] >= 0 && dist[w] == dist[cur] - 1) return {Kind::click, l.id, "bfs"};
    }
    return {Kind::backtrack, obs.history.front(), "stuck"};
  }

  std::string name() const override { return "bfs"; }

 private:
  std::vector<std::string> ids_;
  std::map<std::string, int> index_;
  std::vector<std::vector<int>> out_;
};

}  // namespace oracle
