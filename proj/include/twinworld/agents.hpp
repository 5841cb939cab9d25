#pragma once
// Navigation agents: baselines for tests and the harness, and a model-backed
// agent that speaks through the navigation_step template.

#include <cstdint>
#include <string>
#include <vector>

#include "twinworld/generation.hpp"
#include "twinworld/nav_builder.hpp"
#include "twinworld/nav_env.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

// Clicks a uniformly random link; backtracks to the start page on dead ends.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  void reset(const NavTask& task) override;
  AgentAction decide(const Observation& obs) override;
  std::string name() const override { return "random"; }

 private:
  std::uint64_t seed_;
  Rng rng_;
};

// Plays a fixed list of actions, then repeats the last one.
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(std::vector<AgentAction> actions) : actions_(std::move(actions)) {}
  void reset(const NavTask&) override { next_ = 0; }
  AgentAction decide(const Observation& obs) override;
  std::string name() const override { return "scripted"; }

 private:
  std::vector<AgentAction> actions_;
  std::size_t next_ = 0;
};

// Follows a directed shortest path to the target.
class OracleAgent : public Agent {
 public:
  explicit OracleAgent(const DocGraph& graph) : graph_(graph) {}
  AgentAction decide(const Observation& obs) override;
  std::string name() const override { return "oracle"; }

 private:
  const DocGraph& graph_;
};

// Asks a generation client for the next move. A reply without a tool call
// becomes an invalid click.
class ModelAgent : public Agent {
 public:
  explicit ModelAgent(GenerationClient& client) : client_(client) {}
  AgentAction decide(const Observation& obs) override;
  std::string name() const override;

 private:
  GenerationClient& client_;
};

GenerationRequest navigation_request(const Observation& obs);

}  // namespace twinworld
