#pragma once

#include <memory>

#include "twinworld/generation.hpp"
#include "twinworld/mock_generation.hpp"

namespace fixture {

inline twinworld::GenerationClient mock_client(twinworld::MockProfile profile = {}, int max_retries = 2) {
  twinworld::ClientOptions o;
  o.max_retries = max_retries;
  o.in_flight = 2;
  return twinworld::GenerationClient(std::make_shared<twinworld::MockGenerationPort>(std::move(profile)), o);
}

inline twinworld::MockProfile scripted(const std::string& template_id, std::vector<std::string> replies) {
  twinworld::MockProfile p;
  for (auto& r : replies) p.scripted[template_id].push_back(std::move(r));
  return p;
}

}  // namespace fixture
